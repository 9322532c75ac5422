use std::sync::Arc;

use marle_core::closure::{fit_equilibrium, ClosureTolerances};
use marle_core::dynamics::{diagnostics, Closure, EquilibriumSolver, Relaxer};
use marle_core::juttner::{equilibrium_from_f, juttner_eval, moment_match_residuals, ratio, EquilibriumParams, Juttner};
use marle_core::moments::{compute_moments, eckart_decompose, scalar_moment_ratio};
use marle_core::quadrature::{build_phase_grid, Distribution, GridConfig, PhaseGrid};
use marle_core::{Constants, Error};

fn grid(n_p: usize, n_i: usize, gamma_min: f64, sigma: f64) -> Arc<PhaseGrid> {
    let consts = Constants::nondimensional(sigma).unwrap();
    build_phase_grid(GridConfig::for_gamma_min(n_p, n_i, gamma_min), consts).unwrap()
}

/// Jüttner times `1 + 0.8·exp(−|p/mc − (1, 0.5, 0)|²/0.5)`: anisotropic and
/// far from equilibrium.
fn bumped(grid: &Arc<PhaseGrid>, gamma: f64) -> Distribution {
    let fe = Juttner::new(EquilibriumParams::at_rest(1.0, gamma).unwrap(), *grid.consts()).unwrap();
    Distribution::from_fn(grid.clone(), |p, i| {
        let d2 = (p[1] - 1.0).powi(2) + (p[2] - 0.5).powi(2) + p[3].powi(2);
        fe.value(p, i) * (1.0 + 0.8 * (-d2 / 0.5).exp())
    })
    .unwrap()
}

#[test]
fn discrete_ratio_is_frame_independent() {
    // The scalar ratio of a sampled Jüttner depends on γ alone, up to the
    // grid error (a few 1e-3 here).
    let g = grid(32, 16, 3.0, 0.5);
    let consts = *g.consts();
    let want = ratio(3.0, &consts, 1e-12).unwrap();
    for u in [[0.0; 3], [0.4, 0.0, 0.0], [0.2, -0.3, 0.25]] {
        let f = juttner_eval(&EquilibriumParams::new(1.0, u, 3.0).unwrap(), &g).unwrap();
        let ms = compute_moments(&f);
        let ef = eckart_decompose(&ms, &consts).unwrap();
        let r = scalar_moment_ratio(&ms, &ef);
        assert!((r - want).abs() < 1e-2 * want, "u {u:?}: {r} vs {want}");
    }
}

#[test]
fn recovery_improves_with_refinement() {
    let params = EquilibriumParams::new(1.0, [0.3, 0.0, -0.2], 4.0).unwrap();
    let mut errors = Vec::new();
    for n_p in [16, 32] {
        let g = grid(n_p, n_p / 2, 4.0, 0.0);
        let got = equilibrium_from_f(&juttner_eval(&params, &g).unwrap()).unwrap();
        errors.push((got.gamma - 4.0).abs() / 4.0 + (got.n - 1.0).abs() + (got.u[0] - 0.3).abs());
    }
    assert!(errors[1] < 0.25 * errors[0], "{errors:?}");
}

#[test]
fn wrong_temperature_gives_large_residual() {
    let g = grid(48, 32, 3.0, 0.0);
    let f = juttner_eval(&EquilibriumParams::at_rest(1.0, 3.0).unwrap(), &g).unwrap();
    let right = equilibrium_from_f(&f).unwrap();
    let (rs_right, _) = moment_match_residuals(&f, &juttner_eval(&right, &g).unwrap()).unwrap();
    let wrong = EquilibriumParams::at_rest(right.n, 4.0).unwrap();
    let (rs_wrong, rv_wrong) = moment_match_residuals(&f, &juttner_eval(&wrong, &g).unwrap()).unwrap();
    assert!(rs_wrong.abs() > 1e-2, "{rs_wrong}");
    // V = m n U does not involve γ, so only the scalar condition detects it.
    assert!(rv_wrong.max_abs() < 1e-3, "{rv_wrong:?}");
    assert!(rs_wrong.abs() > 100.0 * rs_right.abs(), "{rs_wrong} vs {rs_right}");
}

#[test]
fn conservative_fit_matches_a_far_from_equilibrium_state() {
    let g = grid(24, 12, 2.0, 1.0);
    let f = bumped(&g, 3.0);
    let fit = fit_equilibrium(&f, None, &ClosureTolerances::default()).unwrap();
    let (rs, rv) = moment_match_residuals(&f, &fit.fe).unwrap();
    assert!(rs.abs() < 1e-10 && rv.max_abs() < 1e-10, "{rs} {rv:?}");
    // The bump carries momentum along +x and +y.
    let p = fit.multipliers.to_params(g.consts()).unwrap();
    assert!(p.u[0] > 0.0 && p.u[1] > 0.0 && p.u[2].abs() < 1e-12);
}

#[test]
fn entropy_production_is_nonnegative() {
    // With matched moments ln f_E is a collision invariant on the grid, so the
    // production is ∫ν(f_E − f)(ln f_E − ln f) ≥ 0. The analytic closure has
    // no such guarantee on coarse grids.
    for sigma in [-0.5, 0.0, 2.0] {
        let g = grid(16, 8, 2.0, sigma);
        let f = bumped(&g, 2.5);
        let fe = EquilibriumSolver::new(Closure::Conservative).solve(&f).unwrap();
        let d = diagnostics(&f, &fe, 0.0).unwrap();
        assert!(d.entropy_production > 0.0, "sigma {sigma}: {}", d.entropy_production);
    }
}

#[test]
fn relaxation_drives_the_residual_to_the_equilibrium() {
    let g = grid(16, 8, 2.0, 0.0);
    let f0 = bumped(&g, 2.5);
    let mut relaxer = Relaxer::new(f0, 0.5, true, Closure::Conservative).unwrap();
    let gap = |r: &mut Relaxer| {
        let fe = r.equilibrium().unwrap();
        r.state().max_abs_diff(&fe).unwrap()
    };
    let initial = gap(&mut relaxer);
    relaxer.advance(40).unwrap();
    assert!(gap(&mut relaxer) < 1e-3 * initial);
}

#[test]
fn zero_distribution_is_rejected() {
    let g = grid(8, 4, 2.0, 0.0);
    let err = equilibrium_from_f(&Distribution::zeros(g)).unwrap_err();
    assert!(matches!(err, Error::InvalidDistribution(_) | Error::NegativeTimeComponent(_)), "{err:?}");
}
