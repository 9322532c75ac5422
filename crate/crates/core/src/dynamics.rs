//! Marle collision operator, homogeneous relaxation, periodic slab transport
//! and the conservation/entropy diagnostics.

use alloc::sync::Arc;
use alloc::vec::Vec;

use libm::{exp, fabs, log};

use crate::closure::{fit_equilibrium, ClosureTolerances, Multipliers};
use crate::juttner::{equilibrium_from_f_with, juttner_eval, moment_match_residuals, EquilibriumParams, SolverTolerances};
use crate::moments::compute_moments;
use crate::quadrature::{floor_negative, Distribution, PhaseGrid};
use crate::spacetime::FourVector;
use crate::{Error, Result};

/// RK4 is unstable on the negative real axis beyond `dt·ν ≈ 2.785`.
pub const STIFFNESS_LIMIT: f64 = 2.8;

/// How the equilibrium of a state is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Closure {
    /// `(n, U, γ)` from the Eckart frame and the coldness relation, evaluated
    /// with the continuum normaliser. Conserves to quadrature accuracy.
    Analytic,
    /// Jüttner fitted to the discrete moments. Conserves to roundoff.
    #[default]
    Conservative,
}

/// Equilibrium solver that remembers its last fit as a warm start.
#[derive(Clone, Debug)]
pub struct EquilibriumSolver {
    closure: Closure,
    tolerances: SolverTolerances,
    closure_tolerances: ClosureTolerances,
    warm: Option<Multipliers>,
    last_params: Option<EquilibriumParams>,
}

impl EquilibriumSolver {
    pub fn new(closure: Closure) -> Self {
        EquilibriumSolver {
            closure,
            tolerances: SolverTolerances::default(),
            closure_tolerances: ClosureTolerances::default(),
            warm: None,
            last_params: None,
        }
    }

    pub fn with_tolerances(mut self, tolerances: SolverTolerances, closure_tolerances: ClosureTolerances) -> Self {
        self.tolerances = tolerances;
        self.closure_tolerances = closure_tolerances;
        self
    }

    pub fn closure(&self) -> Closure {
        self.closure
    }

    /// Multipliers of the last conservative fit.
    pub fn multipliers(&self) -> Option<&Multipliers> {
        self.warm.as_ref()
    }

    /// Parameters of the last analytic solve.
    pub fn last_params(&self) -> Option<&EquilibriumParams> {
        self.last_params.as_ref()
    }

    /// Equilibrium distribution of `f`.
    pub fn solve(&mut self, f: &Distribution) -> Result<Distribution> {
        match self.closure {
            Closure::Analytic => {
                let params = equilibrium_from_f_with(f, &self.tolerances)?;
                self.last_params = Some(params);
                juttner_eval(&params, f.grid())
            }
            Closure::Conservative => {
                let fit = match self.warm {
                    Some(ref m) => fit_equilibrium(f, Some(m), &self.closure_tolerances)?,
                    None => {
                        let params = equilibrium_from_f_with(f, &self.tolerances)?;
                        self.last_params = Some(params);
                        let start = Multipliers::from_params(&params, f.grid().consts())?;
                        fit_equilibrium(f, Some(&start), &self.closure_tolerances)?
                    }
                };
                self.warm = Some(fit.multipliers);
                Ok(fit.fe)
            }
        }
    }
}

/// `ν = cm/(τ(1+I/mc²)p⁰)` at every node, in storage order.
pub fn collision_frequencies(grid: &PhaseGrid) -> Vec<f64> {
    let consts = grid.consts();
    let cm_over_tau = consts.c() * consts.m() / consts.tau();
    let mut nu = Vec::with_capacity(grid.len());
    for p in grid.momenta() {
        for &e in grid.energy_factors() {
            nu.push(cm_over_tau / (e * p[0]));
        }
    }
    nu
}

/// Largest collision frequency on the grid.
pub fn max_collision_frequency(grid: &PhaseGrid) -> f64 {
    let consts = grid.consts();
    let p0_min = grid.momenta().iter().fold(f64::INFINITY, |a, p| a.min(p[0]));
    let e_min = grid.energy_factors().iter().fold(f64::INFINITY, |a, e| a.min(*e));
    consts.c() * consts.m() / (consts.tau() * e_min * p0_min)
}

/// The nodewise rate `Q = ν(f_E − f)`.
pub fn collision_q(f: &Distribution, fe: &Distribution) -> Result<Vec<f64>> {
    f.check_grid(fe)?;
    let nu = collision_frequencies(f.grid());
    Ok(rate(&nu, f.values(), fe.values()))
}

fn rate(nu: &[f64], f: &[f64], fe: &[f64]) -> Vec<f64> {
    nu.iter().zip(f).zip(fe).map(|((n, f), e)| n * (e - f)).collect()
}

fn check_step(dt: f64, grid: &PhaseGrid) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidTimeStep(dt));
    }
    let stiffness = dt * max_collision_frequency(grid);
    if stiffness > STIFFNESS_LIMIT {
        return Err(Error::StiffnessWarning { stiffness });
    }
    Ok(())
}

/// `f_E + (f₀ − f_E)e^{−νt}` towards a given equilibrium.
pub fn relax_exact_towards(f0: &Distribution, fe: &Distribution, t: f64) -> Result<Distribution> {
    f0.check_grid(fe)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidTimeStep(t));
    }
    if t == 0.0 {
        return Ok(f0.clone());
    }
    let nu = collision_frequencies(f0.grid());
    let values = nu
        .iter()
        .zip(f0.values())
        .zip(fe.values())
        .map(|((n, f), e)| e + (f - e) * exp(-n * t))
        .collect();
    Ok(Distribution::from_raw(f0.grid().clone(), values))
}

/// Exact homogeneous relaxation with the equilibrium of `f0` held fixed.
pub fn relax_exact(f0: &Distribution, t: f64) -> Result<Distribution> {
    relax_exact_with(f0, t, Closure::Analytic)
}

pub fn relax_exact_with(f0: &Distribution, t: f64, closure: Closure) -> Result<Distribution> {
    let fe = EquilibriumSolver::new(closure).solve(f0)?;
    relax_exact_towards(f0, &fe, t)
}

fn axpy(grid: &Arc<PhaseGrid>, f: &[f64], a: f64, k: &[f64]) -> Distribution {
    Distribution::from_raw(grid.clone(), f.iter().zip(k).map(|(f, k)| f + a * k).collect())
}

/// One classical RK4 step of `df/dt = ν(f_E − f)`; `equilibrium` supplies
/// `f_E` for each stage.
fn rk4_step<E>(f: &Distribution, dt: f64, nu: &[f64], mut equilibrium: E) -> Result<Distribution>
where
    E: FnMut(&Distribution) -> Result<Distribution>,
{
    let grid = f.grid();
    let x = f.values();
    let k1 = rate(nu, x, equilibrium(f)?.values());
    let f2 = axpy(grid, x, 0.5 * dt, &k1);
    let k2 = rate(nu, f2.values(), equilibrium(&f2)?.values());
    let f3 = axpy(grid, x, 0.5 * dt, &k2);
    let k3 = rate(nu, f3.values(), equilibrium(&f3)?.values());
    let f4 = axpy(grid, x, dt, &k3);
    let k4 = rate(nu, f4.values(), equilibrium(&f4)?.values());
    let sixth = dt / 6.0;
    let mut values: Vec<f64> = (0..x.len())
        .map(|i| x[i] + sixth * ((k1[i] + k4[i]) + 2.0 * (k2[i] + k3[i])))
        .collect();
    floor_negative(grid, &mut values);
    Ok(Distribution::from_raw(grid.clone(), values))
}

/// Homogeneous RK4 integration.
///
/// With `refreeze` the equilibrium is re-solved at every stage; otherwise the
/// equilibrium of the initial state is kept for the whole run.
#[derive(Debug)]
pub struct Relaxer {
    f: Distribution,
    t: f64,
    dt: f64,
    nu: Vec<f64>,
    solver: EquilibriumSolver,
    frozen: Option<Distribution>,
}

impl Relaxer {
    pub fn new(f0: Distribution, dt: f64, refreeze: bool, closure: Closure) -> Result<Self> {
        check_step(dt, f0.grid())?;
        let mut solver = EquilibriumSolver::new(closure);
        let frozen = if refreeze { None } else { Some(solver.solve(&f0)?) };
        let nu = collision_frequencies(f0.grid());
        Ok(Relaxer { f: f0, t: 0.0, dt, nu, solver, frozen })
    }

    pub fn state(&self) -> &Distribution {
        &self.f
    }

    pub fn into_state(self) -> Distribution {
        self.f
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Equilibrium the collision operator uses for the current state.
    pub fn equilibrium(&mut self) -> Result<Distribution> {
        match &self.frozen {
            Some(fe) => Ok(fe.clone()),
            None => self.solver.solve(&self.f),
        }
    }

    pub fn step(&mut self) -> Result<()> {
        let next = match &self.frozen {
            Some(fe) => rk4_step(&self.f, self.dt, &self.nu, |_| Ok(fe.clone()))?,
            None => {
                let solver = &mut self.solver;
                rk4_step(&self.f, self.dt, &self.nu, |g| solver.solve(g))?
            }
        };
        self.f = next;
        self.t += self.dt;
        Ok(())
    }

    pub fn advance(&mut self, nsteps: usize) -> Result<()> {
        for _ in 0..nsteps {
            self.step()?;
        }
        Ok(())
    }
}

/// `nsteps` RK4 steps of size `dt` with the conservative closure.
pub fn relax_rk4(f0: &Distribution, dt: f64, nsteps: usize, refreeze: bool) -> Result<Distribution> {
    let mut r = Relaxer::new(f0.clone(), dt, refreeze, Closure::Conservative)?;
    r.advance(nsteps)?;
    Ok(r.into_state())
}

/// Conservation and entropy record of one homogeneous state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    /// `N = ∫∫ f φ dI dp`.
    pub n: f64,
    pub v: FourVector,
    pub t0: FourVector,
    pub h0: f64,
    /// `−k_B ∫∫ Q ln f φ dI dp`.
    pub entropy_production: f64,
    /// Moment-condition residuals of the equilibrium.
    pub residual_scalar: f64,
    pub residual_flux: FourVector,
    /// `∫∫ Q φ dI dp`.
    pub cancellation_number: f64,
    /// `(1/mc) ∫∫ p^ν (mc² + I) Q φ dI dp`.
    pub cancellation_energy: FourVector,
}

impl Diagnostics {
    /// Cancellation residuals made dimensionless: `τ|∫Q|/N` and
    /// `τ max_ν |∫p^ν(mc²+I)Q|/(mc T⁰⁰)`.
    pub fn relative_cancellation(&self, tau: f64) -> (f64, f64) {
        let scale = if tau.is_finite() { tau } else { 0.0 };
        let rn = scale * fabs(self.cancellation_number) / fabs(self.n);
        let rt = scale * self.cancellation_energy.max_abs() / fabs(self.t0[0]);
        (rn, rt)
    }
}

/// Diagnostics of `f` against the equilibrium `fe` at time `t`.
pub fn diagnostics(f: &Distribution, fe: &Distribution, t: f64) -> Result<Diagnostics> {
    let grid = f.grid();
    let consts = grid.consts();
    let ms = compute_moments(f);
    let q = collision_q(f, fe)?;
    let (residual_scalar, residual_flux) = moment_match_residuals(f, fe)?;
    let mc = consts.mc();
    let mc2 = consts.mc2();
    let mut idx = 0;
    let sums = grid.fold::<6, _>(f.values(), |node, value| {
        let qi = q[idx];
        idx += 1;
        let energy = (mc2 + node.internal) / mc;
        let p = node.p;
        let ln_f = if value > 0.0 { log(value) } else { 0.0 };
        [qi, p[0] * energy * qi, p[1] * energy * qi, p[2] * energy * qi, p[3] * energy * qi, qi * ln_f]
    });
    Ok(Diagnostics {
        t,
        n: ms.n,
        v: ms.v,
        t0: ms.t0(),
        h0: ms.h[0],
        entropy_production: -consts.k_b() * sums[5],
        residual_scalar,
        residual_flux,
        cancellation_number: sums[0],
        cancellation_energy: FourVector::new(sums[1], sums[2], sums[3], sums[4]),
    })
}

/// Distributions on a periodic 1-D slab of equal cells.
#[derive(Clone, Debug)]
pub struct SlabState {
    pub cells: Vec<Distribution>,
    pub dx: f64,
    pub t: f64,
}

impl SlabState {
    pub fn new(cells: Vec<Distribution>, dx: f64) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidDistribution("slab needs at least one cell"));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidDistribution("cell width must be positive"));
        }
        for c in &cells[1..] {
            cells[0].check_grid(c)?;
        }
        Ok(SlabState { cells, dx, t: 0.0 })
    }

    /// `ncells` cells of `base` scaled by `profile(x)` at the cell centres of
    /// `[0, length)`.
    pub fn from_profile<P: FnMut(f64) -> f64>(base: &Distribution, ncells: usize, length: f64, mut profile: P) -> Result<Self> {
        let dx = length / ncells as f64;
        let cells = (0..ncells)
            .map(|i| base.scaled(profile((i as f64 + 0.5) * dx)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cells, dx)
    }

    pub fn grid(&self) -> &Arc<PhaseGrid> {
        self.cells[0].grid()
    }

    /// `Σ_cells dx·N` and `Σ_cells dx·T^{0ν}`.
    pub fn totals(&self) -> (f64, FourVector) {
        let mut n = crate::sum::PairwiseSum::<5>::new();
        for c in &self.cells {
            let ms = compute_moments(c);
            let t0 = ms.t0();
            n.add(&[ms.n * self.dx, t0[0] * self.dx, t0[1] * self.dx, t0[2] * self.dx, t0[3] * self.dx]);
        }
        let s = n.finish();
        (s[0], FourVector::new(s[1], s[2], s[3], s[4]))
    }

    /// `Σ_cells dx·h⁰`.
    pub fn total_entropy(&self) -> f64 {
        let terms: Vec<f64> = self.cells.iter().map(|c| compute_moments(c).h[0] * self.dx).collect();
        crate::sum::pairwise_sum(&terms)
    }
}

/// Strang-split transport: half upwind advection, one RK4 collision step per
/// cell, half advection. Cells keep their own equilibrium solver so that each
/// fit warm-starts from the previous step.
#[derive(Debug)]
pub struct Transport {
    state: SlabState,
    dt: f64,
    speeds: Vec<f64>,
    nu: Vec<f64>,
    solvers: Vec<EquilibriumSolver>,
    collide: bool,
}

impl Transport {
    pub fn new(state: SlabState, dt: f64, closure: Closure) -> Result<Self> {
        let grid = state.grid().clone();
        let consts = grid.consts();
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidTimeStep(dt));
        }
        let courant = consts.c() * dt / state.dx;
        if courant > 1.0 {
            return Err(Error::CflViolation { courant });
        }
        let collide = consts.tau().is_finite();
        if collide {
            check_step(dt, &grid)?;
        }
        let speeds = grid.momenta().iter().map(|p| consts.c() * p[1] / p[0]).collect();
        let solvers = alloc::vec![EquilibriumSolver::new(closure); state.cells.len()];
        Ok(Transport { nu: collision_frequencies(&grid), state, dt, speeds, solvers, collide })
    }

    pub fn state(&self) -> &SlabState {
        &self.state
    }

    pub fn into_state(self) -> SlabState {
        self.state
    }

    pub fn step(&mut self) -> Result<()> {
        self.advect(0.5 * self.dt);
        if self.collide {
            for (cell, solver) in self.state.cells.iter_mut().zip(self.solvers.iter_mut()) {
                *cell = rk4_step(cell, self.dt, &self.nu, |g| solver.solve(g))?;
            }
        }
        self.advect(0.5 * self.dt);
        self.state.t += self.dt;
        Ok(())
    }

    pub fn advance(&mut self, nsteps: usize) -> Result<()> {
        for _ in 0..nsteps {
            self.step()?;
        }
        Ok(())
    }

    fn advect(&mut self, dt: f64) {
        let cells = &self.state.cells;
        let n = cells.len();
        let grid = cells[0].grid().clone();
        let n_i = grid.n_internal();
        let lambda = dt / self.state.dx;
        let mut next = Vec::with_capacity(n);
        for c in 0..n {
            let left = cells[(c + n - 1) % n].values();
            let here = cells[c].values();
            let right = cells[(c + 1) % n].values();
            let mut out = Vec::with_capacity(here.len());
            for (k, &v) in self.speeds.iter().enumerate() {
                let (vp, vm) = (v.max(0.0), v.min(0.0));
                for j in k * n_i..(k + 1) * n_i {
                    let flux_out = vp * here[j] + vm * right[j];
                    let flux_in = vp * left[j] + vm * here[j];
                    out.push(here[j] - lambda * (flux_out - flux_in));
                }
            }
            floor_negative(&grid, &mut out);
            next.push(Distribution::from_raw(grid.clone(), out));
        }
        self.state.cells = next;
    }
}

/// One transport step from a fresh state (no warm starts).
pub fn transport_step(state: &SlabState, dt: f64, closure: Closure) -> Result<SlabState> {
    let mut t = Transport::new(state.clone(), dt, closure)?;
    t.step()?;
    Ok(t.into_state())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{build_phase_grid, GridConfig};
    use crate::spacetime::Constants;

    fn grid(consts: Constants) -> Arc<PhaseGrid> {
        let mut cfg = GridConfig::for_gamma_min(12, 8, 2.0);
        cfg.check_tol = 1e-4;
        build_phase_grid(cfg, consts).unwrap()
    }

    fn mixture(g: &Arc<PhaseGrid>) -> Distribution {
        let a = juttner_eval(&EquilibriumParams::at_rest(1.0, 2.0).unwrap(), g).unwrap();
        let b = juttner_eval(&EquilibriumParams::new(0.5, [0.2, 0.0, 0.0], 8.0).unwrap(), g).unwrap();
        a.sum(&b).unwrap()
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let g = grid(Constants::default());
        let fe = juttner_eval(&EquilibriumParams::at_rest(1.0, 3.0).unwrap(), &g).unwrap();
        assert!(collision_q(&fe, &fe).unwrap().iter().all(|q| *q == 0.0));
        let later = relax_exact_towards(&fe, &fe, 7.0).unwrap();
        assert_eq!(later.values(), fe.values());
    }

    #[test]
    fn exact_relaxation_endpoints() {
        let g = grid(Constants::default());
        let f = mixture(&g);
        assert_eq!(relax_exact(&f, 0.0).unwrap().values(), f.values());
        let fe = EquilibriumSolver::new(Closure::Analytic).solve(&f).unwrap();
        let far = relax_exact_towards(&f, &fe, 1e3 * 1.0 / max_collision_frequency(&g) * 1e3).unwrap();
        assert!(far.max_abs_diff(&fe).unwrap() <= 1e-12 * fe.max_value());
    }

    #[test]
    fn frequency_bound_and_stiffness() {
        let consts = Constants::default().with_tau(0.5).unwrap();
        let g = grid(consts);
        let nu_max = max_collision_frequency(&g);
        assert!(collision_frequencies(&g).iter().all(|n| *n <= nu_max && *n <= 2.0));
        let f = mixture(&g);
        let r = Relaxer::new(f, 3.0 / nu_max, true, Closure::Conservative);
        assert!(matches!(r, Err(Error::StiffnessWarning { .. })));
    }

    #[test]
    fn conservative_rk4_conserves_and_increases_entropy() {
        let g = grid(Constants::default());
        let f = mixture(&g);
        let mut r = Relaxer::new(f, 0.25, true, Closure::Conservative).unwrap();
        let fe = r.equilibrium().unwrap();
        let d0 = diagnostics(r.state(), &fe, 0.0).unwrap();
        assert!(d0.entropy_production > 0.0);
        let mut h = d0.h0;
        for _ in 0..8 {
            r.step().unwrap();
            let fe = r.equilibrium().unwrap();
            let d = diagnostics(r.state(), &fe, r.time()).unwrap();
            assert!((d.n - d0.n).abs() < 1e-13 * d0.n);
            for mu in 0..4 {
                assert!((d.t0[mu] - d0.t0[mu]).abs() < 1e-13 * d0.t0[0]);
            }
            assert!(d.h0 >= h);
            h = d.h0;
        }
    }

    #[test]
    fn refreeze_and_frozen_share_the_initial_derivative() {
        // The defining moments S, V^i are not collision invariants, so the two
        // modes separate at second order in dt.
        let g = grid(Constants::default());
        let f = mixture(&g);
        let gap = |dt: f64| {
            let a = relax_rk4(&f, dt, 1, true).unwrap();
            let b = relax_rk4(&f, dt, 1, false).unwrap();
            a.max_abs_diff(&b).unwrap()
        };
        let (coarse, fine) = (gap(0.02), gap(0.01));
        assert!(coarse < 1e-6 * f.max_value());
        let order = (coarse / fine).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }

    #[test]
    fn uniform_slab_matches_homogeneous_relaxation() {
        let g = grid(Constants::default());
        let f = mixture(&g);
        let slab = SlabState::from_profile(&f, 4, 1.0, |_| 1.0).unwrap();
        let mut t = Transport::new(slab, 0.1, Closure::Conservative).unwrap();
        let mut r = Relaxer::new(f, 0.1, true, Closure::Conservative).unwrap();
        t.advance(3).unwrap();
        r.advance(3).unwrap();
        for c in &t.state().cells {
            assert_eq!(c.values(), r.state().values());
        }
    }

    #[test]
    fn cfl_and_time_step_validation() {
        let g = grid(Constants::default());
        let slab = SlabState::from_profile(&mixture(&g), 4, 1.0, |_| 1.0).unwrap();
        assert!(matches!(Transport::new(slab.clone(), 0.3, Closure::Analytic), Err(Error::CflViolation { .. })));
        assert!(matches!(Transport::new(slab, -1.0, Closure::Analytic), Err(Error::InvalidTimeStep(_))));
    }

    #[test]
    fn free_streaming_conserves_mass() {
        let consts = Constants::default().with_tau(f64::INFINITY).unwrap();
        let g = grid(consts);
        let base = juttner_eval(&EquilibriumParams::at_rest(1.0, 2.0).unwrap(), &g).unwrap();
        let slab = SlabState::from_profile(&base, 16, 1.0, |x| 1.0 + 0.3 * libm::sin(2.0 * core::f64::consts::PI * x)).unwrap();
        let (n0, _) = slab.totals();
        let mut t = Transport::new(slab, 0.05, Closure::Conservative).unwrap();
        t.advance(20).unwrap();
        let (n1, _) = t.state().totals();
        assert!((n1 - n0).abs() < 1e-12 * n0);
    }
}
