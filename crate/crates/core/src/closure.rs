//! Jüttner equilibria fitted to the discrete moments of a distribution.
//!
//! On a finite grid the analytic equilibrium of [`crate::juttner`] matches
//! the moment conditions only to quadrature accuracy, so the collision
//! operator built from it leaks particles and energy at that level. Here the
//! same family is written as
//!
//! ```text
//! f_E = exp(α − (1+I/mc²)(β⁰p̃⁰ − β·p̃)),   p̃ = p/(mc),  β = γU/c,
//! ```
//!
//! and `(α, β)` is chosen so that the *discrete* `S` and `V^μ` of `f_E` equal
//! those of `f`. The conditions are the stationarity conditions of the convex
//! function `Φ(λ) − λ·t` with
//! `Φ(λ) = Σ w exp(λ·ξ)/((1+I/mc²)p̃⁰)`, `ξ = (1, −(1+I/mc²)p̃⁰, (1+I/mc²)p̃)`,
//! and are solved by a damped Newton iteration.

use alloc::sync::Arc;
use alloc::vec::Vec;

use libm::{exp, fabs, log, sqrt};

use crate::juttner::{equilibrium_from_f, normalizer_scaled, EquilibriumParams, DEFAULT_RADIAL_TOL};
use crate::moments::flux_moments;
use crate::quadrature::{Distribution, Node, PhaseGrid};
use crate::spacetime::{Constants, FourVector};
use crate::{Error, Result};

/// The multipliers `(α, β⁰, β¹, β², β³)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Multipliers(pub [f64; 5]);

impl Multipliers {
    pub fn from_params(params: &EquilibriumParams, consts: &Constants) -> Result<Self> {
        let m_scaled = normalizer_scaled(params.gamma, consts, DEFAULT_RADIAL_TOL)?;
        let u = params.four_velocity(consts);
        let g = params.gamma / consts.c();
        Ok(Multipliers([log(params.n / m_scaled) + params.gamma, g * u[0], g * u[1], g * u[2], g * u[3]]))
    }

    /// `β^μ = γU^μ/c`.
    pub fn beta(&self) -> FourVector {
        FourVector::new(self.0[1], self.0[2], self.0[3], self.0[4])
    }

    /// Back to `(n, U, γ)`; fails if `β` is not future timelike.
    pub fn to_params(&self, consts: &Constants) -> Result<EquilibriumParams> {
        let beta = self.beta();
        let norm_sq = beta.norm_sq();
        if !(beta[0] > 0.0 && norm_sq > 0.0) {
            return Err(Error::ClosureFailure { residual: f64::INFINITY });
        }
        let gamma = sqrt(norm_sq);
        let m_scaled = normalizer_scaled(gamma, consts, DEFAULT_RADIAL_TOL)?;
        let scale = consts.c() / gamma;
        EquilibriumParams::new(
            m_scaled * exp(self.0[0] - gamma),
            [scale * beta[1], scale * beta[2], scale * beta[3]],
            gamma,
        )
    }

    #[inline]
    fn exponent(&self, node: &Node<'_>, inv_mc: f64) -> f64 {
        let p = node.p;
        let l = &self.0;
        let dot = l[1] * p[0] - l[2] * p[1] - l[3] * p[2] - l[4] * p[3];
        l[0] - node.energy_factor * dot * inv_mc
    }

    /// Samples the equilibrium on `grid`.
    pub fn sample(&self, grid: &Arc<PhaseGrid>) -> Distribution {
        let inv_mc = 1.0 / grid.consts().mc();
        let mut values = Vec::with_capacity(grid.len());
        for p in grid.momenta() {
            for (&internal, &energy_factor) in grid.internal_nodes().iter().zip(grid.energy_factors()) {
                let node = Node { p, internal, energy_factor };
                values.push(exp(self.exponent(&node, inv_mc)));
            }
        }
        Distribution::from_raw(grid.clone(), values)
    }
}

/// Stopping rule of the Newton iteration; residuals are relative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosureTolerances {
    /// Converged once the residual is this small.
    pub target: f64,
    /// Largest residual accepted when the iteration stalls at roundoff.
    pub accept: f64,
    pub max_iter: usize,
}

impl Default for ClosureTolerances {
    fn default() -> Self {
        ClosureTolerances { target: 1e-14, accept: 1e-10, max_iter: 50 }
    }
}

/// Fitted equilibrium together with its multipliers and final residual.
#[derive(Clone, Debug)]
pub struct DiscreteEquilibrium {
    pub multipliers: Multipliers,
    pub fe: Distribution,
    pub residual: f64,
    pub iterations: usize,
}

struct Evaluation {
    phi: f64,
    grad: [f64; 5],
    hess: [[f64; 5]; 5],
}

const HESS_INDEX: [(usize, usize); 15] = [
    (0, 0), (0, 1), (0, 2), (0, 3), (0, 4),
    (1, 1), (1, 2), (1, 3), (1, 4),
    (2, 2), (2, 3), (2, 4),
    (3, 3), (3, 4),
    (4, 4),
];

fn evaluate(grid: &PhaseGrid, lambda: &Multipliers) -> Evaluation {
    let inv_mc = 1.0 / grid.consts().mc();
    let sums = grid.fold_nodes::<21, _>(|node| {
        let mut out = [0.0; 21];
        let e = exp(lambda.exponent(&node, inv_mc));
        if e == 0.0 {
            return out;
        }
        let p0 = node.p[0] * inv_mc;
        let omega = e / (node.energy_factor * p0);
        let ef = node.energy_factor;
        let xi = [1.0, -ef * p0, ef * node.p[1] * inv_mc, ef * node.p[2] * inv_mc, ef * node.p[3] * inv_mc];
        out[0] = omega;
        for k in 0..5 {
            out[1 + k] = omega * xi[k];
        }
        for (slot, &(a, b)) in HESS_INDEX.iter().enumerate() {
            out[6 + slot] = omega * xi[a] * xi[b];
        }
        out
    });
    let mut hess = [[0.0; 5]; 5];
    for (slot, &(a, b)) in HESS_INDEX.iter().enumerate() {
        hess[a][b] = sums[6 + slot];
        hess[b][a] = sums[6 + slot];
    }
    Evaluation { phi: sums[0], grad: core::array::from_fn(|k| sums[1 + k]), hess }
}

/// Moment targets `(mc·S, −V⁰/(mc), V^i/(mc))` of `f`.
pub fn targets(f: &Distribution) -> [f64; 5] {
    let (s, v) = flux_moments(f);
    targets_from_moments(s, &v, f.grid().consts())
}

pub fn targets_from_moments(s: f64, v: &FourVector, consts: &Constants) -> [f64; 5] {
    let mc = consts.mc();
    [mc * s, -v[0] / mc, v[1] / mc, v[2] / mc, v[3] / mc]
}

fn relative_residual(g: &[f64; 5], t: &[f64; 5]) -> f64 {
    let density = fabs(t[1]).max(f64::MIN_POSITIVE);
    let mut r = fabs(g[0]) / fabs(t[0]).max(f64::MIN_POSITIVE);
    for gk in &g[1..] {
        r = r.max(fabs(*gk) / density);
    }
    r
}

fn objective(ev: &Evaluation, lambda: &Multipliers, t: &[f64; 5]) -> f64 {
    ev.phi - (0..5).map(|k| lambda.0[k] * t[k]).sum::<f64>()
}

/// Solves `H x = b` for symmetric positive definite `H` (Jacobi-scaled Cholesky).
fn solve_spd(h: &[[f64; 5]; 5], b: &[f64; 5]) -> Option<[f64; 5]> {
    let mut d = [0.0; 5];
    for k in 0..5 {
        if !(h[k][k] > 0.0) {
            return None;
        }
        d[k] = 1.0 / sqrt(h[k][k]);
    }
    let mut l = [[0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..=i {
            let mut s = h[i][j] * d[i] * d[j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = [0.0; 5];
    for i in 0..5 {
        let mut s = b[i] * d[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = [0.0; 5];
    for i in (0..5).rev() {
        let mut s = y[i];
        for k in i + 1..5 {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Some(core::array::from_fn(|k| x[k] * d[k]))
}

/// Fits the discrete equilibrium of `f`, starting from `start` or, if absent,
/// from the analytic equilibrium parameters.
pub fn fit_equilibrium(f: &Distribution, start: Option<&Multipliers>, tol: &ClosureTolerances) -> Result<DiscreteEquilibrium> {
    let t = targets(f);
    let initial = match start {
        Some(m) => *m,
        None => Multipliers::from_params(&equilibrium_from_f(f)?, f.grid().consts())?,
    };
    fit_to_targets(f.grid(), &t, initial, tol)
}

/// Newton iteration for given moment targets.
pub fn fit_to_targets(
    grid: &Arc<PhaseGrid>,
    t: &[f64; 5],
    initial: Multipliers,
    tol: &ClosureTolerances,
) -> Result<DiscreteEquilibrium> {
    if t.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let mut lambda = initial;
    let mut ev = evaluate(grid, &lambda);
    let mut residual = f64::INFINITY;
    for iter in 0..tol.max_iter {
        let g: [f64; 5] = core::array::from_fn(|k| ev.grad[k] - t[k]);
        let previous = residual;
        residual = relative_residual(&g, t);
        if !residual.is_finite() {
            break;
        }
        if residual <= tol.target || (residual <= tol.accept && residual > 0.5 * previous) {
            return Ok(finish(grid, lambda, residual, iter));
        }
        let rhs: [f64; 5] = core::array::from_fn(|k| -g[k]);
        let Some(step) = solve_spd(&ev.hess, &rhs) else { break };
        let slope: f64 = (0..5).map(|k| g[k] * step[k]).sum();
        let f0 = objective(&ev, &lambda, t);

        let mut scale = 1.0;
        let mut accepted = None;
        while scale > 1e-12 {
            let cand = Multipliers(core::array::from_fn(|k| lambda.0[k] + scale * step[k]));
            let ev_c = evaluate(grid, &cand);
            if ev_c.phi.is_finite() {
                let g_c: [f64; 5] = core::array::from_fn(|k| ev_c.grad[k] - t[k]);
                if objective(&ev_c, &cand, t) <= f0 + 1e-4 * scale * slope || relative_residual(&g_c, t) < residual {
                    accepted = Some((cand, ev_c));
                    break;
                }
            }
            scale *= 0.5;
        }
        match accepted {
            Some((cand, ev_c)) => {
                lambda = cand;
                ev = ev_c;
            }
            None => break,
        }
    }
    let g: [f64; 5] = core::array::from_fn(|k| ev.grad[k] - t[k]);
    residual = relative_residual(&g, t);
    if residual <= tol.accept {
        Ok(finish(grid, lambda, residual, tol.max_iter))
    } else {
        Err(Error::ClosureFailure { residual })
    }
}

fn finish(grid: &Arc<PhaseGrid>, multipliers: Multipliers, residual: f64, iterations: usize) -> DiscreteEquilibrium {
    DiscreteEquilibrium { multipliers, fe: multipliers.sample(grid), residual, iterations }
}
