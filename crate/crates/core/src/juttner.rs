//! Jüttner equilibria for polyatomic gases and the determination of their
//! parameters from an arbitrary distribution.
//!
//! With `r = |p|/(mc)`, `q = √(1+r²)` and `a = γq` the normalisers reduce to
//! one-dimensional radial integrals
//!
//! ```text
//! M  = 4π(mc)³ M₂,   M₂ = ∫ r² ∫ e^{-(1+I/mc²)a} φ dI dr
//! M̃  = 4π(mc)² M₁,   M₁ = ∫ r²/q ∫ e^{-(1+I/mc²)a} (1+I/mc²)⁻¹ φ dI dr
//! M₃ = ∫ r² q ∫ e^{-(1+I/mc²)a} (1+I/mc²) φ dI dr
//! ```
//!
//! The inner integrals of `M₂` and `M₃` are Gamma functions. The inner
//! integral of `M₁` is `(mc²)^{σ+1} e^{-a} Ĵ(a)` with
//! `Ĵ(a) = ∫₀^∞ t^σ e^{-at}/(1+t) dt`, evaluated by a power series near the
//! singular endpoint and adaptive quadrature in `ln t` beyond it.
//!
//! Every radial integral carries the common factor `e^{-γ}`; values are kept
//! scaled by `e^{γ}` so that very cold gases stay representable.

use core::cell::Cell;
use core::f64::consts::PI;

use libm::{exp, fabs, log, pow, sqrt, tgamma};

use crate::integrate::adaptive;
use crate::moments::{eckart_from_flux, flux_moments};
use crate::quadrature::{Distribution, PhaseGrid};
use crate::spacetime::{four_velocity_from_spatial, Constants, FourVector};
use crate::{Error, Result};
use alloc::sync::Arc;
use alloc::vec::Vec;

/// Default relative tolerance of the radial integrals.
pub const DEFAULT_RADIAL_TOL: f64 = 1e-10;
/// Default relative bracket width of the coldness solver.
pub const DEFAULT_GAMMA_TOL: f64 = 1e-10;

// Radial integrands are negligible once γ(q−1) exceeds this.
const EXPONENT_CUTOFF: f64 = 50.0;
const RADIAL_BREAKS: [f64; 8] = [0.0, 0.5, 2.0, 5.0, 10.0, 20.0, 35.0, EXPONENT_CUTOFF];
const MAX_PANELS: usize = 4000;

/// Parameters `(n, U, γ)` of a Jüttner distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquilibriumParams {
    pub n: f64,
    /// Spatial part of the four-velocity.
    pub u: [f64; 3],
    /// Coldness `mc²/(k_B T)`.
    pub gamma: f64,
}

impl EquilibriumParams {
    pub fn new(n: f64, u: [f64; 3], gamma: f64) -> Result<Self> {
        if !n.is_finite() || !gamma.is_finite() || u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        if !(gamma > 0.0) {
            return Err(Error::NonPositiveGamma(gamma));
        }
        if !(n > 0.0) {
            return Err(Error::InvalidDistribution("density must be positive"));
        }
        Ok(EquilibriumParams { n, u, gamma })
    }

    pub fn at_rest(n: f64, gamma: f64) -> Result<Self> {
        Self::new(n, [0.0; 3], gamma)
    }

    pub fn four_velocity(&self, consts: &Constants) -> FourVector {
        four_velocity_from_spatial(self.u, consts)
    }
}

/// `M`, `M̃`, `M₁`, `M₂`, `M₃` at one coldness, all multiplied by `e^{γ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialIntegrals {
    pub gamma: f64,
    pub m: f64,
    pub mtilde: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

impl RadialIntegrals {
    /// Removes the `e^{γ}` scaling (may underflow for large `γ`).
    pub fn unscaled(&self, scaled_value: f64) -> f64 {
        scaled_value * exp(-self.gamma)
    }

    /// `M̃/M`.
    pub fn ratio(&self) -> f64 {
        self.mtilde / self.m
    }
}

/// `Ĵ(a) = ∫₀^∞ t^σ e^{-at}/(1+t) dt`.
pub fn inner_energy_integral(a: f64, sigma: f64, tol: f64) -> Result<f64> {
    let t0 = if a > 2.0 { 1.0 / a } else { 0.5 };

    // ∫₀^{t0} t^σ e^{-at}/(1+t) dt = Σ_k (-1)^k E_k(a) t0^{k+σ+1}/(k+σ+1),
    // E_k the partial sums of the exponential series.
    let mut head = 0.0;
    let mut partial_exp = 0.0;
    let mut power = 1.0; // a^k/k!
    let mut t0k = 1.0;
    let mut sign = 1.0;
    for k in 0..400 {
        if k > 0 {
            power *= a / k as f64;
            t0k *= t0;
        }
        partial_exp += power;
        let term = sign * partial_exp * t0k / (k as f64 + sigma + 1.0);
        head += term;
        sign = -sign;
        if k > 4 && fabs(term) <= 1e-17 * fabs(head) {
            break;
        }
    }
    head *= pow(t0, sigma + 1.0);

    let t_end = t0 + 60.0 / a;
    let v0 = log(t0);
    let v1 = log(t_end);
    let mut breaks: Vec<f64> = alloc::vec![v0];
    let knee = -log(a);
    if knee > v0 + 0.5 && knee < v1 - 0.5 {
        breaks.push(knee);
    }
    breaks.push(v1);
    let body = adaptive(
        |v| {
            let t = exp(v);
            pow(t, sigma + 1.0) * exp(-a * t) / (1.0 + t)
        },
        &breaks,
        0.1 * tol,
        0.1 * tol * fabs(head),
        MAX_PANELS,
    )?;
    // Leading asymptotic term of the discarded tail, ~e^{-60} relative.
    let remainder = pow(t_end, sigma) * exp(-a * t_end) / ((1.0 + t_end) * a);
    Ok(head + body.value + remainder)
}

fn radial_breakpoints(gamma: f64) -> [f64; RADIAL_BREAKS.len()] {
    RADIAL_BREAKS.map(|x| {
        let q = 1.0 + x / gamma;
        sqrt((q - 1.0) * (q + 1.0))
    })
}

#[inline]
fn q_minus_one(r: f64, q: f64) -> f64 {
    r * r / (q + 1.0)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_nan() {
        return Err(Error::NonFiniteInput);
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::NonPositiveGamma(gamma));
    }
    Ok(())
}

/// Scaled `M₂` (closed-form inner integral).
fn m2_scaled(gamma: f64, consts: &Constants, tol: f64) -> Result<f64> {
    let sigma = consts.sigma();
    let b = radial_breakpoints(gamma);
    let e = adaptive(
        |r| {
            let q = sqrt(1.0 + r * r);
            r * r * exp(-gamma * q_minus_one(r, q)) * pow(gamma * q, -(sigma + 1.0))
        },
        &b,
        tol,
        0.0,
        MAX_PANELS,
    )?;
    Ok(pow(consts.mc2(), sigma + 1.0) * tgamma(sigma + 1.0) * e.value)
}

fn m3_scaled(gamma: f64, consts: &Constants, tol: f64) -> Result<f64> {
    let sigma = consts.sigma();
    let b = radial_breakpoints(gamma);
    let e = adaptive(
        |r| {
            let q = sqrt(1.0 + r * r);
            let a = gamma * q;
            r * r * q * exp(-gamma * q_minus_one(r, q)) * pow(a, -(sigma + 1.0)) * (1.0 + (sigma + 1.0) / a)
        },
        &b,
        tol,
        0.0,
        MAX_PANELS,
    )?;
    Ok(pow(consts.mc2(), sigma + 1.0) * tgamma(sigma + 1.0) * e.value)
}

fn m1_scaled(gamma: f64, consts: &Constants, tol: f64) -> Result<f64> {
    let sigma = consts.sigma();
    let b = radial_breakpoints(gamma);
    let failure: Cell<Option<Error>> = Cell::new(None);
    let e = adaptive(
        |r| {
            let q = sqrt(1.0 + r * r);
            match inner_energy_integral(gamma * q, sigma, 0.1 * tol) {
                Ok(j) => r * r / q * exp(-gamma * q_minus_one(r, q)) * j,
                Err(err) => {
                    failure.set(Some(err));
                    0.0
                }
            }
        },
        &b,
        tol,
        0.0,
        MAX_PANELS,
    )?;
    if let Some(err) = failure.take() {
        return Err(err);
    }
    Ok(pow(consts.mc2(), sigma + 1.0) * e.value)
}

/// All five radial integrals at `gamma`, relative tolerance `tol`.
pub fn radial_integrals(gamma: f64, consts: &Constants, tol: f64) -> Result<RadialIntegrals> {
    check_gamma(gamma)?;
    let mc = consts.mc();
    let m1 = m1_scaled(gamma, consts, tol)?;
    let m2 = m2_scaled(gamma, consts, tol)?;
    let m3 = m3_scaled(gamma, consts, tol)?;
    Ok(RadialIntegrals {
        gamma,
        m: 4.0 * PI * mc * mc * mc * m2,
        mtilde: 4.0 * PI * mc * mc * m1,
        m1,
        m2,
        m3,
    })
}

/// `M(γ)` scaled by `e^{γ}`.
pub fn normalizer_scaled(gamma: f64, consts: &Constants, tol: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let mc = consts.mc();
    Ok(4.0 * PI * mc * mc * mc * m2_scaled(gamma, consts, tol)?)
}

/// `M̃(γ)/M(γ) = M₁/(mc M₂)`, strictly increasing from 0 to `1/(mc)`.
pub fn ratio(gamma: f64, consts: &Constants, tol: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let m1 = m1_scaled(gamma, consts, tol)?;
    let m2 = m2_scaled(gamma, consts, tol)?;
    Ok(m1 / (consts.mc() * m2))
}

/// Upper bound `γ/(mc)` of the ratio.
pub fn ratio_upper_bound(gamma: f64, consts: &Constants) -> f64 {
    gamma / consts.mc()
}

/// Lower bound `(1/mc)(1 − 3/γ − 2(σ+1)/γ)^{1/2}`, `None` where the radicand
/// is not positive.
pub fn ratio_lower_bound(gamma: f64, consts: &Constants) -> Option<f64> {
    let radicand = 1.0 - 3.0 / gamma - 2.0 * (consts.sigma() + 1.0) / gamma;
    (radicand > 0.0).then(|| sqrt(radicand) / consts.mc())
}

/// The unique `γ` with `ratio(γ) = r`, to relative width `tol_gamma`.
///
/// The two ratio bounds give a bracket `[r·mc, (2σ+5)/(1−(r·mc)²)]` that is
/// verified numerically (and widened geometrically if quadrature noise puts
/// an end on the wrong side) before bisecting in `ln γ`.
pub fn solve_gamma(r: f64, consts: &Constants, tol_gamma: f64) -> Result<f64> {
    solve_gamma_with(r, consts, tol_gamma, DEFAULT_RADIAL_TOL)
}

pub fn solve_gamma_with(r: f64, consts: &Constants, tol_gamma: f64, radial_tol: f64) -> Result<f64> {
    let upper = 1.0 / consts.mc();
    if !(r > 0.0 && r < upper) {
        return Err(Error::RatioOutOfRange { ratio: r, upper });
    }
    if !(tol_gamma > 0.0) {
        return Err(Error::BracketFailure);
    }
    let x = r * consts.mc();
    let residual = |g: f64| ratio(g, consts, radial_tol).map(|v| v - r);

    let mut lo = x;
    let mut hi = (2.0 * consts.sigma() + 5.0) / ((1.0 - x) * (1.0 + x));
    let mut expansions = 0;
    while residual(lo)? > 0.0 {
        lo *= 0.5;
        expansions += 1;
        if expansions > 64 {
            return Err(Error::BracketFailure);
        }
    }
    while residual(hi)? < 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 64 || !hi.is_finite() {
            return Err(Error::BracketFailure);
        }
    }

    for _ in 0..200 {
        if hi / lo - 1.0 <= tol_gamma {
            return Ok(sqrt(lo * hi));
        }
        let mid = sqrt(lo * hi);
        if !(mid > lo && mid < hi) {
            return Ok(mid);
        }
        if residual(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::BracketFailure)
}

/// A Jüttner distribution with its normalisation resolved.
#[derive(Clone, Copy, Debug)]
pub struct Juttner {
    pub params: EquilibriumParams,
    consts: Constants,
    four_velocity: FourVector,
    // n / (M e^{γ})
    prefactor: f64,
}

impl Juttner {
    pub fn new(params: EquilibriumParams, consts: Constants) -> Result<Self> {
        Self::with_tol(params, consts, DEFAULT_RADIAL_TOL)
    }

    pub fn with_tol(params: EquilibriumParams, consts: Constants, tol: f64) -> Result<Self> {
        let m_scaled = normalizer_scaled(params.gamma, &consts, tol)?;
        Ok(Juttner {
            params,
            consts,
            four_velocity: params.four_velocity(&consts),
            prefactor: params.n / m_scaled,
        })
    }

    /// `(n/M) exp(−(1+I/mc²)(γ/mc²) U^μ p_μ)`.
    pub fn value(&self, p: &FourVector, internal: f64) -> f64 {
        let mc2 = self.consts.mc2();
        let up = self.four_velocity.dot(p) / mc2;
        self.prefactor * exp(-self.params.gamma * ((1.0 + internal / mc2) * up - 1.0))
    }

    /// Natural log of [`Self::value`].
    pub fn ln_value(&self, p: &FourVector, internal: f64) -> f64 {
        let mc2 = self.consts.mc2();
        let up = self.four_velocity.dot(p) / mc2;
        log(self.prefactor) - self.params.gamma * ((1.0 + internal / mc2) * up - 1.0)
    }

    pub fn sample(&self, grid: &Arc<PhaseGrid>) -> Distribution {
        let mut values = Vec::with_capacity(grid.len());
        for p in grid.momenta() {
            for &i in grid.internal_nodes() {
                values.push(self.value(p, i));
            }
        }
        Distribution::from_raw(grid.clone(), values)
    }
}

/// Samples the Jüttner distribution with `params` on `grid`.
pub fn juttner_eval(params: &EquilibriumParams, grid: &Arc<PhaseGrid>) -> Result<Distribution> {
    Ok(Juttner::new(*params, *grid.consts())?.sample(grid))
}

/// Tolerances used when determining equilibrium parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverTolerances {
    pub radial: f64,
    pub gamma: f64,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        SolverTolerances { radial: DEFAULT_RADIAL_TOL, gamma: DEFAULT_GAMMA_TOL }
    }
}

/// `n = n_f`, `U = U_f`, `γ` from `M̃(γ)/M(γ) = S/n_f`.
pub fn equilibrium_from_f(f: &Distribution) -> Result<EquilibriumParams> {
    equilibrium_from_f_with(f, &SolverTolerances::default())
}

pub fn equilibrium_from_f_with(f: &Distribution, tol: &SolverTolerances) -> Result<EquilibriumParams> {
    let consts = *f.grid().consts();
    let (s, v) = flux_moments(f);
    let ef = eckart_from_flux(&v, &consts)?;
    let gamma = solve_gamma_with(s / ef.n_f, &consts, tol.gamma, tol.radial)?;
    EquilibriumParams::new(ef.n_f, ef.u_f.spatial(), gamma)
}

/// Discrete residuals of the two moment conditions, `fe` side minus `f`
/// side, normalised by the size of `f`'s moment.
pub fn moment_match_residuals(f: &Distribution, fe: &Distribution) -> Result<(f64, FourVector)> {
    f.check_grid(fe)?;
    let (s_f, v_f) = flux_moments(f);
    let (s_e, v_e) = flux_moments(fe);
    let r_scalar = (s_e - s_f) / fabs(s_f).max(f64::MIN_POSITIVE);
    let scale = v_f.euclidean_norm().max(f64::MIN_POSITIVE);
    Ok((r_scalar, (v_e - v_f) * (1.0 / scale)))
}
