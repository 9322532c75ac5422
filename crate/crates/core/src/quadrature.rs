//! Discrete phase space: a uniform Cartesian momentum grid crossed with an
//! internal-energy rule whose weights already contain the state density.

use alloc::sync::Arc;
use alloc::vec::Vec;

use libm::{exp, fabs, log, pow, tgamma};

use crate::integrate::gauss_laguerre;
use crate::spacetime::{on_shell_momentum, Constants, FourVector};
use crate::sum::PairwiseSum;
use crate::{Error, Result};

/// Coldness assumed by [`GridConfig::default`] when sizing the cutoffs.
pub const DEFAULT_GAMMA_MIN: f64 = 0.5;

/// Relative tolerance of the build-time state-density check.
pub const DEFAULT_CHECK_TOL: f64 = 1e-8;

/// Grid sizes and cutoffs. `p_max` is in units of `mc`, `s_max` in units of
/// `mc²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConfig {
    /// Momentum nodes per axis (even).
    pub n_p: usize,
    pub p_max: f64,
    /// Internal-energy nodes.
    pub n_i: usize,
    /// Upper bound of the internal-energy nodes.
    pub s_max: f64,
    pub check_tol: f64,
}

impl GridConfig {
    /// Cutoffs from the tail rules `p_max = 8/γ_min + 8` and
    /// `s_max = 40/γ_min + 40`.
    pub fn for_gamma_min(n_p: usize, n_i: usize, gamma_min: f64) -> Self {
        GridConfig {
            n_p,
            p_max: momentum_cutoff(gamma_min),
            n_i,
            s_max: internal_cutoff(gamma_min),
            check_tol: DEFAULT_CHECK_TOL,
        }
    }

    /// Same cutoffs, node counts multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        GridConfig { n_p: self.n_p * factor, n_i: self.n_i * factor, ..*self }
    }

    /// Checks the invariants enforced by [`build_phase_grid`].
    pub fn validate(&self) -> Result<()> {
        if self.n_p < 8 {
            return Err(Error::InvalidGridConfig("n_p must be at least 8"));
        }
        if !self.n_p.is_multiple_of(2) {
            return Err(Error::InvalidGridConfig("n_p must be even"));
        }
        if self.n_i < 4 {
            return Err(Error::InvalidGridConfig("n_i must be at least 4"));
        }
        if !(self.p_max.is_finite() && self.p_max > 0.0) {
            return Err(Error::InvalidGridConfig("p_max must be positive"));
        }
        if !(self.s_max.is_finite() && self.s_max > 0.0) {
            return Err(Error::InvalidGridConfig("s_max must be positive"));
        }
        if !(self.check_tol > 0.0) {
            return Err(Error::InvalidGridConfig("check_tol must be positive"));
        }
        Ok(())
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self::for_gamma_min(32, 32, DEFAULT_GAMMA_MIN)
    }
}

/// Momentum cutoff in units of `mc` for the smallest expected coldness.
pub fn momentum_cutoff(gamma_min: f64) -> f64 {
    8.0 / gamma_min + 8.0
}

/// Internal-energy cutoff in units of `mc²`.
pub fn internal_cutoff(gamma_min: f64) -> f64 {
    40.0 / gamma_min + 40.0
}

/// One phase-space node, as seen by weight functions.
#[derive(Clone, Copy, Debug)]
pub struct Node<'a> {
    /// On-shell four-momentum.
    pub p: &'a FourVector,
    /// Internal energy `I`.
    pub internal: f64,
    /// `1 + I/(mc²)`.
    pub energy_factor: f64,
}

/// Immutable discrete phase space.
#[derive(Debug)]
pub struct PhaseGrid {
    consts: Constants,
    config: GridConfig,
    momenta: Vec<FourVector>,
    p_weight: f64,
    internal: Vec<f64>,
    energy_factor: Vec<f64>,
    i_weights: Vec<f64>,
}

impl PhaseGrid {
    pub fn build(config: GridConfig, consts: Constants) -> Result<Arc<Self>> {
        build_phase_grid(config, consts)
    }

    pub fn consts(&self) -> &Constants {
        &self.consts
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn momenta(&self) -> &[FourVector] {
        &self.momenta
    }

    /// Cubature weight of each momentum node (uniform midpoint cell volume).
    pub fn p_weight(&self) -> f64 {
        self.p_weight
    }

    pub fn internal_nodes(&self) -> &[f64] {
        &self.internal
    }

    /// Weights for `∫ g(I) I^σ dI`.
    pub fn internal_weights(&self) -> &[f64] {
        &self.i_weights
    }

    /// `1 + I_j/(mc²)` per internal node.
    pub fn energy_factors(&self) -> &[f64] {
        &self.energy_factor
    }

    pub fn n_momentum(&self) -> usize {
        self.momenta.len()
    }

    pub fn n_internal(&self) -> usize {
        self.internal.len()
    }

    pub fn len(&self) -> usize {
        self.momenta.len() * self.internal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of node `(momentum i, internal j)`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.internal.len() + j
    }

    /// Weighted pairwise reduction of `K` quantities over all nodes:
    /// `Σ term(node, f) · w_p · w_I`.
    pub fn fold<const K: usize, F>(&self, values: &[f64], mut term: F) -> [f64; K]
    where
        F: FnMut(Node<'_>, f64) -> [f64; K],
    {
        debug_assert_eq!(values.len(), self.len());
        let n_i = self.internal.len();
        let mut acc = PairwiseSum::<K>::new();
        for (i, p) in self.momenta.iter().enumerate() {
            let row = &values[i * n_i..(i + 1) * n_i];
            let mut inner = [0.0; K];
            for j in 0..n_i {
                let node = Node { p, internal: self.internal[j], energy_factor: self.energy_factor[j] };
                let t = term(node, row[j]);
                let w = self.i_weights[j];
                for k in 0..K {
                    inner[k] += t[k] * w;
                }
            }
            for v in inner.iter_mut() {
                *v *= self.p_weight;
            }
            acc.add(&inner);
        }
        acc.finish()
    }

    /// [`Self::fold`] for integrands that depend on the node only.
    pub fn fold_nodes<const K: usize, F>(&self, mut term: F) -> [f64; K]
    where
        F: FnMut(Node<'_>) -> [f64; K],
    {
        let n_i = self.internal.len();
        let mut acc = PairwiseSum::<K>::new();
        for p in &self.momenta {
            let mut inner = [0.0; K];
            for j in 0..n_i {
                let node = Node { p, internal: self.internal[j], energy_factor: self.energy_factor[j] };
                let t = term(node);
                let w = self.i_weights[j];
                for k in 0..K {
                    inner[k] += t[k] * w;
                }
            }
            for v in inner.iter_mut() {
                *v *= self.p_weight;
            }
            acc.add(&inner);
        }
        acc.finish()
    }

    /// `Σ_j w_j e^{-I_j/(mc²)}` against `Γ(σ+1)(mc²)^{σ+1}`.
    pub fn state_density_check(&self) -> (f64, f64) {
        let mc2 = self.consts.mc2();
        let got: f64 = self
            .internal
            .iter()
            .zip(&self.i_weights)
            .map(|(i, w)| w * exp(-i / mc2))
            .sum();
        let sigma = self.consts.sigma();
        (got, tgamma(sigma + 1.0) * pow(mc2, sigma + 1.0))
    }

    fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || (self.config == other.config && self.consts == other.consts)
    }
}

/// Builds the phase space for `config`.
///
/// Internal-energy nodes live in `s = I/(mc²)`; the state density `s^σ` is
/// part of the Gauss weight, so the singular case `σ < 0` needs no special
/// treatment.
pub fn build_phase_grid(config: GridConfig, consts: Constants) -> Result<Arc<PhaseGrid>> {
    config.validate()?;
    let mc = consts.mc();
    let mc2 = consts.mc2();
    let sigma = consts.sigma();

    let n = config.n_p;
    let half_width = config.p_max * mc;
    let h = 2.0 * half_width / n as f64;
    let axis: Vec<f64> = (0..n).map(|k| -half_width + (k as f64 + 0.5) * h).collect();
    let mut momenta = Vec::with_capacity(n * n * n);
    for &px in &axis {
        for &py in &axis {
            for &pz in &axis {
                momenta.push(on_shell_momentum([px, py, pz], &consts));
            }
        }
    }

    let (s_nodes, s_weights) = internal_energy_rule(config.n_i, config.s_max, sigma)?;
    let scale = pow(mc2, sigma + 1.0);
    let internal = s_nodes.iter().map(|s| s * mc2).collect();
    let energy_factor = s_nodes.iter().map(|s| 1.0 + s).collect();
    let i_weights = s_weights.iter().map(|w| w * scale).collect();

    let grid = PhaseGrid { consts, config, momenta, p_weight: h * h * h, internal, energy_factor, i_weights };
    let (got, expected) = grid.state_density_check();
    if !(fabs(got - expected) <= config.check_tol * fabs(expected)) {
        return Err(Error::QuadratureCheckFailed { got, expected });
    }
    Ok(Arc::new(grid))
}

/// Nodes and weights for `∫₀^∞ g(s) s^σ ds`: the generalized Gauss–Laguerre
/// rule for `x^σ e^{-x}`, with the factor `e^{x}` moved into the weights. The
/// nodes are compressed just enough that none exceeds `s_max`.
pub fn internal_energy_rule(n_i: usize, s_max: f64, sigma: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, ln_w) = gauss_laguerre(n_i, sigma);
    let scale = (x[n_i - 1] / s_max).max(1.0);
    let ln_scale = log(scale);
    let nodes = x.iter().map(|x| x / scale).collect();
    let weights: Vec<f64> = x
        .iter()
        .zip(&ln_w)
        .map(|(x, lw)| exp(lw + x - (sigma + 1.0) * ln_scale))
        .collect();
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidGridConfig("internal-energy weights not positive for this sigma"));
    }
    Ok((nodes, weights))
}

/// Nonnegative samples `f(p_i, I_j)` on a phase grid.
#[derive(Clone, Debug)]
pub struct Distribution {
    grid: Arc<PhaseGrid>,
    values: Vec<f64>,
}

impl Distribution {
    pub fn new(grid: Arc<PhaseGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution("values must be finite"));
        }
        if values.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidDistribution("values must be nonnegative"));
        }
        Ok(Distribution { grid, values })
    }

    pub fn zeros(grid: Arc<PhaseGrid>) -> Self {
        let values = alloc::vec![0.0; grid.len()];
        Distribution { grid, values }
    }

    /// Samples `g(p, I)` at every node. Negative samples are rejected.
    pub fn from_fn<F: FnMut(&FourVector, f64) -> f64>(grid: Arc<PhaseGrid>, mut g: F) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for p in grid.momenta() {
            for &i in grid.internal_nodes() {
                values.push(g(p, i));
            }
        }
        Self::new(grid, values)
    }

    /// Wraps values without validation; callers guarantee nonnegativity.
    pub(crate) fn from_raw(grid: Arc<PhaseGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Distribution { grid, values }
    }

    pub fn grid(&self) -> &Arc<PhaseGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, v| a.max(*v))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|v| v * factor).collect())
    }

    /// Nodewise sum `self + other`.
    pub fn sum(&self, other: &Distribution) -> Result<Self> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Distribution { grid: self.grid.clone(), values })
    }

    pub fn check_grid(&self, other: &Distribution) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Largest nodewise difference.
    pub fn max_abs_diff(&self, other: &Distribution) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0_f64, |a, (x, y)| a.max(fabs(x - y))))
    }
}

/// Sets negative samples to zero and returns the weighted mass removed,
/// `Σ |f⁻| w_p w_I`.
pub fn floor_negative(grid: &PhaseGrid, values: &mut [f64]) -> f64 {
    if values.iter().all(|v| *v >= 0.0) {
        return 0.0;
    }
    let [lost] = grid.fold(values, |_, f| [if f < 0.0 { -f } else { 0.0 }]);
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    log::warn!("floored negative samples, mass removed {lost:e}");
    lost
}

/// `Σ_{i,j} f_ij · w(p_i, I_j) · w_p · w_I`, pairwise accumulated.
pub fn reduce_pi<W: FnMut(&FourVector, f64) -> f64>(f: &Distribution, mut w: W) -> f64 {
    let [s] = f.grid.fold(&f.values, |node, v| [v * w(node.p, node.internal)]);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(n_p: usize, n_i: usize, sigma: f64) -> Arc<PhaseGrid> {
        let consts = Constants::nondimensional(sigma).unwrap();
        build_phase_grid(GridConfig::for_gamma_min(n_p, n_i, 1.0), consts).unwrap()
    }

    #[test]
    fn grid_shape_and_symmetry() {
        let consts = Constants::default();
        let cfg = GridConfig { n_p: 16, p_max: 8.0, n_i: 16, s_max: 80.0, check_tol: 1e-8 };
        let grid = build_phase_grid(cfg, consts).unwrap();
        assert_eq!(grid.n_momentum(), 16 * 16 * 16);
        let m = grid.momenta();
        let n = m.len();
        for k in 0..n {
            let mirror = &m[n - 1 - k];
            for a in 1..4 {
                assert_eq!(m[k][a], -mirror[a]);
            }
            assert!(m[k][0] >= consts.mc());
        }
        assert!(grid.internal_weights().iter().all(|w| *w > 0.0));
    }

    #[test]
    fn state_density_check_sigma_zero_and_half() {
        let g0 = unit_grid(8, 32, 0.0);
        let (got, want) = g0.state_density_check();
        assert_eq!(want, 1.0);
        assert!((got - want).abs() < 1e-8);

        let g5 = unit_grid(8, 32, 0.5);
        let (got, want) = g5.state_density_check();
        let gamma_three_halves = core::f64::consts::PI.sqrt() / 2.0;
        assert!((want - gamma_three_halves).abs() < 1e-15);
        assert!((got - want).abs() / want < 1e-8);
    }

    #[test]
    fn internal_rule_handles_singular_weight() {
        for &sigma in &[-0.5, -0.9, 0.0, 1.0, 2.0] {
            let (s, w) = internal_energy_rule(32, 80.0, sigma).unwrap();
            let want = tgamma(sigma + 1.0) / pow(3.0, sigma + 1.0);
            let got: f64 = s.iter().zip(&w).map(|(s, w)| w * exp(-3.0 * s)).sum();
            assert!((got - want).abs() / want < 1e-8, "sigma {sigma}: {got} vs {want}");
        }
    }

    #[test]
    fn invalid_configs() {
        let consts = Constants::default();
        let mut cfg = GridConfig::for_gamma_min(15, 16, 1.0);
        assert!(matches!(build_phase_grid(cfg, consts), Err(Error::InvalidGridConfig(_))));
        cfg.n_p = 16;
        cfg.p_max = 0.0;
        assert!(matches!(build_phase_grid(cfg, consts), Err(Error::InvalidGridConfig(_))));
        cfg.p_max = 4.0;
        cfg.n_i = 2;
        assert!(matches!(build_phase_grid(cfg, consts), Err(Error::InvalidGridConfig(_))));
    }

    #[test]
    fn reduce_examples() {
        let grid = unit_grid(8, 16, 0.0);
        assert_eq!(reduce_pi(&Distribution::zeros(grid.clone()), |_, _| 1.0), 0.0);

        // f ≡ 1 against the test weight e^{-I/(mc²)}: box volume times 1 − e^{-s_max}.
        let ones = Distribution::from_fn(grid.clone(), |_, _| 1.0).unwrap();
        let got = reduce_pi(&ones, |_, i| exp(-i));
        let cfg = grid.config();
        let want = pow(2.0 * cfg.p_max, 3.0) * (1.0 - exp(-cfg.s_max));
        assert!((got - want).abs() / want < 1e-8);
    }

    #[test]
    fn odd_weights_vanish_for_even_f() {
        let grid = unit_grid(12, 8, 0.0);
        let f = Distribution::from_fn(grid, |p, i| exp(-p[0] - i) * (1.0 + p[1] * p[1])).unwrap();
        let even = reduce_pi(&f, |_, _| 1.0);
        for a in 1..4 {
            let odd = reduce_pi(&f, |p, _| p[a]);
            assert!(odd.abs() < 1e-13 * even, "axis {a}: {odd}");
        }
    }

    #[test]
    fn negative_samples_rejected_then_floored() {
        let grid = unit_grid(8, 4, 0.0);
        let mut values = alloc::vec![1.0; grid.len()];
        values[3] = -0.5;
        assert!(Distribution::new(grid.clone(), values.clone()).is_err());
        let lost = floor_negative(&grid, &mut values);
        assert!(lost > 0.0);
        assert!(Distribution::new(grid, values).is_ok());
    }

    #[test]
    fn grid_mismatch_detected() {
        let a = Distribution::zeros(unit_grid(8, 4, 0.0));
        let b = Distribution::zeros(unit_grid(10, 4, 0.0));
        assert_eq!(a.check_grid(&b), Err(Error::GridMismatch));
    }
}
