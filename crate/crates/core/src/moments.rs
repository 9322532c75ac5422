//! Macroscopic moments of a distribution and the Eckart decomposition.

use libm::{log, sqrt};

use crate::quadrature::Distribution;
use crate::spacetime::{Constants, FourVector};
use crate::{Error, Result};

/// Moments of one distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentSet {
    /// Particle flux `V^μ = mc ∫∫ p^μ f φ dI dp/p⁰`.
    pub v: FourVector,
    /// Energy-momentum tensor `T^μν = (1/mc) ∫∫ p^μ p^ν f (mc²+I) φ dI dp/p⁰`.
    pub t: [[f64; 4]; 4],
    /// Entropy flux `h^μ = −k_B c ∫∫ p^μ f ln f φ dI dp/p⁰`.
    pub h: FourVector,
    /// `∫∫ f (1 + I/mc²)⁻¹ φ dI dp/p⁰`.
    pub s: f64,
    /// Number integral `∫∫ f φ dI dp`.
    pub n: f64,
}

impl MomentSet {
    /// `T^{0ν}`.
    pub fn t0(&self) -> FourVector {
        FourVector(self.t[0])
    }
}

/// Frame quantities `n_f`, `U_f` with `V = m n_f U_f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EckartFrame {
    pub n_f: f64,
    pub u_f: FourVector,
}

// Lane layout of the single-pass reduction.
const V0: usize = 0;
const T0: usize = 4;
const H0: usize = 14;
const S: usize = 18;
const N: usize = 19;
const LANES: usize = 20;

const T_INDEX: [(usize, usize); 10] = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];

/// `f ln f` with the limit value 0 at `f = 0`.
#[inline]
pub fn f_ln_f(f: f64) -> f64 {
    if f > 0.0 {
        f * log(f)
    } else {
        0.0
    }
}

pub fn compute_moments(f: &Distribution) -> MomentSet {
    let grid = f.grid();
    let consts = grid.consts();
    let mc = consts.mc();
    let mc2 = consts.mc2();

    let sums = grid.fold::<LANES, _>(f.values(), |node, value| {
        let mut out = [0.0; LANES];
        if value == 0.0 {
            return out;
        }
        let p = node.p;
        let a = value / p[0];
        let entropy = f_ln_f(value) / p[0];
        let energy = mc2 + node.internal;
        for mu in 0..4 {
            out[V0 + mu] = p[mu] * a;
            out[H0 + mu] = p[mu] * entropy;
        }
        for (k, &(mu, nu)) in T_INDEX.iter().enumerate() {
            out[T0 + k] = p[mu] * p[nu] * a * energy;
        }
        out[S] = a / node.energy_factor;
        out[N] = value;
        out
    });

    let v = FourVector(core::array::from_fn(|mu| mc * sums[V0 + mu]));
    let h = FourVector(core::array::from_fn(|mu| -consts.k_b() * consts.c() * sums[H0 + mu]));
    let mut t = [[0.0; 4]; 4];
    for (k, &(mu, nu)) in T_INDEX.iter().enumerate() {
        let value = sums[T0 + k] / mc;
        t[mu][nu] = value;
        t[nu][mu] = value;
    }
    MomentSet { v, t, h, s: sums[S], n: sums[N] }
}

/// Only the scalar `S` and the flux `V^μ`, the moments the equilibrium
/// conditions constrain.
pub fn flux_moments(f: &Distribution) -> (f64, FourVector) {
    let grid = f.grid();
    let mc = grid.consts().mc();
    let sums = grid.fold::<5, _>(f.values(), |node, value| {
        let p = node.p;
        let a = value / p[0];
        [a / node.energy_factor, p[0] * a, p[1] * a, p[2] * a, p[3] * a]
    });
    (sums[0], FourVector::new(mc * sums[1], mc * sums[2], mc * sums[3], mc * sums[4]))
}

/// `n_f = √(V·V)/(mc)`, `U_f = V/(m n_f)`.
pub fn eckart_decompose(ms: &MomentSet, consts: &Constants) -> Result<EckartFrame> {
    eckart_from_flux(&ms.v, consts)
}

pub fn eckart_from_flux(v: &FourVector, consts: &Constants) -> Result<EckartFrame> {
    if !v.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    if !(v[0] > 0.0) {
        return Err(Error::NegativeTimeComponent(v[0]));
    }
    let norm_sq = v.norm_sq();
    if !(norm_sq > 0.0) {
        return Err(Error::NonTimelikeFlux { norm_sq });
    }
    let n_f = sqrt(norm_sq) / consts.mc();
    let u_f = *v * (1.0 / (consts.m() * n_f));
    Ok(EckartFrame { n_f, u_f })
}

/// `S / n_f`, the right side of the coldness relation.
pub fn scalar_moment_ratio(ms: &MomentSet, ef: &EckartFrame) -> f64 {
    ms.s / ef.n_f
}

/// `(1/c) ∫∫ U_{fμ} p^μ f φ dI dp/p⁰`: the density measured in the Eckart frame.
pub fn frame_density(f: &Distribution, ef: &EckartFrame) -> f64 {
    let c = f.grid().consts().c();
    let u = ef.u_f;
    let [s] = f.grid().fold::<1, _>(f.values(), |node, value| [value * u.dot(node.p) / node.p[0]]);
    s / c
}
