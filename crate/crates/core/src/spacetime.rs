//! Physical constants, Minkowski four-vectors and rest-frame boosts.
//!
//! Signature `(+,-,-,-)`; components are contravariant.

use core::ops::{Add, Index, Mul, Neg, Sub};

use libm::{pow, sqrt};

use crate::{Error, Result};

/// Physical parameters shared by every formula in the crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    c: f64,
    m: f64,
    k_b: f64,
    tau: f64,
    sigma: f64,
}

impl Constants {
    /// Validates and builds a parameter set.
    ///
    /// `tau` may be `+inf` (collisionless limit); everything else must be
    /// finite. The state-density exponent must exceed `-1`.
    pub fn new(c: f64, m: f64, k_b: f64, tau: f64, sigma: f64) -> Result<Self> {
        fn positive(x: f64) -> bool {
            x.is_finite() && x > 0.0
        }
        if !positive(c) {
            return Err(Error::InvalidConstants("c must be positive and finite"));
        }
        if !positive(m) {
            return Err(Error::InvalidConstants("m must be positive and finite"));
        }
        if !positive(k_b) {
            return Err(Error::InvalidConstants("k_B must be positive and finite"));
        }
        if tau.is_nan() || tau <= 0.0 {
            return Err(Error::InvalidConstants("tau must be positive"));
        }
        if !sigma.is_finite() || sigma <= -1.0 {
            return Err(Error::InvalidConstants("sigma must exceed -1"));
        }
        Ok(Constants { c, m, k_b, tau, sigma })
    }

    /// `c = m = k_B = tau = 1` with the given state-density exponent.
    pub fn nondimensional(sigma: f64) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, 1.0, sigma)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn k_b(&self) -> f64 {
        self.k_b
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Rest momentum `mc`.
    pub fn mc(&self) -> f64 {
        self.m * self.c
    }

    /// Rest energy `mc²`.
    pub fn mc2(&self) -> f64 {
        self.m * self.c * self.c
    }

    pub fn with_sigma(self, sigma: f64) -> Result<Self> {
        Self::new(self.c, self.m, self.k_b, self.tau, sigma)
    }

    pub fn with_tau(self, tau: f64) -> Result<Self> {
        Self::new(self.c, self.m, self.k_b, tau, self.sigma)
    }
}

impl Default for Constants {
    fn default() -> Self {
        Constants { c: 1.0, m: 1.0, k_b: 1.0, tau: 1.0, sigma: 0.0 }
    }
}

/// A contravariant four-vector `(a⁰, a¹, a², a³)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const ZERO: FourVector = FourVector([0.0; 4]);

    pub const fn new(a0: f64, a1: f64, a2: f64, a3: f64) -> Self {
        FourVector([a0, a1, a2, a3])
    }

    pub fn time(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    /// Euclidean norm of the spatial part.
    pub fn spatial_norm(&self) -> f64 {
        sqrt(self.0[1] * self.0[1] + self.0[2] * self.0[2] + self.0[3] * self.0[3])
    }

    pub fn dot(&self, other: &FourVector) -> f64 {
        minkowski_dot(self, other)
    }

    pub fn norm_sq(&self) -> f64 {
        minkowski_dot(self, self)
    }

    /// Lowers the index with `g = diag(1,-1,-1,-1)`.
    pub fn lowered(&self) -> [f64; 4] {
        [self.0[0], -self.0[1], -self.0[2], -self.0[3]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    /// Euclidean norm of all four components (not Lorentz invariant).
    pub fn euclidean_norm(&self) -> f64 {
        sqrt(self.0.iter().map(|x| x * x).sum())
    }
}

impl Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector(core::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector(core::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector(self.0.map(|x| -x))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, s: f64) -> FourVector {
        FourVector(self.0.map(|x| x * s))
    }
}

/// `a⁰b⁰ − a¹b¹ − a²b² − a³b³`.
pub fn minkowski_dot(a: &FourVector, b: &FourVector) -> f64 {
    a.0[0] * b.0[0] - a.0[1] * b.0[1] - a.0[2] * b.0[2] - a.0[3] * b.0[3]
}

/// `U = (√(c² + |u|²), u)`.
pub fn four_velocity_from_spatial(u: [f64; 3], consts: &Constants) -> FourVector {
    let c = consts.c();
    let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    FourVector::new(sqrt(c * c + u2), u[0], u[1], u[2])
}

/// On-shell momentum `(√((mc)² + |p|²), p)`.
pub fn on_shell_momentum(p: [f64; 3], consts: &Constants) -> FourVector {
    let mc = consts.mc();
    let p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    FourVector::new(sqrt(mc * mc + p2), p[0], p[1], p[2])
}

type Matrix4 = [[f64; 4]; 4];

fn mat_vec(m: &Matrix4, v: &FourVector) -> FourVector {
    FourVector(core::array::from_fn(|i| {
        m[i][0] * v.0[0] + m[i][1] * v.0[1] + m[i][2] * v.0[2] + m[i][3] * v.0[3]
    }))
}

/// Pure boost taking a four-velocity `U` to the rest frame `(c, 0, 0, 0)`.
///
/// The inverse is stored as `gΛᵀg`, which is exact for any Lorentz matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Boost {
    lambda: Matrix4,
    inverse: Matrix4,
}

impl Boost {
    pub fn matrix(&self) -> &Matrix4 {
        &self.lambda
    }

    pub fn inverse_matrix(&self) -> &Matrix4 {
        &self.inverse
    }

    /// `Λv`.
    pub fn apply(&self, v: &FourVector) -> FourVector {
        mat_vec(&self.lambda, v)
    }

    /// `Λ⁻¹v`.
    pub fn apply_inverse(&self, v: &FourVector) -> FourVector {
        mat_vec(&self.inverse, v)
    }
}

/// Builds the rest-frame boost for the four-velocity `u`.
///
/// Spatial block `δᵢⱼ + UⁱUʲ/(c(U⁰+c))`, which equals
/// `δᵢⱼ + (U⁰/c − 1)UⁱUʲ/|U|²` on shell and stays regular at `|U| = 0`.
pub fn boost_from_velocity(u: &FourVector, consts: &Constants) -> Result<Boost> {
    if !u.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let c = consts.c();
    let u0 = u.0[0];
    let spatial = u.spatial();
    let k = 1.0 / (c * (u0 + c));

    let mut lambda = [[0.0; 4]; 4];
    lambda[0][0] = u0 / c;
    for i in 0..3 {
        lambda[0][i + 1] = -spatial[i] / c;
        lambda[i + 1][0] = -spatial[i] / c;
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            lambda[i + 1][j + 1] = delta + k * spatial[i] * spatial[j];
        }
    }

    // gΛᵀg: transpose, then flip the sign of every mixed time/space entry.
    let mut inverse = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let sign = if (i == 0) != (j == 0) { -1.0 } else { 1.0 };
            inverse[i][j] = sign * lambda[j][i];
        }
    }
    Ok(Boost { lambda, inverse })
}

pub fn apply_boost(b: &Boost, v: &FourVector) -> FourVector {
    b.apply(v)
}

pub fn apply_inverse_boost(b: &Boost, v: &FourVector) -> FourVector {
    b.apply_inverse(v)
}

/// State density `φ(I) = I^σ`.
pub fn state_density(internal: f64, sigma: f64) -> Result<f64> {
    if internal < 0.0 {
        return Err(Error::NegativeInternalEnergy(internal));
    }
    if sigma == 0.0 {
        return Ok(1.0);
    }
    Ok(pow(internal, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn dot_examples() {
        let e0 = FourVector::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(minkowski_dot(&e0, &e0), 1.0);

        let consts = Constants::new(1.0, 4.0, 1.0, 1.0, 0.0).unwrap();
        let p = on_shell_momentum([3.0, 0.0, 0.0], &consts);
        assert!(close(p.norm_sq(), 16.0, 1e-15));

        let unit = Constants::default();
        let u = four_velocity_from_spatial([0.6, 0.0, 0.0], &unit);
        assert!(close(u.norm_sq(), 1.0, 1e-15));
    }

    #[test]
    fn four_velocity_examples() {
        let unit = Constants::default();
        assert_eq!(four_velocity_from_spatial([0.0; 3], &unit), FourVector::new(1.0, 0.0, 0.0, 0.0));
        let c4 = Constants::new(4.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(four_velocity_from_spatial([3.0, 0.0, 0.0], &c4), FourVector::new(5.0, 3.0, 0.0, 0.0));
        assert!(Constants::new(0.0, 1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn rest_frame_boost_is_identity() {
        let consts = Constants::new(3.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        let b = boost_from_velocity(&FourVector::new(3.0, 0.0, 0.0, 0.0), &consts).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_eq!(b.matrix()[i][j], want);
            }
        }
        let v = FourVector::new(1.5, -2.0, 0.25, 7.0);
        assert_eq!(b.apply_inverse(&v), v);
    }

    #[test]
    fn boost_3_4_5() {
        let consts = Constants::new(4.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        let u = FourVector::new(5.0, 3.0, 0.0, 0.0);
        let b = boost_from_velocity(&u, &consts).unwrap();
        let rest = b.apply(&u);
        assert!(close(rest[0], 4.0, 1e-15));
        for i in 1..4 {
            assert!(rest[i].abs() < 1e-15);
        }
        let back = b.apply_inverse(&FourVector::new(4.0, 0.0, 0.0, 0.0));
        for i in 0..4 {
            assert!(close(back[i], u[i], 1e-15));
        }
    }

    #[test]
    fn non_finite_velocity_rejected() {
        let consts = Constants::default();
        let u = FourVector::new(f64::NAN, 0.0, 0.0, 0.0);
        assert_eq!(boost_from_velocity(&u, &consts), Err(Error::NonFiniteInput));
    }

    #[test]
    fn state_density_examples() {
        assert_eq!(state_density(1.0, 2.7).unwrap(), 1.0);
        assert_eq!(state_density(4.0, 0.5).unwrap(), 2.0);
        assert_eq!(state_density(0.0, 0.0).unwrap(), 1.0);
        assert!(matches!(state_density(-1.0, 0.0), Err(Error::NegativeInternalEnergy(_))));
    }

    #[test]
    fn sigma_must_exceed_minus_one() {
        assert!(Constants::nondimensional(-1.0).is_err());
        assert!(Constants::nondimensional(-0.999).is_ok());
        assert!(Constants::default().with_tau(f64::INFINITY).is_ok());
    }
}
