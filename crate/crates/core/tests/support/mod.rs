//! Reference values computed without any of the crate's quadrature code.
#![allow(dead_code)]

use std::f64::consts::PI;

const EULER: f64 = 0.577_215_664_901_532_9;

/// Modified Bessel function `K₁(x)`.
///
/// Power series for `x ≤ 2`; beyond, the trapezoid rule on
/// `K₁(x) = ∫₀^∞ e^{-x cosh t} cosh t dt`, which converges geometrically for
/// this analytic, double-exponentially decaying integrand.
pub fn bessel_k1(x: f64) -> f64 {
    assert!(x > 0.0);
    if x <= 2.0 {
        let y = 0.25 * x * x;
        let mut term = 1.0; // y^k / (k! (k+1)!)
        let mut i1 = 0.0;
        let mut tail = 0.0;
        let mut psi_a = -EULER; // ψ(k+1)
        let mut psi_b = 1.0 - EULER; // ψ(k+2)
        for k in 0..60 {
            if k > 0 {
                term *= y / (k as f64 * (k as f64 + 1.0));
                psi_a += 1.0 / k as f64;
                psi_b += 1.0 / (k as f64 + 1.0);
            }
            i1 += term;
            tail += (psi_a + psi_b) * term;
        }
        let i1 = 0.5 * x * i1;
        1.0 / x + (0.5 * x).ln() * i1 - 0.25 * x * tail
    } else {
        // Scaled by e^{x} to keep the summands O(1).
        let h = 0.02;
        let mut sum = 0.5;
        let mut k = 1;
        loop {
            let t = k as f64 * h;
            let term = (-x * (t.cosh() - 1.0)).exp() * t.cosh();
            sum += term;
            if term < 1e-20 {
                break;
            }
            k += 1;
        }
        h * sum * (-x).exp()
    }
}

/// `e^{a} E₁(a)`.
pub fn scaled_e1(a: f64) -> f64 {
    if a < 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -a / k as f64;
            sum -= term / k as f64;
            if term.abs() < 1e-18 {
                break;
            }
        }
        return a.exp() * (-EULER - a.ln() + sum);
    }
    let tiny = 1e-300;
    let mut b = a + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `M̃/M` at `σ = 0`, `mc = 1` by a brute-force two-dimensional product
/// Gauss–Legendre rule over `(r, u)`, `u = 1 + I/mc²`.
///
/// `M̃ = 4π ∫ r²/q ∫₁^∞ e^{-γqu}/u du dr`, `M = 4π ∫ r² e^{-γq}/(γq) dr`.
pub fn brute_force_ratio_sigma0(gamma: f64) -> f64 {
    let (x, w) = legendre(40);
    let r_max = ((1.0 + 60.0 / gamma).powi(2) - 1.0).sqrt();
    let panels = 200;
    let mut mt = 0.0;
    let mut m = 0.0;
    for pr in 0..panels {
        let (a, b) = (r_max * pr as f64 / panels as f64, r_max * (pr + 1) as f64 / panels as f64);
        for (xi, wi) in x.iter().zip(&w) {
            let r = 0.5 * (a + b) + 0.5 * (b - a) * xi;
            let wr = 0.5 * (b - a) * wi;
            let q = (1.0 + r * r).sqrt();
            let c = gamma * q;
            // Inner integral on u ∈ [1, 1 + 60/c] by panels of width 1/c.
            let mut inner = 0.0;
            for pu in 0..60 {
                let (ua, ub) = (1.0 + pu as f64 / c, 1.0 + (pu + 1) as f64 / c);
                for (yj, wj) in x.iter().zip(&w) {
                    let u = 0.5 * (ua + ub) + 0.5 * (ub - ua) * yj;
                    inner += 0.5 * (ub - ua) * wj * (-(c * (u - 1.0))).exp() / u;
                }
            }
            // e^{-γq} scaled by the common e^{γ}.
            let decay = (-gamma * (q - 1.0)).exp();
            mt += wr * decay * r * r / q * inner;
            m += wr * decay * r * r / c;
        }
    }
    mt / m
}

/// Gauss–Legendre nodes on `[-1, 1]` by Newton iteration (test-local copy).
pub fn legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Reference value of `M̃(1)/M(1)` at `σ = 0`, `mc = 1`, from a 30-digit
/// two-dimensional adaptive quadrature.
pub const RATIO_AT_GAMMA_ONE: f64 = 0.326_785_357_909_887_8;
