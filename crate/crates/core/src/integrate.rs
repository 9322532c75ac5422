//! Gauss–Legendre rules and globally adaptive Gauss–Kronrod integration.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, fabs, hypot, lgamma, log, pow, sqrt};

use crate::{Error, Result};

/// `n`-point Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut x = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if fabs(dx) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Generalized Gauss–Laguerre rule for `∫₀^∞ g(x) x^α e^{-x} dx`.
///
/// Returns ascending nodes and the natural logarithms of the weights (the
/// weights of the outer nodes underflow long before the nodes overflow).
/// Nodes are eigenvalues of the Jacobi matrix, polished by Newton steps on
/// `L_n^{(α)}`.
pub fn gauss_laguerre(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Laguerre rule needs at least one node");
    assert!(alpha > -1.0, "Gauss-Laguerre rule needs alpha > -1");
    let mut diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let mut off: Vec<f64> = (0..n).map(|k| if k + 1 < n { sqrt((k as f64 + 1.0) * (k as f64 + 1.0 + alpha)) } else { 0.0 }).collect();
    tridiagonal_eigenvalues(&mut diag, &mut off);
    diag.sort_by(f64::total_cmp);

    let mut nodes = diag;
    let mut ln_weights = Vec::with_capacity(n);
    let ln_norm = lgamma(n as f64 + alpha + 1.0) - lgamma(n as f64 + 1.0);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = laguerre_with_derivative(n, alpha, *x);
            let dx = p / dp;
            if !dx.is_finite() {
                break;
            }
            *x -= dx;
            if fabs(dx) <= 1e-15 * *x {
                break;
            }
        }
        let next = laguerre(n + 1, alpha, *x);
        ln_weights.push(ln_norm + log(*x) - 2.0 * log((n as f64 + 1.0) * fabs(next)));
    }
    (nodes, ln_weights)
}

fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut l0 = 1.0;
    let mut l1 = 1.0 + alpha - x;
    if n == 0 {
        return l0;
    }
    for k in 1..n {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 + alpha - x) * l1 - (kf + alpha) * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

fn laguerre_with_derivative(n: usize, alpha: f64, x: f64) -> (f64, f64) {
    let p = laguerre(n, alpha, x);
    let pm = laguerre(n - 1, alpha, x);
    // x L_n' = n L_n − (n+α) L_{n−1}
    (p, (n as f64 * p - (n as f64 + alpha) * pm) / x)
}

/// Eigenvalues of a symmetric tridiagonal matrix (implicit QL with Wilkinson
/// shifts); `off[k]` couples `k` and `k+1`. Eigenvalues are left in `diag`.
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) {
    let n = diag.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = fabs(diag[m]) + fabs(diag[m + 1]);
                if fabs(off[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = hypot(g, 1.0);
            g = diag[m] - diag[l] + off[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = hypot(f, g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_690_707,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Result of a quadrature with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// One Gauss–Kronrod 21 panel with the QUADPACK error rescaling.
pub fn gauss_kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_k = fabs(kronrod);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (fabs(f1) + fabs(f2));
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * fabs(fc - mean);
    for j in 0..10 {
        asc += WGK[j] * (fabs(fv1[j] - mean) + fabs(fv2[j] - mean));
    }
    let value = kronrod * half;
    let res_abs = fabs(abs_k * half);
    let res_asc = fabs(asc * half);
    let mut err = fabs((kronrod - gauss) * half);
    if res_asc != 0.0 && err != 0.0 {
        let scale = pow(200.0 * err / res_asc, 1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && floor > err {
        err = floor;
    }
    Estimate { value, error: err }
}

/// Smallest relative tolerance [`adaptive`] attempts to meet.
pub const MIN_REL_TOL: f64 = 1e-13;

/// Globally adaptive integration over consecutive `breakpoints`.
///
/// Bisects the panel with the largest error until the summed estimate drops
/// below `max(abs_tol, rel_tol·|I|)` or `max_panels` is exhausted. Relative
/// tolerances below [`MIN_REL_TOL`] are raised to it, since the per-panel
/// error estimates bottom out at that level.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Estimate> {
    assert!(breakpoints.len() >= 2, "need at least one interval");
    let rel_tol = rel_tol.max(MIN_REL_TOL);
    let mut segments: Vec<Segment> = breakpoints
        .windows(2)
        .map(|w| {
            let e = gauss_kronrod21(&mut f, w[0], w[1]);
            Segment { a: w[0], b: w[1], value: e.value, error: e.error }
        })
        .collect();

    loop {
        let (value, error) = totals(&segments);
        let target = abs_tol.max(rel_tol * fabs(value));
        if error <= target {
            return Ok(Estimate { value, error });
        }
        if segments.len() >= max_panels {
            return Err(Error::ToleranceNotReached { estimate: error / fabs(value).max(f64::MIN_POSITIVE), requested: rel_tol });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let s = segments[worst];
        let mid = 0.5 * (s.a + s.b);
        if !(mid > s.a && mid < s.b) {
            // Panel at floating-point resolution: nothing left to refine.
            return Ok(Estimate { value, error });
        }
        let left = gauss_kronrod21(&mut f, s.a, mid);
        let right = gauss_kronrod21(&mut f, mid, s.b);
        segments[worst] = Segment { a: s.a, b: mid, value: left.value, error: left.error };
        segments.push(Segment { a: mid, b: s.b, value: right.value, error: right.error });
    }
}

fn totals(segments: &[Segment]) -> (f64, f64) {
    // Sort-free but order-stable: segments are summed in storage order.
    let mut value = crate::sum::PairwiseSum::<2>::new();
    for s in segments {
        value.add(&[s.value, s.error]);
    }
    let [v, e] = value.finish();
    (v, e)
}
