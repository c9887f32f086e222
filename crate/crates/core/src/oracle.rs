//! Brute-force numerical references for tests.
//!
//! Everything here deliberately avoids the closed forms used by the library:
//! integrals go through adaptive Simpson quadrature, derivatives through
//! Richardson-extrapolated central differences, sums through double-double
//! accumulation. The routines are slow and only meant for checking.

use crate::special::normal_cdf;

/// `|a - b| / |b|`, with `0/0 = 0`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / b.abs()
}

/// Adaptive Simpson quadrature with Richardson correction, absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let c = 0.5 * (a + b);
    let (fa, fb, fc) = (f(a), f(b), f(c));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    simpson_step(f, a, b, fa, fb, fc, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let c = 0.5 * (a + b);
    let d = 0.5 * (a + c);
    let e = 0.5 * (c + b);
    let (fd, fe) = (f(d), f(e));
    let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
    let delta = left + right - whole;
    if depth == 0
        || delta.abs() <= 15.0 * tol
        || delta.abs() <= 8.0 * f64::EPSILON * (left.abs() + right.abs())
    {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, c, fa, fc, fd, left, 0.5 * tol, depth - 1)
        + simpson_step(f, c, b, fc, fb, fe, right, 0.5 * tol, depth - 1)
}

/// Ridders' extrapolated central difference for `f'(x)`; returns `(value, error estimate)`.
pub fn ridders<F: Fn(f64) -> f64>(f: F, x: f64, h0: f64) -> (f64, f64) {
    best_start(|h| (f(x + h) - f(x - h)) / (2.0 * h), h0)
}

/// Extrapolated central second difference for `f''(x)`; returns `(value, error estimate)`.
pub fn ridders_second<F: Fn(f64) -> f64>(f: F, x: f64, h0: f64) -> (f64, f64) {
    let fx = f(x);
    best_start(|h| (f(x + h) - 2.0 * fx + f(x - h)) / (h * h), h0)
}

/// Runs the tableau from `h0`, `h0/4` and `h0/16`; keeps the smallest error estimate.
fn best_start<D: Fn(f64) -> f64>(quotient: D, h0: f64) -> (f64, f64) {
    [1.0, 0.25, 0.0625]
        .iter()
        .map(|s| richardson(&quotient, s * h0))
        .fold(
            (f64::NAN, f64::INFINITY),
            |best, r| if r.1 < best.1 { r } else { best },
        )
}

/// Neville tableau for a difference quotient whose error expands in even powers of `h`.
fn richardson<D: Fn(f64) -> f64>(quotient: D, h0: f64) -> (f64, f64) {
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    const NTAB: usize = 12;
    const SAFE: f64 = 2.0;
    let mut table = [[0.0f64; NTAB]; NTAB];
    let mut h = h0;
    table[0][0] = quotient(h);
    let mut best = table[0][0];
    let mut err = f64::MAX;
    for i in 1..NTAB {
        h /= CON;
        table[0][i] = quotient(h);
        let mut fac = CON2;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let errt = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs());
            if errt <= err {
                err = errt;
                best = table[j][i];
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= SAFE * err {
            break;
        }
    }
    (best, err)
}

/// Moments of the tilted Bernoulli–Gaussian prior computed the slow way.
#[derive(Debug, Clone, Copy)]
pub struct OracleMoments {
    pub log_z: f64,
    pub mean: f64,
    pub variance: f64,
}

/// `ln ∫ dx e^{-a x²/2 + h x} φ(x)` by quadrature of the slab part.
pub fn log_partition_by_quadrature(rho: f64, sigma2: f64, a: f64, h: f64) -> f64 {
    let exponent = |x: f64| {
        -0.5 * x * x / sigma2 - 0.5 * a * x * x + h * x - 0.5 * (2.0 * std::f64::consts::PI * sigma2).ln()
    };
    // The exponent is concave; centre the window on its maximiser.
    let curvature = a + 1.0 / sigma2;
    let peak = h / curvature;
    let width = 40.0 / curvature.sqrt();
    let top = exponent(peak);
    // Tolerance sits above the roundoff of `exponent(x) - top`, which grows with |h x|.
    let noise = f64::EPSILON * (h * (peak.abs() + width)).abs().max(1.0);
    let mass = adaptive_simpson(
        &|x| (exponent(x) - top).exp(),
        peak - width,
        peak + width,
        (1e-17f64).max(10.0 * noise) * width,
    );
    let log_slab = rho.ln() + top + mass.ln();
    let log_spike = (1.0 - rho).ln();
    let hi = log_slab.max(log_spike);
    hi + ((log_slab - hi).exp() + (log_spike - hi).exp()).ln()
}

/// Quadrature for `ln Z` plus extrapolated finite differences in `h` for the moments.
pub fn tilted_moments_by_quadrature(rho: f64, sigma2: f64, a: f64, h: f64) -> OracleMoments {
    let log_z = |field: f64| log_partition_by_quadrature(rho, sigma2, a, field);
    let s = sigma2 / (1.0 + a * sigma2);
    // Step on the scale over which the slab log-weight changes by O(1).
    let step = 0.5 * (1.0 / s.sqrt()).min(1.0 / (h.abs() * s + 1e-300));
    OracleMoments {
        log_z: log_z(h),
        mean: ridders(log_z, h, step).0,
        variance: ridders_second(log_z, h, step).0,
    }
}

/// Measurement model used by [`smoothed_log_evidence_by_quadrature`].
#[derive(Debug, Clone, Copy)]
pub enum OracleChannel {
    Awgn { noise_var: f64 },
    OneBit { noise_var: f64 },
}

impl OracleChannel {
    /// `P(y | u)` straight from the model definition.
    pub fn likelihood(&self, y: f64, u: f64) -> f64 {
        match *self {
            OracleChannel::Awgn { noise_var } => {
                (-(y - u) * (y - u) / (2.0 * noise_var)).exp()
                    / (2.0 * std::f64::consts::PI * noise_var).sqrt()
            }
            OracleChannel::OneBit { noise_var: 0.0 } => {
                if y * u >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            OracleChannel::OneBit { noise_var } => normal_cdf(y * u / noise_var.sqrt()),
        }
    }
}

/// `ln ∫ Dz P(y | Δ + √χ z)` by quadrature over `z`. Only for moderate arguments.
pub fn smoothed_log_evidence_by_quadrature(ch: OracleChannel, y: f64, delta: f64, chi: f64) -> f64 {
    let sd = chi.sqrt();
    let integrand = |z: f64| {
        (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt() * ch.likelihood(y, delta + sd * z)
    };
    let lo = -40.0;
    let hi = 40.0;
    let total = match ch {
        OracleChannel::OneBit { noise_var } if noise_var == 0.0 && sd > 0.0 => {
            let kink = (-delta / sd).clamp(lo, hi);
            adaptive_simpson(&integrand, lo, kink, 1e-17) + adaptive_simpson(&integrand, kink, hi, 1e-17)
        }
        _ => {
            let mut acc = 0.0;
            let mut edge = lo;
            while edge < hi {
                acc += adaptive_simpson(&integrand, edge, edge + 5.0, 1e-18);
                edge += 5.0;
            }
            acc
        }
    };
    total.ln()
}

/// Exact posterior mean and variance of a scalar Bernoulli–Gaussian component
/// observed as `y_μ = φ_μ x + N(0, σ_n²)`, by direct quadrature.
pub fn exact_posterior_1d(rho: f64, sigma2: f64, noise_var: f64, observations: &[(f64, f64)]) -> (f64, f64) {
    let log_lik = |x: f64| -> f64 {
        observations
            .iter()
            .map(|&(phi, y)| -(y - phi * x) * (y - phi * x) / (2.0 * noise_var))
            .sum::<f64>()
    };
    let log_slab_density =
        |x: f64| -0.5 * x * x / sigma2 - 0.5 * (2.0 * std::f64::consts::PI * sigma2).ln() + log_lik(x);

    // Locate the slab mode by a grid scan refined with golden-section search.
    let span = 20.0 * sigma2.sqrt();
    let mut best = 0.0;
    let mut best_val = f64::NEG_INFINITY;
    let grid = 200_000;
    for k in 0..=grid {
        let x = -span + 2.0 * span * k as f64 / grid as f64;
        let v = log_slab_density(x);
        if v > best_val {
            best_val = v;
            best = x;
        }
    }
    let cell = 2.0 * span / grid as f64;
    let (mut lo, mut hi) = (best - cell, best + cell);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = hi - inv_phi * (hi - lo);
        let x2 = lo + inv_phi * (hi - lo);
        if log_slab_density(x1) > log_slab_density(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let mode = 0.5 * (lo + hi);
    let top = log_slab_density(mode);
    let (curv, _) = ridders_second(log_slab_density, mode, cell.max(1e-3));
    let width = 40.0 / (-curv).sqrt();

    let tol = 1e-18 * width;
    let slab_mass = |power: i32| {
        adaptive_simpson(
            &|x: f64| x.powi(power) * (log_slab_density(x) - top).exp(),
            mode - width,
            mode + width,
            tol * (1.0 + mode.abs()).powi(power),
        )
    };
    let (z0, z1, z2) = (slab_mass(0), slab_mass(1), slab_mass(2));
    // Spike contributes (1-ρ) L(0) to the evidence, nothing to the moments.
    let spike = (1.0 - rho) * (log_lik(0.0) - top).exp();
    let slab = rho;
    let norm = spike + slab * z0;
    let mean = slab * z1 / norm;
    let second = slab * z2 / norm;
    (mean, second - mean * mean)
}

/// `Σ (a_i - b_i)²` accumulated in double-double arithmetic.
pub fn sum_sq_diff_dd(a: &[f64], b: &[f64]) -> f64 {
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        let p = d * d;
        let p_err = d.mul_add(d, -p);
        let s = hi + p;
        let bb = s - hi;
        let s_err = (hi - (s - bb)) + (p - bb);
        lo += s_err + p_err;
        hi = s;
    }
    hi + lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_gaussian_mass() {
        let v = adaptive_simpson(&|x: f64| (-0.5 * x * x).exp(), -40.0, 40.0, 1e-16);
        assert!(rel_err(v, (2.0 * std::f64::consts::PI).sqrt()) < 1e-14);
    }

    #[test]
    fn ridders_on_known_functions() {
        let (d, _) = ridders(f64::sin, 0.3, 0.5);
        assert!((d - 0.3f64.cos()).abs() < 1e-12);
        let (d2, _) = ridders_second(f64::exp, 1.0, 0.5);
        assert!(rel_err(d2, 1f64.exp()) < 1e-9);
    }

    #[test]
    fn dd_sum_beats_naive() {
        let a = vec![1e8 + 1.0, 1.0, -1e8];
        let b = vec![0.0; 3];
        let exact = (1e8f64 + 1.0).powi(2) + 1.0 + 1e16;
        assert!(rel_err(sum_sq_diff_dd(&a, &b), exact) < 1e-16);
    }
}
