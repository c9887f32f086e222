//! Standard normal density, log-CDF and inverse Mills ratio, evaluated so that
//! none of them underflow in the far left tail.

use std::f64::consts::FRAC_1_SQRT_2;

/// `ln(2π)/2`
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Below this argument the log-CDF switches to its asymptotic series.
const TAIL_CUTOFF: f64 = -30.0;

/// Number of terms kept in `1 - 1/τ² + 3/τ⁴ - 15/τ⁶ + …`; at `τ = -30` the first
/// dropped term is below `1e-18`.
const TAIL_TERMS: usize = 9;

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn log_normal_pdf(x: f64) -> f64 {
    -0.5 * x * x - HALF_LN_2PI
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `S(τ) - 1` where `Φ(τ) = φ(τ) S(τ) / (-τ)` for `τ → -∞`.
fn tail_series_minus_one(tau: f64) -> f64 {
    let inv2 = 1.0 / (tau * tau);
    let mut term = 1.0;
    let mut acc = 0.0;
    for k in 1..TAIL_TERMS {
        term *= -((2 * k - 1) as f64) * inv2;
        acc += term;
    }
    acc
}

/// `ln Φ(τ)`, finite for every finite `τ`.
pub fn log_normal_cdf(tau: f64) -> f64 {
    if tau < TAIL_CUTOFF {
        log_normal_pdf(tau) - (-tau).ln() + tail_series_minus_one(tau).ln_1p()
    } else if tau < 0.0 {
        (0.5 * libm::erfc(-tau * FRAC_1_SQRT_2)).ln()
    } else {
        (-0.5 * libm::erfc(tau * FRAC_1_SQRT_2)).ln_1p()
    }
}

/// Inverse Mills ratio `R(τ) = φ(τ)/Φ(τ)`.
pub fn inverse_mills(tau: f64) -> f64 {
    if tau < TAIL_CUTOFF {
        -tau / (1.0 + tail_series_minus_one(tau))
    } else {
        (log_normal_pdf(tau) - log_normal_cdf(tau)).exp()
    }
}

/// `R(τ) (τ + R(τ))`, the negated curvature of `ln Φ` at `τ`.
///
/// In the left tail `τ + R(τ)` is a difference of two large, nearly equal numbers,
/// so it is taken from the series directly.
pub fn mills_curvature(tau: f64) -> f64 {
    if tau < TAIL_CUTOFF {
        let s1 = tail_series_minus_one(tau);
        let r = -tau / (1.0 + s1);
        // τ + R = τ (1 - 1/S) = τ (S - 1) / S
        r * (tau * s1 / (1.0 + s1))
    } else {
        let r = inverse_mills(tau);
        r * (tau + r)
    }
}

/// Numerically stable logistic function `1 / (1 + e^{-x})`.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(e^x + e^y)`.
#[inline]
pub fn log_add_exp(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
// reference values are quoted to 20 digits
#[allow(clippy::excessive_precision, clippy::approx_constant)]
mod tests {
    use super::*;

    const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    // 40-digit reference values of ln Φ(τ) and φ(τ)/Φ(τ).
    const REFERENCE: [(f64, f64, f64); 9] = [
        (-40.0, -804.608_442_013_753_788_2, 40.024_968_847_207_263_72),
        (-35.0, -616.975_101_261_922_513_5, 35.028_524_970_596_687_87),
        (-30.0, -454.321_243_956_343_197_1, 30.033_259_667_433_677_04),
        (-29.9, -451.322_912_458_528_634_5, 29.933_370_411_296_166_28),
        (-10.0, -53.231_285_150_512_470_58, 10.098_093_233_962_511_96),
        (-1.0, -1.841_021_645_009_263_506, 1.525_135_276_160_981_209),
        (0.0, -0.693_147_180_559_945_309_4, 0.797_884_560_802_865_355_9),
        (3.0, -0.001_350_809_964_748_193_799, 0.004_437_839_042_125_663_793),
        (10.0, -7.619_853_024_160_526_07e-24, 7.694_598_626_706_419_346e-23),
    ];

    #[test]
    fn log_cdf_and_mills_match_reference() {
        for &(tau, ln_cdf, mills) in &REFERENCE {
            assert!(rel(log_normal_cdf(tau), ln_cdf) < 1e-13, "ln Φ({tau})");
            assert!(rel(inverse_mills(tau), mills) < 1e-12, "R({tau})");
        }
    }

    #[test]
    fn tail_switch_is_continuous() {
        let eps = 1e-12;
        let below = log_normal_cdf(TAIL_CUTOFF - eps);
        let above = log_normal_cdf(TAIL_CUTOFF + eps);
        assert!(rel(below, above) < 1e-12);
        let below = inverse_mills(TAIL_CUTOFF - eps);
        let above = inverse_mills(TAIL_CUTOFF + eps);
        assert!(rel(below, above) < 1e-12);
        let below = mills_curvature(TAIL_CUTOFF - eps);
        let above = mills_curvature(TAIL_CUTOFF + eps);
        assert!(rel(below, above) < 1e-9);
    }

    #[test]
    fn far_tail_stays_finite() {
        for tau in [-1e3, -1e6, -1e150] {
            assert!(log_normal_cdf(tau).is_finite());
            assert!(inverse_mills(tau).is_finite());
            let c = mills_curvature(tau);
            assert!(c > 0.0 && c <= 1.0, "curvature {c} at {tau}");
        }
        assert_eq!(log_normal_cdf(50.0), 0.0);
        assert_eq!(inverse_mills(50.0), 0.0);
    }

    #[test]
    fn mills_at_zero() {
        assert!(rel(inverse_mills(0.0), SQRT_2_OVER_PI) < 1e-15);
        assert!(rel(mills_curvature(0.0), 2.0 / std::f64::consts::PI) < 1e-15);
    }

    #[test]
    fn logistic_and_log_add_exp() {
        assert_eq!(logistic(0.0), 0.5);
        assert_eq!(logistic(-800.0), 0.0);
        assert_eq!(logistic(800.0), 1.0);
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-16);
        assert_eq!(log_add_exp(700.0, f64::NEG_INFINITY), 700.0);
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
