//! Integration against the standard Gaussian measure `Dz = dz e^{-z²/2}/√(2π)`.
//!
//! [`GaussQuadRule`] is a Gauss–Hermite rule rescaled to the unit-variance
//! measure, good for smooth integrands. [`integrate_adaptive`] is an adaptive
//! Gauss–Kronrod (7/15) integrator for integrands with a sharp, localized
//! transition whose position is known, such as the spike/slab switch of the
//! denoiser at large signal-to-noise.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::{Error, Result};

pub const DEFAULT_ORDER: usize = 61;

/// Nodes and weights with `Σ w_k f(z_k) ≈ ∫ Dz f(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussQuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussQuadRule {
    /// Gauss–Hermite rule of the given order, roots found by Newton iteration on
    /// the orthonormal Hermite recurrence.
    pub fn hermite(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::domain("quadrature order must be >= 1"));
        }
        let n = order;
        let nf = n as f64;
        let mut x = vec![0.0f64; n];
        let mut w = vec![0.0f64; n];
        let half = n.div_ceil(2);
        let mut z = 0.0f64;
        for i in 0..half {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            let mut converged = false;
            for _ in 0..100 {
                let (p1, deriv) = hermite_orthonormal(n, z);
                pp = deriv;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    let (_, deriv) = hermite_orthonormal(n, z);
                    pp = deriv;
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Numerical(format!(
                    "Hermite root {i} of order {n} did not converge"
                )));
            }
            if n % 2 == 1 && i == half - 1 {
                z = 0.0;
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        // Physicists' rule integrates against e^{-x²}; rescale to the unit-variance measure.
        let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
        let nodes: Vec<f64> = x.iter().rev().map(|&xi| xi * std::f64::consts::SQRT_2).collect();
        let weights: Vec<f64> = w.iter().rev().map(|&wi| wi * inv_sqrt_pi).collect();
        Ok(Self { nodes, weights })
    }

    /// Shared default rule of order [`DEFAULT_ORDER`].
    pub fn default_rule() -> &'static GaussQuadRule {
        static RULE: OnceLock<GaussQuadRule> = OnceLock::new();
        RULE.get_or_init(|| GaussQuadRule::hermite(DEFAULT_ORDER).expect("default Hermite rule"))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ Dz f(z)`; errors if `f` is not finite at some node.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (&z, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(z);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { node: z });
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// Like [`expect`](Self::expect) for a fallible integrand.
    pub fn try_expect<F: FnMut(f64) -> Result<f64>>(&self, mut f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (&z, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(z)?;
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { node: z });
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// `∫ Du ∫ Dv f(u, v)` as a tensor product of this rule with itself.
    pub fn expect2<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (&u, &wu) in self.nodes.iter().zip(&self.weights) {
            for (&v, &wv) in self.nodes.iter().zip(&self.weights) {
                let val = f(u, v);
                if !val.is_finite() {
                    return Err(Error::NonFiniteIntegrand { node: u });
                }
                acc += wu * wv * val;
            }
        }
        Ok(acc)
    }
}

/// Value and derivative of the orthonormal Hermite function recurrence at `z`;
/// the derivative is scaled so that `2/deriv²` is the physicists' weight.
fn hermite_orthonormal(n: usize, z: f64) -> (f64, f64) {
    // π^{-1/4}
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut p1 = PIM4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    if !fc.is_finite() {
        return Err(Error::NonFiniteIntegrand { node: centre });
    }
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (centre - dx, centre + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(Error::NonFiniteIntegrand { node: x1 });
        }
        if !f2.is_finite() {
            return Err(Error::NonFiniteIntegrand { node: x2 });
        }
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

#[derive(Debug, PartialEq)]
struct Segment {
    err: f64,
    a: f64,
    b: f64,
    value: f64,
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive Gauss–Kronrod integration of `f` over the breakpoint-separated
/// pieces of `points` (which must be increasing). Bisects the worst segment until
/// the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    const MAX_SEGMENTS: usize = 4000;
    if points.len() < 2 || points.windows(2).any(|p| !(p[0] <= p[1])) {
        return Err(Error::domain("integration breakpoints must be increasing"));
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for p in points.windows(2) {
        if p[0] == p[1] {
            continue;
        }
        let (value, err) = gauss_kronrod(&mut f, p[0], p[1])?;
        total += value;
        total_err += err;
        heap.push(Segment {
            err,
            a: p[0],
            b: p[1],
            value,
        });
    }
    while total_err > abs_tol.max(rel_tol * total.abs()) && heap.len() < MAX_SEGMENTS {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (lv, le) = gauss_kronrod(&mut f, worst.a, mid)?;
        let (rv, re) = gauss_kronrod(&mut f, mid, worst.b)?;
        total += lv + rv - worst.value;
        total_err += le + re - worst.err;
        heap.push(Segment {
            err: le,
            a: worst.a,
            b: mid,
            value: lv,
        });
        heap.push(Segment {
            err: re,
            a: mid,
            b: worst.b,
            value: rv,
        });
    }
    // Re-sum from the segments to shed accumulated rounding in `total`.
    Ok(heap.iter().map(|s| s.value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn low_moments() {
        let rule = GaussQuadRule::default_rule();
        assert_eq!(rule.order(), 61);
        assert!((rule.expect(|_| 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(rule.expect(|z| z).unwrap().abs() < 1e-14);
        assert!((rule.expect(|z| z * z).unwrap() - 1.0).abs() < 1e-12);
        assert!(rule.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn characteristic_function() {
        for order in [20, 40, 61] {
            let rule = GaussQuadRule::hermite(order).unwrap();
            let v = rule.expect(f64::cos).unwrap();
            assert!((v - (-0.5f64).exp()).abs() < 1e-10, "order {order}: {v}");
        }
    }

    #[test]
    fn rules_are_symmetric() {
        for order in [1, 2, 7, 61, 80] {
            let rule = GaussQuadRule::hermite(order).unwrap();
            let (x, w) = (rule.nodes(), rule.weights());
            for k in 0..order {
                assert_eq!(x[k], -x[order - 1 - k]);
                assert_eq!(w[k], w[order - 1 - k]);
            }
            if order % 2 == 1 {
                assert_eq!(x[order / 2], 0.0);
            }
        }
    }

    #[test]
    fn doubling_order_is_stable_for_smooth_integrands() {
        let r1 = GaussQuadRule::hermite(61).unwrap();
        let r2 = GaussQuadRule::hermite(122).unwrap();
        for f in [
            |z: f64| (0.7 * z).cos(),
            |z: f64| 1.0 / (1.0 + 0.1 * z * z),
            |z: f64| (0.3 * z).exp(),
        ] {
            let a = r1.expect(f).unwrap();
            let b = r2.expect(f).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let rule = GaussQuadRule::hermite(5).unwrap();
        assert!(matches!(
            rule.expect(|z| 1.0 / z),
            Err(Error::NonFiniteIntegrand { .. })
        ));
        assert!(GaussQuadRule::hermite(0).is_err());
    }

    #[test]
    fn tensor_product() {
        let rule = GaussQuadRule::hermite(20).unwrap();
        let v = rule.expect2(|u, v| (u + v).powi(2)).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_sharp_transition() {
        // ∫_0^1 of a logistic step of width 1e-6 centred at 0.3 is 0.7
        let f = |x: f64| 1.0 / (1.0 + (-(x - 0.3) / 1e-6).exp());
        let v = integrate_adaptive(f, &[0.0, 0.3, 1.0], 1e-14, 1e-13).unwrap();
        assert!((v - 0.7).abs() < 1e-12, "{v}");
        let g = integrate_adaptive(|x: f64| (-0.5 * x * x).exp(), &[-14.0, 14.0], 0.0, 1e-14).unwrap();
        assert!((g - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-13);
        assert!(integrate_adaptive(|x| x, &[1.0, 0.0], 0.0, 1e-10).is_err());
    }

    proptest! {
        #[test]
        fn polynomial_exactness(order in 2usize..80, seed in 0u64..1000) {
            let rule = GaussQuadRule::hermite(order).unwrap();
            // Monomials up to degree 2n-1 have E[z^k] = (k-1)!! for even k, 0 for odd.
            let degree = (seed as usize) % (2 * order).min(30);
            let exact = if degree % 2 == 1 {
                0.0
            } else {
                (1..degree).step_by(2).map(|k| k as f64).product::<f64>()
            };
            let v = rule.expect(|z| z.powi(degree as i32)).unwrap();
            let scale = rule.expect(|z| z.abs().powi(degree as i32)).unwrap();
            prop_assert!((v - exact).abs() <= 1e-13 * scale.max(1.0), "deg {} got {} want {}", degree, v, exact);
        }
    }
}
