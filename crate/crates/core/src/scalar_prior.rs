//! Bernoulli–Gaussian signal prior and its Gaussian-tilted posterior moments.
//!
//! A component with natural parameters `(a, h)` has the density
//! `e^{-a x²/2 + h x} φ(x) / Z(a, h)` where `φ(x) = (1-ρ) δ(x) + ρ N(x; 0, σ²)`.
//! The slab integral is Gaussian, so `Z` and its `h`-derivatives are closed form.

use serde::{Deserialize, Serialize};

use crate::special::{log_add_exp, logistic};
use crate::{Error, Result};

/// `φ(x) = (1-ρ) δ(x) + ρ N(x; 0, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PriorParams", into = "PriorParams")]
pub struct SparsePrior {
    rho: f64,
    sigma2: f64,
    ln_rho: f64,
    ln_one_minus_rho: f64,
}

#[derive(Serialize, Deserialize)]
struct PriorParams {
    rho: f64,
    sigma2: f64,
}

impl TryFrom<PriorParams> for SparsePrior {
    type Error = Error;

    fn try_from(p: PriorParams) -> Result<Self> {
        SparsePrior::new(p.rho, p.sigma2)
    }
}

impl From<SparsePrior> for PriorParams {
    fn from(p: SparsePrior) -> Self {
        PriorParams {
            rho: p.rho,
            sigma2: p.sigma2,
        }
    }
}

/// Posterior statistics of one component under a Gaussian tilt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedMoments {
    /// `ln Z(a, h)`
    pub log_z: f64,
    pub mean: f64,
    pub variance: f64,
    /// Posterior probability that the component is nonzero.
    pub nonzero_prob: f64,
}

impl SparsePrior {
    pub fn new(rho: f64, sigma2: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::domain(format!("rho must lie in (0, 1), got {rho}")));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::domain(format!(
                "sigma2 must be positive and finite, got {sigma2}"
            )));
        }
        Ok(Self {
            rho,
            sigma2,
            ln_rho: rho.ln(),
            ln_one_minus_rho: (-rho).ln_1p(),
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `Q0 = ∫ dx φ(x) x² = ρ σ²`.
    pub fn second_moment(&self) -> f64 {
        self.rho * self.sigma2
    }

    /// Log-odds of slab versus spike, the slab mean and the slab variance.
    #[inline]
    fn slab_terms(&self, a: f64, h: f64) -> (f64, f64, f64) {
        let a_s2 = a * self.sigma2;
        let s = self.sigma2 / (1.0 + a_s2);
        let mu = h * s;
        let log_odds = self.ln_rho - self.ln_one_minus_rho - 0.5 * a_s2.ln_1p() + 0.5 * h * mu;
        (log_odds, mu, s)
    }

    /// Posterior mean and variance without `ln Z`; the engine's per-component refresh.
    ///
    /// Callers must guarantee `a ≥ 0` and finite `(a, h)`.
    #[inline]
    pub fn posterior_mean_var(&self, a: f64, h: f64) -> (f64, f64) {
        let (log_odds, mu, s) = self.slab_terms(a, h);
        let w = logistic(log_odds);
        // w(s + μ²) - (wμ)² rearranged to avoid cancellation
        (w * mu, w * s + w * (1.0 - w) * mu * mu)
    }

    /// Log partition, mean, variance and slab probability of the tilted prior.
    pub fn tilted_moments(&self, a: f64, h: f64) -> Result<TiltedMoments> {
        if !a.is_finite() || !h.is_finite() {
            return Err(Error::domain(format!(
                "tilt parameters must be finite, got a={a}, h={h}"
            )));
        }
        if a < 0.0 {
            return Err(Error::domain(format!("precision tilt must be >= 0, got {a}")));
        }
        let (log_odds, mu, s) = self.slab_terms(a, h);
        let w = logistic(log_odds);
        let log_slab = log_odds + self.ln_one_minus_rho;
        Ok(TiltedMoments {
            log_z: log_add_exp(log_slab, self.ln_one_minus_rho),
            mean: w * mu,
            variance: w * s + w * (1.0 - w) * mu * mu,
            nonzero_prob: w,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use proptest::prelude::*;

    fn prior(rho: f64, sigma2: f64) -> SparsePrior {
        SparsePrior::new(rho, sigma2).unwrap()
    }

    #[test]
    fn untilted_prior_moments() {
        let m = prior(0.1, 1.0).tilted_moments(0.0, 0.0).unwrap();
        assert!(m.log_z.abs() < 1e-16);
        assert_eq!(m.mean, 0.0);
        assert!((m.variance - 0.1).abs() < 1e-16);
        assert!((m.nonzero_prob - 0.1).abs() < 1e-16);
    }

    #[test]
    fn infinite_precision_collapses_slab() {
        let p = prior(0.1, 1.0);
        for h in [-3.0, 0.0, 0.5, 4.0] {
            let m = p.tilted_moments(1e12, h).unwrap();
            assert!(m.mean.abs() < 1e-11, "mean {} at h={h}", m.mean);
            assert!(m.variance < 1e-12);
        }
    }

    #[test]
    fn matches_quadrature_oracle() {
        let p = prior(0.1, 1.0);
        let m = p.tilted_moments(2.0, 1.5).unwrap();
        let o = oracle::tilted_moments_by_quadrature(0.1, 1.0, 2.0, 1.5);
        assert!(oracle::rel_err(m.log_z, o.log_z) < 1e-8);
        assert!(oracle::rel_err(m.mean, o.mean) < 1e-8);
        assert!(oracle::rel_err(m.variance, o.variance) < 1e-8);
    }

    #[test]
    fn second_moment_examples() {
        assert_eq!(prior(0.1, 1.0).second_moment(), 0.1);
        assert_eq!(prior(0.5, 2.0).second_moment(), 1.0);
        assert!(prior(1e-300, 1.0).second_moment() < 1e-299);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SparsePrior::new(0.0, 1.0).is_err());
        assert!(SparsePrior::new(1.0, 1.0).is_err());
        assert!(SparsePrior::new(0.5, 0.0).is_err());
        assert!(SparsePrior::new(f64::NAN, 1.0).is_err());
        let p = prior(0.1, 1.0);
        assert!(matches!(p.tilted_moments(-1e-9, 0.0), Err(Error::Domain(_))));
        assert!(p.tilted_moments(f64::INFINITY, 0.0).is_err());
        assert!(p.tilted_moments(1.0, f64::NAN).is_err());
    }

    #[test]
    fn huge_field_does_not_overflow() {
        let p = prior(0.1, 1.0);
        let m = p.tilted_moments(0.0, 1e4).unwrap();
        assert!(m.log_z.is_finite());
        assert_eq!(m.nonzero_prob, 1.0);
        assert!((m.mean - 1e4).abs() < 1e-9);
        assert!((m.variance - 1.0).abs() < 1e-12);
    }

    #[test]
    fn serde_validates() {
        let p: SparsePrior = serde_json::from_str(r#"{"rho":0.1,"sigma2":1.0}"#).unwrap();
        assert_eq!(p, prior(0.1, 1.0));
        assert!(serde_json::from_str::<SparsePrior>(r#"{"rho":1.5,"sigma2":1.0}"#).is_err());
    }

    proptest! {
        #[test]
        fn parity_in_field(rho in 0.01f64..0.99, sigma2 in 0.1f64..10.0, a in 0.0f64..1e3, h in 0.0f64..30.0) {
            let p = prior(rho, sigma2);
            let plus = p.tilted_moments(a, h).unwrap();
            let minus = p.tilted_moments(a, -h).unwrap();
            prop_assert_eq!(plus.mean, -minus.mean);
            prop_assert_eq!(plus.variance, minus.variance);
            prop_assert_eq!(plus.log_z, minus.log_z);
        }

        #[test]
        fn mean_is_monotone_in_field(rho in 0.01f64..0.99, a in 0.0f64..1e3, h in -30.0f64..30.0) {
            let p = prior(rho, 1.0);
            let m = p.tilted_moments(a, h).unwrap();
            prop_assert!(m.variance >= 0.0);
            prop_assert!((0.0..=1.0).contains(&m.nonzero_prob));
            let (d, _) = oracle::ridders(|x| p.tilted_moments(a, x).unwrap().mean, h, 0.1);
            prop_assert!(d >= -1e-12);
            prop_assert!((d - m.variance).abs() <= 1e-6 * m.variance.max(1e-300) + 1e-13);
        }

        #[test]
        fn fast_path_agrees(rho in 0.01f64..0.99, a in 0.0f64..1e4, h in -50.0f64..50.0) {
            let p = prior(rho, 1.0);
            let full = p.tilted_moments(a, h).unwrap();
            let (m, v) = p.posterior_mean_var(a, h);
            prop_assert_eq!(m, full.mean);
            prop_assert_eq!(v, full.variance);
        }
    }
}
