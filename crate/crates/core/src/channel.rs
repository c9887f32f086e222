//! Measurement channels `P(y | u)`.
//!
//! The recovery engine never touches `P` directly. It only needs the
//! Gaussian-smoothed log evidence `G(y, Δ, χ) = ln ∫ Dz P(y | Δ + √χ z)` and its
//! first two `Δ`-derivatives, which [`Likelihood::smoothed_evidence`] provides.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::special::{inverse_mills, log_normal_cdf, mills_curvature, HALF_LN_2PI};
use crate::{Error, Result};

/// `G = ln ∫ Dz P(y | Δ + √χ z)` with `g1 = ∂G/∂Δ`, `g2 = ∂²G/∂Δ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedEvidence {
    pub log_l: f64,
    pub g1: f64,
    pub g2: f64,
}

/// What a measurement model must provide to drive the online update.
pub trait Likelihood {
    fn smoothed_evidence(&self, y: f64, delta: f64, chi: f64) -> Result<SmoothedEvidence>;

    /// Draws `y ~ P(y | u)`.
    fn sample_output<R: Rng + ?Sized>(&self, u: f64, rng: &mut R) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    /// `y = u + N(0, σ_n²)`
    Awgn,
    /// `y = sign(u + N(0, σ_n²))`
    OneBit,
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "awgn" => Ok(ChannelKind::Awgn),
            "one_bit" | "one-bit" | "1bit" => Ok(ChannelKind::OneBit),
            other => Err(Error::config(format!("unknown channel kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChannelKind::Awgn => "awgn",
            ChannelKind::OneBit => "one_bit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel")]
pub struct ChannelModel {
    pub kind: ChannelKind,
    pub noise_var: f64,
}

#[derive(Deserialize)]
struct RawChannel {
    kind: ChannelKind,
    noise_var: f64,
}

impl TryFrom<RawChannel> for ChannelModel {
    type Error = Error;

    fn try_from(raw: RawChannel) -> Result<Self> {
        ChannelModel::new(raw.kind, raw.noise_var)
    }
}

impl ChannelModel {
    pub fn new(kind: ChannelKind, noise_var: f64) -> Result<Self> {
        if !(noise_var >= 0.0 && noise_var.is_finite()) {
            return Err(Error::domain(format!(
                "noise variance must be finite and >= 0, got {noise_var}"
            )));
        }
        Ok(Self { kind, noise_var })
    }

    pub fn awgn(noise_var: f64) -> Result<Self> {
        Self::new(ChannelKind::Awgn, noise_var)
    }

    pub fn one_bit(noise_var: f64) -> Result<Self> {
        Self::new(ChannelKind::OneBit, noise_var)
    }

    pub fn is_noiseless(&self) -> bool {
        self.noise_var == 0.0
    }

    /// Output alphabet for discrete channels; `None` for continuous outputs.
    pub fn discrete_outputs(&self) -> Option<&'static [f64]> {
        match self.kind {
            ChannelKind::Awgn => None,
            ChannelKind::OneBit => Some(&[1.0, -1.0]),
        }
    }
}

impl Likelihood for ChannelModel {
    fn smoothed_evidence(&self, y: f64, delta: f64, chi: f64) -> Result<SmoothedEvidence> {
        if !(chi >= 0.0) || !chi.is_finite() {
            return Err(Error::domain(format!(
                "cavity variance must be finite and >= 0, got {chi}"
            )));
        }
        if !delta.is_finite() || !y.is_finite() {
            return Err(Error::domain(format!("non-finite input: y={y}, delta={delta}")));
        }
        let c = self.noise_var + chi;
        if c == 0.0 {
            return Err(Error::DegenerateVariance);
        }
        match self.kind {
            ChannelKind::Awgn => {
                let r = y - delta;
                Ok(SmoothedEvidence {
                    log_l: -0.5 * c.ln() - HALF_LN_2PI - 0.5 * r * r / c,
                    g1: r / c,
                    g2: -1.0 / c,
                })
            }
            ChannelKind::OneBit => {
                if y != 1.0 && y != -1.0 {
                    return Err(Error::domain(format!("one-bit output must be +1 or -1, got {y}")));
                }
                let sd = c.sqrt();
                let tau = y * delta / sd;
                Ok(SmoothedEvidence {
                    log_l: log_normal_cdf(tau),
                    g1: y * inverse_mills(tau) / sd,
                    g2: -mills_curvature(tau) / c,
                })
            }
        }
    }

    fn sample_output<R: Rng + ?Sized>(&self, u: f64, rng: &mut R) -> f64 {
        let noisy = if self.noise_var > 0.0 {
            let xi: f64 = rng.sample(StandardNormal);
            u + self.noise_var.sqrt() * xi
        } else {
            u
        };
        match self.kind {
            ChannelKind::Awgn => noisy,
            ChannelKind::OneBit => {
                if noisy >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}
