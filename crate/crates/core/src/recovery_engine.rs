//! The online recovery algorithm.
//!
//! Each component keeps natural parameters `(a_i, h_i)` of a tilted prior and the
//! posterior mean/variance `(m_i, v_i)` they imply. A measurement `(Φ, y)` is
//! absorbed by computing the predicted mean `Δ = Σ Φ_i m_i` and variance
//! `χ = Σ Φ_i² v_i` of `Φ·x`, evaluating the channel's smoothed evidence at
//! `(y, Δ, χ)`, and moving every `(a_i, h_i)` by
//!
//! ```text
//! a_i ← a_i − Φ_i² g2
//! h_i ← h_i + Φ_i g1 − m_i Φ_i² g2
//! ```
//!
//! with the pre-update `m_i`. The work is `Θ(N)` and the record is not retained.

use crate::channel::{ChannelModel, Likelihood};
use crate::scalar_prior::SparsePrior;
use crate::{Error, Result};

/// One measurement vector and its channel output.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub phi: Vec<f64>,
    pub y: f64,
}

impl MeasurementRecord {
    pub fn new(phi: Vec<f64>, y: f64) -> Self {
        Self { phi, y }
    }
}

/// Streaming recovery state for an `N`-dimensional signal.
///
/// Not `Sync`-shared by design of its API: `update` takes `&mut self`.
#[derive(Debug, Clone)]
pub struct RecoveryEngine<L = ChannelModel> {
    prior: SparsePrior,
    channel: L,
    a: Vec<f64>,
    h: Vec<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    #[inline(always)]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

impl<L: Likelihood> RecoveryEngine<L> {
    /// Fresh engine whose factorized posterior equals the prior.
    pub fn new(n: usize, prior: SparsePrior, channel: L) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("signal dimension must be >= 1"));
        }
        let q0 = prior.second_moment();
        Ok(Self {
            prior,
            channel,
            a: vec![0.0; n],
            h: vec![0.0; n],
            m: vec![0.0; n],
            v: vec![q0; n],
            t: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// Number of measurements absorbed so far.
    pub fn measurements_seen(&self) -> u64 {
        self.t
    }

    pub fn prior(&self) -> &SparsePrior {
        &self.prior
    }

    pub fn channel(&self) -> &L {
        &self.channel
    }

    pub fn precisions(&self) -> &[f64] {
        &self.a
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    pub fn means(&self) -> &[f64] {
        &self.m
    }

    pub fn variances(&self) -> &[f64] {
        &self.v
    }

    /// Cavity mean and variance `(Δ, χ)` of `Φ·x` under the current posterior.
    pub fn cavity(&self, phi: &[f64]) -> Result<(f64, f64)> {
        if phi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: phi.len(),
            });
        }
        let mut delta = KahanSum::default();
        let mut chi = KahanSum::default();
        for ((&p, &m), &v) in phi.iter().zip(&self.m).zip(&self.v) {
            delta.add(p * m);
            chi.add(p * p * v);
        }
        Ok((delta.value(), chi.value()))
    }

    /// Absorbs one measurement.
    ///
    /// On error the state is left untouched, except when the refreshed moments
    /// turn non-finite, which is reported as [`Error::Numerical`] after the fact.
    pub fn update(&mut self, phi: &[f64], y: f64) -> Result<()> {
        let (delta, chi) = self.cavity(phi)?;
        if !delta.is_finite() {
            return Err(Error::Numerical(format!("cavity mean is not finite ({delta})")));
        }
        if !(chi >= 0.0) {
            return Err(Error::Numerical(format!("cavity variance is negative ({chi})")));
        }
        let ev = self.channel.smoothed_evidence(y, delta, chi)?;
        let (g1, g2) = (ev.g1, ev.g2);
        if !g1.is_finite() || !g2.is_finite() {
            return Err(Error::Numerical(format!(
                "channel derivatives not finite: g1={g1}, g2={g2}"
            )));
        }

        let prior = self.prior;
        let mut finite = true;
        for (((&p, a), h), (m, v)) in phi
            .iter()
            .zip(self.a.iter_mut())
            .zip(self.h.iter_mut())
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            let p2g2 = p * p * g2;
            *a -= p2g2;
            *h += p * g1 - *m * p2g2;
            let (mi, vi) = prior.posterior_mean_var(*a, *h);
            *m = mi;
            *v = vi;
            finite &= mi.is_finite() & vi.is_finite();
        }
        self.t += 1;
        if !finite {
            return Err(Error::Numerical(format!(
                "posterior moments diverged at measurement {}",
                self.t
            )));
        }
        Ok(())
    }

    pub fn absorb(&mut self, record: &MeasurementRecord) -> Result<()> {
        self.update(&record.phi, record.y)
    }

    /// Current posterior-mean estimate of the signal.
    pub fn estimate(&self) -> Vec<f64> {
        self.m.clone()
    }

    /// `N⁻¹ Σ (m_i − x_i)²`.
    pub fn mse_against(&self, truth: &[f64]) -> Result<f64> {
        mse_against(&self.m, truth)
    }
}

/// `N⁻¹ ‖estimate − truth‖²`.
pub fn mse_against(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: estimate.len(),
            got: truth.len(),
        });
    }
    let mut acc = KahanSum::default();
    for (&e, &x) in estimate.iter().zip(truth) {
        let d = e - x;
        acc.add(d * d);
    }
    Ok(acc.value() / estimate.len() as f64)
}
