//! Seeded generation of signals, measurement vectors and channel outputs.
//!
//! Every trial owns a [`TrialRng`]: ChaCha8 keyed by the 64-bit base seed, with
//! the ChaCha stream number set to `(n << 32) | trial`. Trials are therefore
//! reproducible individually and independent of execution order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{ChannelModel, Likelihood};
use crate::recovery_engine::MeasurementRecord;
use crate::scalar_prior::SparsePrior;
use crate::{Error, Result};

/// Random stream of one trial.
#[derive(Debug, Clone)]
pub struct TrialRng(ChaCha8Rng);

impl TrialRng {
    /// Stream number used for trial `trial` at dimension `n`.
    pub fn stream_id(n: u64, trial: u64) -> u64 {
        (n << 32) | (trial & 0xffff_ffff)
    }

    pub fn from_stream(base_seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
        rng.set_stream(stream);
        Self(rng)
    }

    pub fn for_trial(base_seed: u64, n: u64, trial: u64) -> Self {
        Self::from_stream(base_seed, Self::stream_id(n, trial))
    }
}

impl RngCore for TrialRng {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Ground-truth signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalInstance {
    pub x0: Vec<f64>,
    pub support_count: usize,
}

/// Each component is 0 with probability `1 − ρ`, otherwise `N(0, σ²)`.
pub fn draw_signal<R: Rng + ?Sized>(n: usize, prior: &SparsePrior, rng: &mut R) -> SignalInstance {
    draw_bernoulli_gaussian(n, prior.rho(), prior.sigma2(), rng)
}

/// [`draw_signal`] without prior validation; `rho` may be 0 or 1 here.
pub fn draw_bernoulli_gaussian<R: Rng + ?Sized>(
    n: usize,
    rho: f64,
    sigma2: f64,
    rng: &mut R,
) -> SignalInstance {
    let sd = sigma2.sqrt();
    let mut support_count = 0;
    let x0 = (0..n)
        .map(|_| {
            if rng.random::<f64>() < rho {
                support_count += 1;
                let z: f64 = rng.sample(StandardNormal);
                sd * z
            } else {
                0.0
            }
        })
        .collect();
    SignalInstance { x0, support_count }
}

/// Fills `phi` with i.i.d. `N(0, 1/len)` entries.
pub fn fill_measurement_vector<R: Rng + ?Sized>(phi: &mut [f64], rng: &mut R) {
    let scale = 1.0 / (phi.len() as f64).sqrt();
    for p in phi.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *p = scale * z;
    }
}

pub fn draw_measurement_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut phi = vec![0.0; n];
    fill_measurement_vector(&mut phi, rng);
    phi
}

/// `y ~ P(y | Φ·x0)`.
pub fn sample_measurement<R: Rng + ?Sized>(
    phi: &[f64],
    x0: &[f64],
    channel: &ChannelModel,
    rng: &mut R,
) -> Result<f64> {
    if phi.len() != x0.len() {
        return Err(Error::DimensionMismatch {
            expected: x0.len(),
            got: phi.len(),
        });
    }
    let u: f64 = phi.iter().zip(x0).map(|(p, x)| p * x).sum();
    Ok(channel.sample_output(u, rng))
}

pub fn make_record<R: Rng + ?Sized>(
    phi: Vec<f64>,
    x0: &[f64],
    channel: &ChannelModel,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let y = sample_measurement(&phi, x0, channel, rng)?;
    Ok(MeasurementRecord { phi, y })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn empty_prior_gives_zero_signal() {
        let mut rng = TrialRng::for_trial(1, 100, 0);
        let s = draw_bernoulli_gaussian(100, 0.0, 1.0, &mut rng);
        assert_eq!(s.support_count, 0);
        assert!(s.x0.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn support_fraction_concentrates() {
        let n = 100_000;
        let prior = SparsePrior::new(0.1, 1.0).unwrap();
        let mut rng = TrialRng::for_trial(2, n as u64, 0);
        let s = draw_signal(n, &prior, &mut rng);
        let frac = s.support_count as f64 / n as f64;
        assert!((frac - 0.1).abs() < 3.0 * (0.1f64 * 0.9 / n as f64).sqrt());
        assert_eq!(s.support_count, s.x0.iter().filter(|&&x| x != 0.0).count());

        let squares: Vec<f64> = s.x0.iter().filter(|&&x| x != 0.0).map(|x| x * x).collect();
        let (m, se) = mean_and_se(&squares);
        assert!((m - 1.0).abs() < 3.0 * se, "{m} ± {se}");
    }

    #[test]
    fn measurement_vector_moments() {
        let n = 1000;
        let mut rng = TrialRng::for_trial(3, n as u64, 0);
        let mut entries = Vec::with_capacity(n * n);
        let mut norms = Vec::new();
        for _ in 0..1000 {
            let phi = draw_measurement_vector(n, &mut rng);
            norms.push(phi.iter().map(|p| p * p).sum::<f64>());
            entries.extend(phi);
        }
        let (mean, se) = mean_and_se(&entries);
        assert!(mean.abs() < 3.0 * se);
        let squares: Vec<f64> = entries.iter().map(|p| p * p).collect();
        let (var, se_var) = mean_and_se(&squares);
        assert!((var - 1.0 / n as f64).abs() < 3.0 * se_var);
        assert!(norms.iter().all(|&r| (r - 1.0).abs() < 0.3));
    }

    #[test]
    fn records() {
        let mut rng = TrialRng::for_trial(4, 5, 0);
        let awgn = ChannelModel::awgn(0.0).unwrap();
        let rec = make_record(vec![0.1; 5], &[0.0; 5], &awgn, &mut rng).unwrap();
        assert_eq!(rec.y, 0.0);
        let rec = make_record(vec![0.5, 0.0, 0.0], &[2.0, 7.0, -3.0], &awgn, &mut rng).unwrap();
        assert_eq!(rec.y, 1.0);
        assert!(make_record(vec![1.0; 2], &[0.0; 3], &awgn, &mut rng).is_err());

        let one_bit = ChannelModel::one_bit(1.0).unwrap();
        let trials = 20_000;
        let plus = (0..trials)
            .filter(|_| sample_measurement(&[0.3; 4], &[0.0; 4], &one_bit, &mut rng).unwrap() > 0.0)
            .count();
        let p = plus as f64 / trials as f64;
        assert!((p - 0.5).abs() < 3.0 * (0.25 / trials as f64).sqrt());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, n, k| draw_measurement_vector(16, &mut TrialRng::for_trial(seed, n, k));
        assert_eq!(draw(7, 200, 3), draw(7, 200, 3));
        assert_ne!(draw(7, 200, 3), draw(7, 200, 4));
        assert_ne!(draw(7, 200, 3), draw(7, 500, 3));
        assert_ne!(draw(7, 200, 3), draw(8, 200, 3));
        assert_eq!(TrialRng::stream_id(200, 3), (200 << 32) | 3);
    }
}
