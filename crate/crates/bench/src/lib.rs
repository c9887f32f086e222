//! Fixtures shared by the benchmarks.

use onlinecs::synthesis::{draw_measurement_vector, draw_signal, sample_measurement};
use onlinecs::{ChannelModel, RecoveryEngine, SparsePrior, TrialRng};

/// A fresh engine plus a pool of measurements drawn from one planted signal.
pub struct Stream {
    pub engine: RecoveryEngine,
    pub records: Vec<(Vec<f64>, f64)>,
}

impl Stream {
    pub fn new(n: usize, channel: ChannelModel, pool: usize, seed: u64) -> Self {
        let prior = SparsePrior::new(0.1, 1.0).expect("valid prior");
        let mut rng = TrialRng::for_trial(seed, n as u64, 0);
        let x0 = draw_signal(n, &prior, &mut rng).x0;
        let records = (0..pool)
            .map(|_| {
                let phi = draw_measurement_vector(n, &mut rng);
                let y = sample_measurement(&phi, &x0, &channel, &mut rng).expect("matching dimensions");
                (phi, y)
            })
            .collect();
        let engine = RecoveryEngine::new(n, prior, channel).expect("valid engine");
        Self { engine, records }
    }

    /// Absorbs the `k`-th pooled record (cyclically).
    pub fn step(&mut self, k: usize) {
        let (phi, y) = &self.records[k % self.records.len()];
        self.engine.update(phi, *y).expect("finite update");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_cycles_through_pool() {
        let mut s = Stream::new(50, ChannelModel::one_bit(0.1).unwrap(), 3, 9);
        for k in 0..7 {
            s.step(k);
        }
        assert_eq!(s.engine.measurements_seen(), 7);
        assert!(s.engine.means().iter().all(|m| m.is_finite()));
    }
}
