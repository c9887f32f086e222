use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::recovery_engine::RecoveryEngine;
use crate::synthesis::{draw_signal, fill_measurement_vector, sample_measurement, TrialRng};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Ok,
    /// The engine rejected an update; the trial's later checkpoints carry no mse.
    Failed,
}

impl std::fmt::Display for TrialStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TrialStatus::Ok => "ok",
            TrialStatus::Failed => "failed",
        })
    }
}

/// One checkpoint of one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub n: usize,
    pub alpha: f64,
    pub trial: u64,
    pub seed: u64,
    /// `NaN` when the trial failed before this checkpoint.
    pub mse: f64,
    pub status: TrialStatus,
}

/// Aggregate over the successful trials of one `(N, α)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellStats {
    pub n: usize,
    pub alpha: f64,
    pub mse_mean: f64,
    /// Sample standard deviation over `√trials_ok`; `NaN` with fewer than two trials.
    pub mse_stderr: f64,
    pub trials_ok: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Ordered by `n` (config order), then trial, then `alpha`.
    pub rows: Vec<TrialRow>,
    /// Ordered by `n` (config order), then `alpha`.
    pub cells: Vec<CellStats>,
}

impl SweepResult {
    /// Number of `(N, trial)` pairs with at least one failed checkpoint.
    pub fn failed_trials(&self) -> usize {
        let mut failed: Vec<(usize, u64)> = self
            .rows
            .iter()
            .filter(|r| r.status == TrialStatus::Failed)
            .map(|r| (r.n, r.trial))
            .collect();
        failed.dedup();
        failed.len()
    }

    pub fn cell(&self, n: usize, alpha: f64) -> Option<&CellStats> {
        self.cells.iter().find(|c| c.n == n && c.alpha == alpha)
    }
}

/// Measurement count at which the checkpoint `alpha` is recorded.
pub fn checkpoint_time(alpha: f64, n: usize) -> u64 {
    (alpha * n as f64).ceil() as u64
}

/// Runs one trial, returning one row per checkpoint of `config.alpha_grid`.
pub fn run_trial(config: &ExperimentConfig, n: usize, trial: u64) -> Vec<TrialRow> {
    let seed = TrialRng::stream_id(n as u64, trial);
    let mut rng = TrialRng::from_stream(config.base_seed, seed);
    let row = |alpha, mse, status| TrialRow {
        n,
        alpha,
        trial,
        seed,
        mse,
        status,
    };

    let outcome = (|| -> Result<Vec<f64>> {
        let signal = draw_signal(n, &config.prior, &mut rng);
        let mut engine = RecoveryEngine::new(n, config.prior, config.channel)?;
        let mut phi = vec![0.0; n];
        let mut results = Vec::with_capacity(config.alpha_grid.len());
        let mut t = 0;
        for &alpha in &config.alpha_grid {
            let target = checkpoint_time(alpha, n);
            while t < target {
                fill_measurement_vector(&mut phi, &mut rng);
                let y = sample_measurement(&phi, &signal.x0, &config.channel, &mut rng)?;
                if engine.update(&phi, y).is_err() {
                    return Ok(results);
                }
                t += 1;
            }
            results.push(engine.mse_against(&signal.x0)?);
        }
        Ok(results)
    })();

    let mses = outcome.unwrap_or_default();
    config
        .alpha_grid
        .iter()
        .enumerate()
        .map(|(k, &alpha)| match mses.get(k) {
            Some(&mse) if mse.is_finite() => row(alpha, mse, TrialStatus::Ok),
            _ => row(alpha, f64::NAN, TrialStatus::Failed),
        })
        .collect()
}

/// Runs every `(N, trial)` pair on the current rayon pool and aggregates in a
/// fixed order, so the result is bit-identical for any thread count.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let jobs: Vec<(usize, u64)> = config
        .n_list
        .iter()
        .flat_map(|&n| (0..config.trials as u64).map(move |k| (n, k)))
        .collect();
    let per_trial: Vec<Vec<TrialRow>> = jobs.par_iter().map(|&(n, k)| run_trial(config, n, k)).collect();
    let rows: Vec<TrialRow> = per_trial.into_iter().flatten().collect();

    let n_alpha = config.alpha_grid.len();
    let mut cells = Vec::with_capacity(config.n_list.len() * n_alpha);
    for (i, &n) in config.n_list.iter().enumerate() {
        let block = &rows[i * config.trials * n_alpha..(i + 1) * config.trials * n_alpha];
        for (j, &alpha) in config.alpha_grid.iter().enumerate() {
            let values: Vec<f64> = block
                .iter()
                .skip(j)
                .step_by(n_alpha)
                .filter(|r| r.status == TrialStatus::Ok)
                .map(|r| r.mse)
                .collect();
            cells.push(cell_stats(n, alpha, &values));
        }
    }
    Ok(SweepResult { rows, cells })
}

fn cell_stats(n: usize, alpha: f64, values: &[f64]) -> CellStats {
    let k = values.len();
    let mean = if k == 0 {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / k as f64
    };
    let stderr = if k < 2 {
        f64::NAN
    } else {
        let ss: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
        (ss / (k - 1) as f64 / k as f64).sqrt()
    };
    CellStats {
        n,
        alpha,
        mse_mean: mean,
        mse_stderr: stderr,
        trials_ok: k,
    }
}
