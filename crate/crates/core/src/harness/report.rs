use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::csv::{aggregates_csv, extrapolation_csv, raw_csv, theory_csv};
use super::fit::{extrapolate_n, Extrapolation};
use super::sweep::{run_sweep, CellStats, SweepResult};
use crate::state_evolution::{OfflineSolution, SeCurve, StateEvolution};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct TheoryCurves {
    pub online: SeCurve,
    pub offline: SeCurve,
    pub offline_solutions: Vec<OfflineSolution>,
}

/// Online ODE and offline fixed-point curves on the configured grid.
pub fn theory_curves(config: &ExperimentConfig) -> Result<TheoryCurves> {
    let se = StateEvolution::with_quad_order(config.prior, config.channel, config.quad_order)?;
    let online = se.integrate_online(&config.alpha_grid, config.ode_step)?;
    let (offline, offline_solutions) = se.offline_curve(&config.alpha_grid)?;
    Ok(TheoryCurves {
        online,
        offline,
        offline_solutions,
    })
}

/// A smaller `N` whose mean mse lies below the largest `N` by more than three
/// combined standard errors, contrary to the expected finite-size bias.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasFlag {
    pub alpha: f64,
    pub n: usize,
    pub n_ref: usize,
    pub mse_mean: f64,
    pub mse_mean_ref: f64,
    pub z: f64,
}

pub fn bias_diagnostic(cells: &[CellStats]) -> Vec<BiasFlag> {
    let Some(n_max) = cells.iter().map(|c| c.n).max() else {
        return Vec::new();
    };
    let mut flags = Vec::new();
    for reference in cells.iter().filter(|c| c.n == n_max) {
        for c in cells.iter().filter(|c| c.alpha == reference.alpha && c.n < n_max) {
            let se = c.mse_stderr.hypot(reference.mse_stderr);
            let z = (c.mse_mean - reference.mse_mean) / se;
            if z < -3.0 {
                flags.push(BiasFlag {
                    alpha: c.alpha,
                    n: c.n,
                    n_ref: n_max,
                    mse_mean: c.mse_mean,
                    mse_mean_ref: reference.mse_mean,
                    z,
                });
            }
        }
    }
    flags
}

/// Monte Carlo cell against the online theory at the same `α`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellComparison {
    pub n: usize,
    pub alpha: f64,
    pub mse_mean: f64,
    pub mse_stderr: f64,
    pub theory_online: f64,
    /// `(mse_mean − theory) / mse_stderr`
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
struct ReportMetadata<'a> {
    config: &'a ExperimentConfig,
    extrapolation_variable: &'static str,
    failed_trials: usize,
    online_diverged_at: Option<f64>,
    cells: &'a [CellComparison],
    bias_flags: &'a [BiasFlag],
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub config: ExperimentConfig,
    pub sweep: SweepResult,
    pub theory: TheoryCurves,
    /// Per `α`, when at least three distinct `N` were run.
    pub extrapolations: Vec<(f64, Extrapolation)>,
    pub comparisons: Vec<CellComparison>,
    pub bias_flags: Vec<BiasFlag>,
}

pub const RAW_FILE: &str = "raw.csv";
pub const AGGREGATES_FILE: &str = "aggregates.csv";
pub const THEORY_FILE: &str = "theory.csv";
pub const EXTRAPOLATION_FILE: &str = "extrapolation.csv";
pub const REPORT_FILE: &str = "report.json";

impl CompareReport {
    pub fn report_json(&self) -> String {
        let meta = ReportMetadata {
            config: &self.config,
            extrapolation_variable: "1/N",
            failed_trials: self.sweep.failed_trials(),
            online_diverged_at: self.theory.online.diverged_at,
            cells: &self.comparisons,
            bias_flags: &self.bias_flags,
        };
        let mut text = serde_json::to_string_pretty(&meta).expect("report is serializable");
        text.push('\n');
        text
    }

    /// Writes the five output files into `dir`, returning their paths.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        fs::create_dir_all(dir).map_err(io_error(dir))?;
        let files = [
            (RAW_FILE, raw_csv(&self.sweep)),
            (AGGREGATES_FILE, aggregates_csv(&self.sweep)),
            (
                THEORY_FILE,
                theory_csv(&[&self.theory.online, &self.theory.offline]),
            ),
            (EXTRAPOLATION_FILE, extrapolation_csv(&self.extrapolations)),
            (REPORT_FILE, self.report_json()),
        ];
        let mut written = Vec::with_capacity(files.len());
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body).map_err(io_error(&path))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Config(format!("cannot write {}: {e}", path.display()))
}

/// Sweep, theory overlay, `N → ∞` extrapolation and bias diagnostic.
pub fn compare(config: &ExperimentConfig) -> Result<CompareReport> {
    config.validate()?;
    let sweep = run_sweep(config)?;
    let theory = theory_curves(config)?;

    let mut extrapolations = Vec::new();
    let mut distinct = config.n_list.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() >= 3 {
        for &alpha in &config.alpha_grid {
            let cells: Vec<(usize, f64)> = sweep
                .cells
                .iter()
                .filter(|c| c.alpha == alpha && c.mse_mean.is_finite())
                .map(|c| (c.n, c.mse_mean))
                .collect();
            if let Ok(e) = extrapolate_n(&cells) {
                extrapolations.push((alpha, e));
            }
        }
    }

    let comparisons = sweep
        .cells
        .iter()
        .filter_map(|c| {
            let theory_online = theory.online.mse_at(c.alpha)?;
            Some(CellComparison {
                n: c.n,
                alpha: c.alpha,
                mse_mean: c.mse_mean,
                mse_stderr: c.mse_stderr,
                theory_online,
                z: (c.mse_mean - theory_online) / c.mse_stderr,
            })
        })
        .collect();
    let bias_flags = bias_diagnostic(&sweep.cells);
    Ok(CompareReport {
        config: config.clone(),
        sweep,
        theory,
        extrapolations,
        comparisons,
        bias_flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ChannelModel, SparsePrior};

    fn cell(n: usize, alpha: f64, mean: f64, se: f64) -> CellStats {
        CellStats {
            n,
            alpha,
            mse_mean: mean,
            mse_stderr: se,
            trials_ok: 100,
        }
    }

    #[test]
    fn bias_flags_only_reversed_cells() {
        let cells = vec![
            cell(100, 1.0, 0.10, 0.001),
            cell(200, 1.0, 0.20, 0.001),
            cell(400, 1.0, 0.15, 0.001),
            cell(100, 2.0, 0.149, 0.001),
            cell(400, 2.0, 0.15, 0.001),
        ];
        let flags = bias_diagnostic(&cells);
        assert_eq!(flags.len(), 1);
        assert_eq!((flags[0].n, flags[0].alpha, flags[0].n_ref), (100, 1.0, 400));
        assert!(flags[0].z < -3.0);
    }

    #[test]
    fn compare_small_run() {
        let mut cfg = ExperimentConfig::new(
            SparsePrior::new(0.1, 1.0).unwrap(),
            ChannelModel::awgn(0.1).unwrap(),
        );
        cfg.n_list = vec![20, 40, 80];
        cfg.alpha_grid = vec![0.5, 1.0];
        cfg.trials = 4;
        let report = compare(&cfg).unwrap();
        assert_eq!(report.extrapolations.len(), 2);
        assert_eq!(report.comparisons.len(), 6);
        assert_eq!(report.theory.online.points.len(), 2);
        let dir = tempfile::tempdir().unwrap();
        let files = report.write_to(dir.path()).unwrap();
        assert_eq!(files.len(), 5);
        let theory = fs::read_to_string(dir.path().join(THEORY_FILE)).unwrap();
        assert!(theory.starts_with("alpha,q_hat,q,mse,method\n0.5,"));
        assert!(theory.contains(",offline_fixed_point\n"));
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap()).unwrap();
        assert_eq!(meta["extrapolation_variable"], "1/N");
    }
}
