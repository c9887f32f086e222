//! Reproducible Monte Carlo experiments and their theory overlays.
//!
//! A sweep runs `trials` independent recoveries for every dimension in
//! `n_list`, recording the mse at each checkpoint `t = ⌈αN⌉`. Trials own their
//! random streams ([`crate::TrialRng`]), so results do not depend on how the
//! work is scheduled across threads.

mod config;
mod csv;
mod fit;
mod report;
mod sweep;

pub use config::ExperimentConfig;
pub use csv::{
    aggregates_csv, extrapolation_csv, format_float, raw_csv, theory_csv, AGGREGATES_HEADER,
    EXTRAPOLATION_HEADER, RAW_HEADER, THEORY_HEADER,
};
pub use fit::{extrapolate_n, fit_asymptote, AsymptoteFit, AsymptoticLaw, Extrapolation};
pub use report::{
    bias_diagnostic, compare, theory_curves, BiasFlag, CellComparison, CompareReport, TheoryCurves,
    AGGREGATES_FILE, EXTRAPOLATION_FILE, RAW_FILE, REPORT_FILE, THEORY_FILE,
};
pub use sweep::{checkpoint_time, run_sweep, run_trial, CellStats, SweepResult, TrialRow, TrialStatus};
