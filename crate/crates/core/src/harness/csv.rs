use std::fmt::Write;

use super::fit::Extrapolation;
use super::sweep::SweepResult;
use crate::state_evolution::SeCurve;

pub const RAW_HEADER: &str = "n,alpha,trial,seed,mse,status";
pub const AGGREGATES_HEADER: &str = "n,alpha,mse_mean,mse_stderr,trials_ok";
pub const THEORY_HEADER: &str = "alpha,q_hat,q,mse,method";
pub const EXTRAPOLATION_HEADER: &str = "alpha,c0,c1,c2,resid";

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

pub fn raw_csv(result: &SweepResult) -> String {
    let mut out = format!("{RAW_HEADER}\n");
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            format_float(r.alpha),
            r.trial,
            r.seed,
            format_float(r.mse),
            r.status
        );
    }
    out
}

pub fn aggregates_csv(result: &SweepResult) -> String {
    let mut out = format!("{AGGREGATES_HEADER}\n");
    for c in &result.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.n,
            format_float(c.alpha),
            format_float(c.mse_mean),
            format_float(c.mse_stderr),
            c.trials_ok
        );
    }
    out
}

pub fn theory_csv(curves: &[&SeCurve]) -> String {
    let mut out = format!("{THEORY_HEADER}\n");
    for curve in curves {
        for p in &curve.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                format_float(p.alpha),
                format_float(p.q_hat),
                format_float(p.q),
                format_float(p.mse),
                curve.method
            );
        }
    }
    out
}

pub fn extrapolation_csv(rows: &[(f64, Extrapolation)]) -> String {
    let mut out = format!("{EXTRAPOLATION_HEADER}\n");
    for (alpha, e) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_float(*alpha),
            format_float(e.c0),
            format_float(e.c1),
            format_float(e.c2),
            format_float(e.resid)
        );
    }
    out
}
