use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::{Error, Result};

/// Quadratic fit `mse(N) = c0 + c1/N + c2/N²`; `c0` estimates the `N → ∞` limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolation {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Root-mean-square residual of the fit.
    pub resid: f64,
    pub n_points: usize,
}

/// Least-squares extrapolation of `(N, mse)` cells to `N → ∞`.
pub fn extrapolate_n(cells: &[(usize, f64)]) -> Result<Extrapolation> {
    let mut distinct: Vec<usize> = cells.iter().map(|c| c.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 distinct N, got {}",
            distinct.len()
        )));
    }
    if cells.iter().any(|&(n, m)| n == 0 || !m.is_finite()) {
        return Err(Error::Fit("cells must have N >= 1 and finite mse".into()));
    }
    // Work in u = N_min/N ∈ (0, 1] for conditioning, then rescale.
    let n_min = distinct[0] as f64;
    let design = DMatrix::from_fn(cells.len(), 3, |i, j| (n_min / cells[i].0 as f64).powi(j as i32));
    let rhs = DVector::from_iterator(cells.len(), cells.iter().map(|c| c.1));
    let svd = design.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    if svd.rank(1e-12 * s_max) < 3 {
        return Err(Error::Fit("rank-deficient extrapolation design".into()));
    }
    let coef = svd
        .solve(&rhs, 1e-12 * s_max)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let residual = &design * &coef - &rhs;
    Ok(Extrapolation {
        c0: coef[0],
        c1: coef[1] * n_min,
        c2: coef[2] * n_min * n_min,
        resid: (residual.norm_squared() / cells.len() as f64).sqrt(),
        n_points: cells.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticLaw {
    /// `mse = A/α²`
    Power2,
    /// `ln mse = b − r α`
    ExpRate,
    /// `mse = B/α`
    InverseAlpha,
}

impl std::str::FromStr for AsymptoticLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power2" => Ok(Self::Power2),
            "exp_rate" => Ok(Self::ExpRate),
            "inverse_alpha" => Ok(Self::InverseAlpha),
            other => Err(Error::config(format!("unknown law `{other}`"))),
        }
    }
}

impl std::fmt::Display for AsymptoticLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AsymptoticLaw::Power2 => "power2",
            AsymptoticLaw::ExpRate => "exp_rate",
            AsymptoticLaw::InverseAlpha => "inverse_alpha",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoteFit {
    pub law: AsymptoticLaw,
    /// `A`, `r` or `B` depending on the law.
    pub param: f64,
    /// Intercept `b` of the exponential fit; `NaN` otherwise.
    pub intercept: f64,
    /// RMS residual in `ln mse`.
    pub log_resid: f64,
    pub n_points: usize,
}

/// Fits `law` to the `(alpha, mse)` points with `alpha ∈ [lo, hi]`.
///
/// The power laws are fitted in log space, which makes `A` and `B` geometric
/// means of `α²·mse` and `α·mse` over the window.
pub fn fit_asymptote(points: &[(f64, f64)], law: AsymptoticLaw, window: (f64, f64)) -> Result<AsymptoteFit> {
    let tail: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(a, _)| a >= window.0 && a <= window.1)
        .collect();
    if tail.len() < 2 {
        return Err(Error::Fit(format!(
            "window [{}, {}] holds {} points, need at least 2",
            window.0,
            window.1,
            tail.len()
        )));
    }
    if tail.iter().any(|&(_, m)| !(m > 0.0) || !m.is_finite()) {
        return Err(Error::Fit("log fit needs positive finite mse values".into()));
    }
    let k = tail.len() as f64;
    let (param, intercept, resid2) = match law {
        AsymptoticLaw::Power2 | AsymptoticLaw::InverseAlpha => {
            let power = if law == AsymptoticLaw::Power2 { 2 } else { 1 };
            let logs: Vec<f64> = tail
                .iter()
                .map(|&(a, m)| m.ln() + power as f64 * a.ln())
                .collect();
            let mean = logs.iter().sum::<f64>() / k;
            let r2 = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>();
            (mean.exp(), f64::NAN, r2)
        }
        AsymptoticLaw::ExpRate => {
            let mean_a = tail.iter().map(|p| p.0).sum::<f64>() / k;
            let mean_l = tail.iter().map(|p| p.1.ln()).sum::<f64>() / k;
            let sxx: f64 = tail.iter().map(|p| (p.0 - mean_a).powi(2)).sum();
            if sxx == 0.0 {
                return Err(Error::Fit("exponential fit needs distinct alpha values".into()));
            }
            let sxy: f64 = tail.iter().map(|p| (p.0 - mean_a) * (p.1.ln() - mean_l)).sum();
            let slope = sxy / sxx;
            let b = mean_l - slope * mean_a;
            let r2 = tail
                .iter()
                .map(|p| (p.1.ln() - (b + slope * p.0)).powi(2))
                .sum::<f64>();
            (-slope, b, r2)
        }
    };
    Ok(AsymptoteFit {
        law,
        param,
        intercept,
        log_resid: (resid2 / k).sqrt(),
        n_points: tail.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quadratic_recovered() {
        let (c0, c1, c2) = (0.0123, 4.5, -210.0);
        let cells: Vec<(usize, f64)> = [200usize, 500, 1000, 2000, 4000]
            .iter()
            .map(|&n| (n, c0 + c1 / n as f64 + c2 / (n as f64).powi(2)))
            .collect();
        let e = extrapolate_n(&cells).unwrap();
        assert!((e.c0 - c0).abs() < 1e-10 * c0.abs());
        assert!((e.c1 - c1).abs() < 1e-10 * c1.abs());
        assert!((e.c2 - c2).abs() < 1e-10 * c2.abs());
        assert!(e.resid < 1e-14);
    }

    #[test]
    fn constant_cells() {
        let e = extrapolate_n(&[(100, 0.5), (300, 0.5), (900, 0.5), (2700, 0.5)]).unwrap();
        assert!((e.c0 - 0.5).abs() < 1e-13);
        assert!(e.c1.abs() < 1e-10 && e.c2.abs() < 1e-8);
    }

    #[test]
    fn too_few_distinct_n() {
        assert!(extrapolate_n(&[(100, 0.5), (100, 0.4), (200, 0.3)]).is_err());
        assert!(extrapolate_n(&[(100, 0.5), (200, f64::NAN), (300, 0.3)]).is_err());
    }

    #[test]
    fn laws_recover_parameters() {
        let pts: Vec<(f64, f64)> = (1..=20).map(|k| (k as f64, 3.0 / (k * k) as f64)).collect();
        let f = fit_asymptote(&pts, AsymptoticLaw::Power2, (5.0, 20.0)).unwrap();
        assert!((f.param - 3.0).abs() < 1e-12 && f.n_points == 16);

        let pts: Vec<(f64, f64)> = (1..=20).map(|k| (k as f64, 0.7 / k as f64)).collect();
        let f = fit_asymptote(&pts, AsymptoticLaw::InverseAlpha, (1.0, 20.0)).unwrap();
        assert!((f.param - 0.7).abs() < 1e-12);

        let pts: Vec<(f64, f64)> = (0..20)
            .map(|k| (0.1 * k as f64, (1.5 - 10.0 * 0.1 * k as f64).exp()))
            .collect();
        let f = fit_asymptote(&pts, AsymptoticLaw::ExpRate, (0.0, 2.0)).unwrap();
        assert!((f.param - 10.0).abs() < 1e-10 && (f.intercept - 1.5).abs() < 1e-10);
    }

    #[test]
    fn fit_errors() {
        let pts = [(1.0, 0.1), (2.0, 0.0), (3.0, 0.01)];
        assert!(fit_asymptote(&pts, AsymptoticLaw::Power2, (0.0, 10.0)).is_err());
        assert!(fit_asymptote(&pts, AsymptoticLaw::Power2, (2.5, 10.0)).is_err());
        assert!("cubic".parse::<AsymptoticLaw>().is_err());
        assert_eq!(
            "exp_rate".parse::<AsymptoticLaw>().unwrap(),
            AsymptoticLaw::ExpRate
        );
    }
}
