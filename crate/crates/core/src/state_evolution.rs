//! Macroscopic theory of online and batch recovery.
//!
//! On the Bayes-optimal (symmetric) solution everything is driven by one
//! conjugate order parameter `q̂`. Given `q̂`, a scalar component observed through
//! the Gaussian channel `h = q̂ x0 + √q̂ z` has posterior mean `⟨x⟩` and variance
//! `v`, and the overlap is `q = E⟨x⟩² = Q0 − E v`. The online algorithm obeys
//!
//! ```text
//! dq̂/dα = Tr_y ∫Dv L(y, √q v; Q0−q) [∂ ln L(y, √q v; Q0−q)]²,   L(y, Δ; c) = ∫Du P(y | Δ + √c u)
//! ```
//!
//! and batch recovery satisfies the same relation with `dq̂/dα` replaced by `q̂/α`.
//! `mse = Q0 − q`.

use serde::Serialize;

use crate::channel::{ChannelKind, ChannelModel, Likelihood};
use crate::quadrature::{integrate_adaptive, GaussQuadRule};
use crate::scalar_prior::SparsePrior;
use crate::special::normal_pdf;
use crate::{Error, Result};

/// The constant `K` of the noiseless 1-bit asymptotes `mse ≃ c Q0 (ρ/(Kα))²`.
pub const ONE_BIT_K: f64 = 0.3603;

/// Denoiser expectations are integrated over `|u| ≤ U_MAX` standard deviations.
const U_MAX: f64 = 15.0;
const DENOISER_REL_TOL: f64 = 1e-12;

/// Offline solver settings.
const OFFLINE_DAMPING: f64 = 0.5;
const OFFLINE_TOL: f64 = 1e-10;
const OFFLINE_MAX_ITER: usize = 100_000;
/// Beyond this `q̂` the informed branch is treated as perfect recovery.
const QHAT_DIVERGENCE: f64 = 1e30;
pub const UNINFORMED_START: f64 = 1e-8;
pub const INFORMED_START: f64 = 1e8;

/// One macroscopic state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SePoint {
    pub alpha: f64,
    pub q_hat: f64,
    pub q: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMethod {
    OnlineOde,
    OfflineFixedPoint,
}

impl std::fmt::Display for CurveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CurveMethod::OnlineOde => "online_ode",
            CurveMethod::OfflineFixedPoint => "offline_fixed_point",
        })
    }
}

/// A theory curve, ordered by strictly increasing `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeCurve {
    pub points: Vec<SePoint>,
    pub prior: SparsePrior,
    pub channel: ChannelModel,
    pub method: CurveMethod,
    /// Set when `q̂` blew up (noiseless channels reaching `mse = 0`); the last
    /// point then carries `q̂ = ∞, mse = 0`.
    pub diverged_at: Option<f64>,
}

impl SeCurve {
    /// Linear interpolation of `mse` at `alpha`, if inside the curve.
    pub fn mse_at(&self, alpha: f64) -> Option<f64> {
        let pts = &self.points;
        let idx = pts.partition_point(|p| p.alpha < alpha);
        if idx < pts.len() && pts[idx].alpha == alpha {
            return Some(pts[idx].mse);
        }
        if idx == 0 || idx == pts.len() {
            return None;
        }
        let (a, b) = (pts[idx - 1], pts[idx]);
        let t = (alpha - a.alpha) / (b.alpha - a.alpha);
        Some(a.mse + t * (b.mse - a.mse))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchStatus {
    Converged,
    /// `q̂` grew without bound: the branch sits at `q = Q0`.
    PerfectRecovery,
    NotConverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OfflineBranch {
    pub q_hat: f64,
    pub q: f64,
    pub mse: f64,
    pub iterations: usize,
    pub status: BranchStatus,
}

/// Both fixed points of the batch equation of state at one `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OfflineSolution {
    pub alpha: f64,
    /// Started from `q̂ = 1e-8`.
    pub uninformed: OfflineBranch,
    /// Started from `q̂ = 1e8`.
    pub informed: OfflineBranch,
}

impl OfflineSolution {
    /// The branches agree to `tol` in `mse` (relative).
    pub fn branches_coincide(&self, tol: f64) -> bool {
        let (a, b) = (self.uninformed.mse, self.informed.mse);
        (a - b).abs() <= tol * a.abs().max(b.abs())
    }
}

/// Closed-form large-`α` laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticRegime {
    /// Online, noiseless 1-bit: `2 Q0 (ρ/(Kα))²`.
    Online1Bit,
    /// Batch, noiseless 1-bit: `(Q0/2) (ρ/(Kα))²`.
    Offline1Bit,
    /// Online, noiseless AWGN: `mse = O(e^{−α/ρ})`; the value is the rate `1/ρ`.
    OnlineAwgnNoiselessRate,
    /// Any noisy channel, online or batch: `2ρ/(Iα)`.
    UniversalNoisy,
}

impl std::str::FromStr for AsymptoticRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "online_1bit" => Ok(Self::Online1Bit),
            "offline_1bit" => Ok(Self::Offline1Bit),
            "online_awgn_noiseless_rate" => Ok(Self::OnlineAwgnNoiselessRate),
            "universal_noisy" => Ok(Self::UniversalNoisy),
            other => Err(Error::config(format!("unknown asymptotic regime `{other}`"))),
        }
    }
}

/// Theory engine for one `(prior, channel)` pair.
#[derive(Debug, Clone)]
pub struct StateEvolution {
    prior: SparsePrior,
    channel: ChannelModel,
    rule: GaussQuadRule,
}

impl StateEvolution {
    pub fn new(prior: SparsePrior, channel: ChannelModel) -> Self {
        Self {
            prior,
            channel,
            rule: GaussQuadRule::default_rule().clone(),
        }
    }

    /// Uses a Gauss–Hermite rule of the given order for the channel integrals.
    pub fn with_quad_order(prior: SparsePrior, channel: ChannelModel, order: usize) -> Result<Self> {
        Ok(Self {
            prior,
            channel,
            rule: GaussQuadRule::hermite(order)?,
        })
    }

    pub fn prior(&self) -> &SparsePrior {
        &self.prior
    }

    pub fn channel(&self) -> &ChannelModel {
        &self.channel
    }

    fn q0(&self) -> f64 {
        self.prior.second_moment()
    }

    /// `E[stat(⟨x⟩, v)]` over `x0 ~ φ`, `z ~ N(0,1)` at tilt `a = q̂, h = √q̂ z + q̂ x0`.
    ///
    /// Given `x0` the field is Gaussian, so each prior component reduces to a
    /// single Gaussian integral over `h` with variance `q̂` (spike) or
    /// `q̂ + q̂²σ²` (slab).
    fn denoiser_expectation<F: Fn(f64, f64) -> f64>(&self, q_hat: f64, stat: F) -> Result<f64> {
        let rho = self.prior.rho();
        let sigma2 = self.prior.sigma2();
        let s = sigma2 / (1.0 + q_hat * sigma2);
        // log-odds of slab vs spike at h = 0; the switch sits where c1 + h²s/2 = 0
        let c1 = rho.ln() - (-rho).ln_1p() - 0.5 * (q_hat * sigma2).ln_1p();
        let h_switch = if c1 < 0.0 { (-2.0 * c1 / s).sqrt() } else { 0.0 };
        let mut total = 0.0;
        let spike_sd = q_hat.sqrt();
        let slab_sd = spike_sd * (1.0 + q_hat * sigma2).sqrt();
        for (weight, sd) in [(1.0 - rho, spike_sd), (rho, slab_sd)] {
            let mut points = vec![0.0, U_MAX];
            if h_switch > 0.0 {
                // the switch is a logistic in h of width 1/(h_c s)
                let u_switch = h_switch / sd;
                let width = 1.0 / (h_switch * s * sd);
                for u in [u_switch - 20.0 * width, u_switch, u_switch + 20.0 * width] {
                    if u > 0.0 && u < U_MAX {
                        points.push(u);
                    }
                }
                points.sort_by(f64::total_cmp);
            }
            let half = integrate_adaptive(
                |u| {
                    let (m, v) = self.prior.posterior_mean_var(q_hat, sd * u);
                    normal_pdf(u) * stat(m, v)
                },
                &points,
                1e-300,
                DENOISER_REL_TOL,
            )?;
            total += weight * 2.0 * half;
        }
        Ok(total)
    }

    /// `mse(q̂) = E v = Q0 − q`.
    pub fn mse_from_qhat(&self, q_hat: f64) -> Result<f64> {
        if !(q_hat >= 0.0) {
            return Err(Error::domain(format!("q_hat must be >= 0, got {q_hat}")));
        }
        if q_hat == 0.0 {
            return Ok(self.q0());
        }
        if q_hat.is_infinite() {
            return Ok(0.0);
        }
        self.denoiser_expectation(q_hat, |_, v| v)
    }

    /// Overlap `q(q̂) = E_{x0,z}⟨x⟩²`, evaluated as `Q0 − E v` (equal on the
    /// Bayes-optimal solution, and free of cancellation when `q → Q0`).
    pub fn overlap_from_qhat(&self, q_hat: f64) -> Result<f64> {
        Ok(self.q0() - self.mse_from_qhat(q_hat)?)
    }

    /// `E_{x0,z}⟨x⟩²` integrated directly; only for cross-checks.
    pub fn overlap_direct(&self, q_hat: f64) -> Result<f64> {
        if !(q_hat >= 0.0) || q_hat.is_infinite() {
            return Err(Error::domain(format!(
                "q_hat must be finite and >= 0, got {q_hat}"
            )));
        }
        if q_hat == 0.0 {
            return Ok(0.0);
        }
        self.denoiser_expectation(q_hat, |m, _| m * m)
    }

    /// `Tr_y ∫Dv L(y,√q v; c) [∂_Δ ln L(y, Δ; c)]²` at `Δ = √q v`.
    ///
    /// Returns `+∞` when the smoothed likelihood is degenerate (`σ_n² + c = 0`).
    pub fn channel_information(&self, q: f64, c: f64) -> Result<f64> {
        if !(q >= 0.0) || !(c >= 0.0) {
            return Err(Error::domain(format!("need q >= 0 and c >= 0, got q={q}, c={c}")));
        }
        let smoothing = self.channel.noise_var + c;
        if smoothing == 0.0 {
            return Ok(f64::INFINITY);
        }
        match self.channel.kind {
            ChannelKind::Awgn => Ok(1.0 / smoothing),
            ChannelKind::OneBit => {
                let outputs = self.channel.discrete_outputs().unwrap_or(&[]);
                let sd = smoothing.sqrt();
                let k = q.sqrt() / sd;
                if k <= 1.0 {
                    let delta_scale = q.sqrt();
                    self.rule.try_expect(|v| {
                        let mut acc = 0.0;
                        for &y in outputs {
                            let ev = self.channel.smoothed_evidence(y, delta_scale * v, c)?;
                            acc += ev.log_l.exp() * ev.g1 * ev.g1;
                        }
                        Ok(acc)
                    })
                } else {
                    // Substitute Δ = sd·τ: the integrand is concentrated on |Δ| ≲ sd, far
                    // narrower than the spread √q of Δ, so integrate over τ instead.
                    let shrink = 1.0 - 1.0 / (k * k);
                    let scaled = self.rule.try_expect(|tau| {
                        let mut acc = 0.0;
                        for &y in outputs {
                            let ev = self.channel.smoothed_evidence(y, sd * tau, c)?;
                            if ev.g1 != 0.0 {
                                acc += (ev.log_l + 2.0 * ev.g1.abs().ln() + 0.5 * tau * tau * shrink).exp();
                            }
                        }
                        Ok(acc)
                    })?;
                    Ok(scaled / k)
                }
            }
        }
    }

    /// Right-hand side `dq̂/dα` of the online ODE; `+∞` at a degenerate perfect-recovery point.
    pub fn ode_rhs(&self, q_hat: f64) -> Result<f64> {
        let mse = self.mse_from_qhat(q_hat)?;
        let q = self.q0() - mse;
        self.channel_information(q.max(0.0), mse.max(0.0))
    }

    fn point(&self, alpha: f64, q_hat: f64) -> Result<SePoint> {
        let mse = self.mse_from_qhat(q_hat)?;
        Ok(SePoint {
            alpha,
            q_hat,
            q: self.q0() - mse,
            mse,
        })
    }

    /// Fixed-step RK4 integration of the online ODE from `q̂(0) = 0`, reporting at
    /// each `alpha` of `grid` (increasing, `>= 0`). Steps never exceed `step`.
    pub fn integrate_online(&self, grid: &[f64], step: f64) -> Result<SeCurve> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::domain(format!("step must be positive, got {step}")));
        }
        validate_grid(grid)?;
        let mut points = Vec::with_capacity(grid.len());
        let mut alpha = 0.0;
        let mut q_hat = 0.0;
        let mut diverged_at = None;
        'grid: for &target in grid {
            let span = target - alpha;
            if span > 0.0 {
                let substeps = (span / step).ceil().max(1.0) as usize;
                let h = span / substeps as f64;
                for i in 0..substeps {
                    match self.rk4_step(q_hat, h)? {
                        Some(next) => q_hat = next,
                        None => {
                            diverged_at = Some(alpha + i as f64 * h);
                            break 'grid;
                        }
                    }
                }
                alpha = target;
            }
            points.push(self.point(target, q_hat)?);
        }
        if let Some(at) = diverged_at {
            let flagged_alpha = grid
                .iter()
                .copied()
                .find(|&a| a > points.last().map_or(-1.0, |p| p.alpha))
                .unwrap_or(at);
            points.push(SePoint {
                alpha: flagged_alpha,
                q_hat: f64::INFINITY,
                q: self.q0(),
                mse: 0.0,
            });
        }
        Ok(SeCurve {
            points,
            prior: self.prior,
            channel: self.channel,
            method: CurveMethod::OnlineOde,
            diverged_at,
        })
    }

    /// One classic RK4 step; `None` if `q̂` diverges within the step.
    fn rk4_step(&self, q_hat: f64, h: f64) -> Result<Option<f64>> {
        let f = |x: f64| -> Result<Option<f64>> {
            if !x.is_finite() {
                return Ok(None);
            }
            let r = self.ode_rhs(x)?;
            if r.is_finite() {
                Ok(Some(r))
            } else if r == f64::INFINITY {
                Ok(None)
            } else {
                Err(Error::Numerical(format!(
                    "ODE right-hand side is {r} at q_hat={x}"
                )))
            }
        };
        let Some(k1) = f(q_hat)? else { return Ok(None) };
        let Some(k2) = f(q_hat + 0.5 * h * k1)? else {
            return Ok(None);
        };
        let Some(k3) = f(q_hat + 0.5 * h * k2)? else {
            return Ok(None);
        };
        let Some(k4) = f(q_hat + h * k3)? else {
            return Ok(None);
        };
        let next = q_hat + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        Ok(next.is_finite().then_some(next))
    }

    /// Largest relative change of `mse` on `grid` when the RK4 step is halved.
    pub fn step_halving_error(&self, grid: &[f64], step: f64) -> Result<f64> {
        let coarse = self.integrate_online(grid, step)?;
        let fine = self.integrate_online(grid, 0.5 * step)?;
        Ok(coarse
            .points
            .iter()
            .zip(&fine.points)
            .filter(|(c, f)| c.mse > 0.0 && f.mse > 0.0)
            .map(|(c, f)| (c.mse - f.mse).abs() / f.mse)
            .fold(0.0, f64::max))
    }

    /// Damped iteration of `q̂ = α · rhs(q̂)` from `start`.
    pub fn offline_branch(&self, alpha: f64, start: f64) -> Result<OfflineBranch> {
        let mut q_hat = start;
        for it in 1..=OFFLINE_MAX_ITER {
            let target = alpha * self.ode_rhs(q_hat)?;
            if target.is_nan() {
                return Err(Error::Numerical(format!("offline map is NaN at q_hat={q_hat}")));
            }
            if !target.is_finite() || target > QHAT_DIVERGENCE {
                return Ok(OfflineBranch {
                    q_hat: f64::INFINITY,
                    q: self.q0(),
                    mse: 0.0,
                    iterations: it,
                    status: BranchStatus::PerfectRecovery,
                });
            }
            let next = (1.0 - OFFLINE_DAMPING) * q_hat + OFFLINE_DAMPING * target;
            let done = (next - q_hat).abs() <= OFFLINE_TOL * q_hat.max(1.0);
            q_hat = next;
            if done {
                let p = self.point(alpha, q_hat)?;
                return Ok(OfflineBranch {
                    q_hat,
                    q: p.q,
                    mse: p.mse,
                    iterations: it,
                    status: BranchStatus::Converged,
                });
            }
        }
        let p = self.point(alpha, q_hat)?;
        Ok(OfflineBranch {
            q_hat,
            q: p.q,
            mse: p.mse,
            iterations: OFFLINE_MAX_ITER,
            status: BranchStatus::NotConverged,
        })
    }

    /// Batch equation of state at `alpha`, from both initializations.
    pub fn solve_offline(&self, alpha: f64) -> Result<OfflineSolution> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        Ok(OfflineSolution {
            alpha,
            uninformed: self.offline_branch(alpha, UNINFORMED_START)?,
            informed: self.offline_branch(alpha, INFORMED_START)?,
        })
    }

    /// Offline curve on `grid`; each point reports the informed branch.
    pub fn offline_curve(&self, grid: &[f64]) -> Result<(SeCurve, Vec<OfflineSolution>)> {
        validate_grid(grid)?;
        let mut points = Vec::with_capacity(grid.len());
        let mut solutions = Vec::with_capacity(grid.len());
        for &alpha in grid {
            if alpha == 0.0 {
                points.push(SePoint {
                    alpha,
                    q_hat: 0.0,
                    q: 0.0,
                    mse: self.q0(),
                });
                continue;
            }
            let sol = self.solve_offline(alpha)?;
            let b = sol.informed;
            points.push(SePoint {
                alpha,
                q_hat: b.q_hat,
                q: b.q,
                mse: b.mse,
            });
            solutions.push(sol);
        }
        let curve = SeCurve {
            points,
            prior: self.prior,
            channel: self.channel,
            method: CurveMethod::OfflineFixedPoint,
            diverged_at: None,
        };
        Ok((curve, solutions))
    }

    /// Bracket `(lo, hi]` of the grid where the informed batch branch first
    /// reaches `mse < 1e-8`. This marks where the perfect-recovery branch
    /// appears, not a free-energy transition point. Noiseless AWGN only.
    pub fn scan_alpha_c(&self, grid: &[f64]) -> Result<(f64, f64)> {
        if self.channel.kind != ChannelKind::Awgn || !self.channel.is_noiseless() {
            return Err(Error::domain("alpha_c scan needs the noiseless AWGN channel"));
        }
        validate_grid(grid)?;
        let mut prev: Option<f64> = None;
        for &alpha in grid.iter().filter(|&&a| a > 0.0) {
            let informed = self.offline_branch(alpha, INFORMED_START)?;
            if informed.mse < 1e-8 {
                return match prev {
                    Some(lo) => Ok((lo, alpha)),
                    None => Err(Error::domain(format!(
                        "grid does not bracket: perfect recovery already at alpha={alpha}"
                    ))),
                };
            }
            prev = Some(alpha);
        }
        Err(Error::domain(
            "grid does not bracket: no perfect-recovery branch found",
        ))
    }

    /// Fisher information `I = Tr_y ∫Dv P(y|√Q0 v) (∂_u ln P(y|u))²` at `u = √Q0 v`.
    pub fn fisher_information(&self) -> Result<f64> {
        if self.channel.is_noiseless() {
            return Err(Error::domain(
                "Fisher information needs a noisy (differentiable) channel",
            ));
        }
        match self.channel.kind {
            ChannelKind::Awgn => Ok(1.0 / self.channel.noise_var),
            ChannelKind::OneBit => self.channel_information(self.q0(), 0.0),
        }
    }

    /// Closed-form asymptote; for [`AsymptoticRegime::OnlineAwgnNoiselessRate`]
    /// the decay rate `1/ρ` instead of an `mse` value.
    pub fn asymptotic_mse(&self, regime: AsymptoticRegime, alpha: f64) -> Result<f64> {
        let rho = self.prior.rho();
        let q0 = self.q0();
        let noiseless_one_bit = self.channel.kind == ChannelKind::OneBit && self.channel.is_noiseless();
        let noiseless_awgn = self.channel.kind == ChannelKind::Awgn && self.channel.is_noiseless();
        let mismatch = || Error::domain(format!("regime {regime:?} does not apply to {:?}", self.channel));
        match regime {
            AsymptoticRegime::Online1Bit if noiseless_one_bit => {
                Ok(2.0 * q0 * (rho / (ONE_BIT_K * alpha)).powi(2))
            }
            AsymptoticRegime::Offline1Bit if noiseless_one_bit => {
                Ok(0.5 * q0 * (rho / (ONE_BIT_K * alpha)).powi(2))
            }
            AsymptoticRegime::OnlineAwgnNoiselessRate if noiseless_awgn => Ok(1.0 / rho),
            AsymptoticRegime::UniversalNoisy if !self.channel.is_noiseless() => {
                Ok(2.0 * rho / (self.fisher_information()? * alpha))
            }
            _ => Err(mismatch()),
        }
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("alpha grid is empty"));
    }
    if grid[0] < 0.0 || grid.iter().any(|a| !a.is_finite()) {
        return Err(Error::domain("alpha grid must be finite and >= 0"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("alpha grid must be strictly increasing"));
    }
    Ok(())
}

/// `0, interval, 2·interval, …` up to and including `alpha_max` (within rounding).
pub fn uniform_grid(alpha_max: f64, interval: f64) -> Result<Vec<f64>> {
    if !(alpha_max > 0.0) || !(interval > 0.0) {
        return Err(Error::domain("alpha_max and interval must be positive"));
    }
    let count = (alpha_max / interval + 1e-9).floor() as usize;
    // k / m is correctly rounded when the spacing is 1/m, so 0.05 gives 0.15, not 0.15000000000000002
    let per_unit = 1.0 / interval;
    let point = |k: usize| {
        if (per_unit - per_unit.round()).abs() < 1e-9 * per_unit {
            k as f64 / per_unit.round()
        } else {
            k as f64 * interval
        }
    };
    let mut grid: Vec<f64> = (0..=count).map(point).collect();
    if alpha_max - grid[grid.len() - 1] > 1e-9 * interval {
        grid.push(alpha_max);
    }
    Ok(grid)
}
