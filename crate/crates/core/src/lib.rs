//! Online Bayesian compressed sensing.
//!
//! A sparse signal `x0 ∈ R^N` is observed through a stream of random linear
//! measurements `y^t ~ P(y | Φ^t · x0)`. Each measurement is absorbed once by
//! [`RecoveryEngine::update`] in `O(N)` time and then discarded; the engine keeps a
//! factorized exponential-family posterior with natural parameters `(a_i, h_i)`.
//!
//! The macroscopic behaviour of the engine is predicted by [`StateEvolution`]:
//! an ODE in the measurement ratio `α = t/N` for the online algorithm, and the
//! algebraic equation of state for optimal batch recovery.
//!
//! [`harness`] turns both into reproducible Monte Carlo experiments.
//!
//! ```
//! use onlinecs::synthesis::{draw_measurement_vector, draw_signal, sample_measurement};
//! use onlinecs::{ChannelModel, RecoveryEngine, SparsePrior, StateEvolution, TrialRng};
//!
//! # fn main() -> onlinecs::Result<()> {
//! let prior = SparsePrior::new(0.1, 1.0)?;
//! let channel = ChannelModel::one_bit(0.1)?;
//! let n = 500;
//!
//! let mut rng = TrialRng::for_trial(42, n as u64, 0);
//! let signal = draw_signal(n, &prior, &mut rng);
//! let mut engine = RecoveryEngine::new(n, prior, channel)?;
//! for _ in 0..4 * n {
//!     let phi = draw_measurement_vector(n, &mut rng);
//!     let y = sample_measurement(&phi, &signal.x0, &channel, &mut rng)?;
//!     engine.update(&phi, y)?;
//! }
//! let mse = engine.mse_against(&signal.x0)?;
//!
//! let theory = StateEvolution::new(prior, channel).integrate_online(&[0.0, 1.0, 2.0, 3.0, 4.0], 1e-2)?;
//! let predicted = theory.mse_at(4.0).expect("4.0 is on the grid");
//! assert!(mse < prior.second_moment() && predicted < prior.second_moment());
//! # Ok(())
//! # }
//! ```

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
mod error;
pub mod harness;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod quadrature;
pub mod recovery_engine;
pub mod scalar_prior;
pub mod special;
pub mod state_evolution;
pub mod synthesis;

pub use channel::{ChannelKind, ChannelModel, Likelihood, SmoothedEvidence};
pub use error::{Error, Result};
pub use quadrature::GaussQuadRule;
pub use recovery_engine::{mse_against, MeasurementRecord, RecoveryEngine};
pub use scalar_prior::{SparsePrior, TiltedMoments};
pub use state_evolution::{
    AsymptoticRegime, BranchStatus, CurveMethod, OfflineBranch, OfflineSolution, SeCurve, SePoint,
    StateEvolution,
};
pub use synthesis::{SignalInstance, TrialRng};
