//! Monte Carlo recovery against the state-evolution prediction at modest N.

use onlinecs::harness::{run_sweep, ExperimentConfig};
use onlinecs::state_evolution::uniform_grid;
use onlinecs::{ChannelModel, SparsePrior, StateEvolution};

fn check(channel: ChannelModel, rel_tol: f64) {
    let prior = SparsePrior::new(0.1, 1.0).unwrap();
    let mut cfg = ExperimentConfig::new(prior, channel);
    cfg.n_list = vec![1000];
    cfg.alpha_grid = vec![1.0, 2.0, 4.0];
    cfg.trials = 64;
    cfg.base_seed = 2024;
    let sweep = run_sweep(&cfg).unwrap();
    assert_eq!(sweep.failed_trials(), 0);

    let theory = StateEvolution::new(prior, channel)
        .integrate_online(&cfg.alpha_grid, 1e-2)
        .unwrap();
    for (cell, point) in sweep.cells.iter().zip(&theory.points) {
        assert_eq!(cell.alpha, point.alpha);
        let rel = (cell.mse_mean - point.mse).abs() / point.mse;
        assert!(
            rel < rel_tol,
            "{:?} α={}: simulated {} ± {}, theory {}",
            channel.kind,
            cell.alpha,
            cell.mse_mean,
            cell.mse_stderr,
            point.mse
        );
    }
}

#[test]
fn noisy_awgn_tracks_theory() {
    check(ChannelModel::awgn(0.1).unwrap(), 0.1);
}

#[test]
fn noisy_one_bit_tracks_theory() {
    check(ChannelModel::one_bit(0.1).unwrap(), 0.1);
}

#[test]
fn prior_mse_at_start() {
    let prior = SparsePrior::new(0.1, 1.0).unwrap();
    let mut cfg = ExperimentConfig::new(prior, ChannelModel::awgn(0.1).unwrap());
    cfg.n_list = vec![400];
    cfg.alpha_grid = uniform_grid(0.5, 0.5).unwrap();
    cfg.trials = 400;
    let sweep = run_sweep(&cfg).unwrap();
    let start = &sweep.cells[0];
    assert_eq!(start.alpha, 0.0);
    assert!((start.mse_mean - 0.1).abs() < 3.0 * start.mse_stderr);
}
