use onlinecs::harness::{aggregates_csv, compare, raw_csv, run_sweep, ExperimentConfig, RAW_HEADER};
use onlinecs::{ChannelModel, SparsePrior};

fn config(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        SparsePrior::new(0.1, 1.0).unwrap(),
        ChannelModel::one_bit(0.1).unwrap(),
    );
    cfg.n_list = vec![50, 100, 150];
    cfg.alpha_grid = vec![0.5, 1.0, 2.0];
    cfg.trials = 6;
    cfg.base_seed = seed;
    cfg
}

#[test]
fn same_seed_same_bytes() {
    let a = run_sweep(&config(7)).unwrap();
    let b = run_sweep(&config(7)).unwrap();
    assert_eq!(raw_csv(&a), raw_csv(&b));
    assert_eq!(aggregates_csv(&a), aggregates_csv(&b));
    let c = run_sweep(&config(8)).unwrap();
    assert_ne!(raw_csv(&a), raw_csv(&c));
}

#[test]
fn raw_rows_cover_every_trial() {
    let cfg = config(1);
    let csv = raw_csv(&run_sweep(&cfg).unwrap());
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(RAW_HEADER));
    assert_eq!(
        lines.count(),
        cfg.trials * cfg.n_list.len() * cfg.alpha_grid.len()
    );
}

#[test]
fn compare_outputs_are_byte_identical() {
    let cfg = config(3);
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let f1 = compare(&cfg).unwrap().write_to(d1.path()).unwrap();
    let f2 = compare(&cfg).unwrap().write_to(d2.path()).unwrap();
    for (a, b) in f1.iter().zip(&f2) {
        assert_eq!(
            std::fs::read(a).unwrap(),
            std::fs::read(b).unwrap(),
            "{}",
            a.display()
        );
    }
}
