mod common;

use coded_shuffle::analysis::compute_shuffle_matrix;
use coded_shuffle::sim::{random_assignment, run_simulation, worst_case_pair, ShuffleKind, SimConfig};
use coded_shuffle::{Assignment, Dataset, Error};

#[test]
fn worst_case_single_epoch() {
    let cfg = SimConfig::new(3, 15, 1, 0, ShuffleKind::WorstCaseCyclic);
    let data = Dataset::generate(15, 64, 0).unwrap();
    let m = run_simulation(&cfg, &data).unwrap();
    assert_eq!(m.len(), 1);
    assert_eq!(m[0].rate_points, 10);
    assert_eq!(m[0].lower_bound, 10);
    assert_eq!(m[0].uncoded, 15);
}

#[test]
fn worst_case_matrix_shape() {
    let s = compute_shuffle_matrix(&worst_case_pair(15, 3, &[0, 1, 2]).unwrap());
    assert_eq!((s.get(0, 1), s.get(1, 2), s.get(2, 0)), (5, 5, 5));
    assert_eq!((s.get(0, 2), s.get(1, 0), s.get(2, 1)), (0, 0, 0));
    let s = compute_shuffle_matrix(&worst_case_pair(4, 2, &[0, 1]).unwrap());
    assert_eq!(s.s.rows(), vec![vec![0, 2], vec![2, 0]]);
}

#[test]
fn custom_sigma_worst_case_runs() {
    let mut cfg = SimConfig::new(5, 20, 6, 3, ShuffleKind::WorstCaseCyclic);
    cfg.sigma = Some(vec![4, 2, 0, 3, 1]);
    let data = Dataset::generate(20, 8, 3).unwrap();
    let m = run_simulation(&cfg, &data).unwrap();
    assert!(m.iter().all(|e| e.rate_points == 16 && e.lower_bound == 16));
}

#[test]
fn scripted_identity_costs_nothing() {
    let a = Assignment::contiguous(12, 3, 0).unwrap();
    let cfg = SimConfig::new(3, 12, 1, 0, ShuffleKind::Scripted(vec![a.clone(), a]));
    let data = Dataset::generate(12, 16, 0).unwrap();
    let m = run_simulation(&cfg, &data).unwrap();
    assert_eq!(m[0].rate_points, 0);
    assert!(m[0].decode_ok);
}

#[test]
fn hundred_random_epochs() {
    let cfg = SimConfig::new(4, 16, 100, 1, ShuffleKind::Random);
    let data = Dataset::generate(16, 64, 1).unwrap();
    let m = run_simulation(&cfg, &data).unwrap();
    assert_eq!(m.len(), 100);
    for e in &m {
        assert!(e.decode_ok);
        assert_eq!(e.rate_points, e.theorem1);
        assert!(e.lower_bound <= e.rate_points && e.rate_points <= e.uncoded);
        assert!(e.lower_bound_exact);
    }
    assert_eq!(m, run_simulation(&cfg, &data).unwrap());
}

#[test]
fn greedy_bound_above_exact_limit() {
    let mut cfg = SimConfig::new(10, 30, 3, 5, ShuffleKind::Random);
    cfg.exact_lb_limit = 8;
    let data = Dataset::generate(30, 4, 5).unwrap();
    let m = run_simulation(&cfg, &data).unwrap();
    assert!(m.iter().all(|e| !e.lower_bound_exact && e.lower_bound <= e.rate_points));
}

#[test]
fn random_partition_is_unbiased() {
    let trials = 10_000u64;
    let hits = (0..trials)
        .filter(|&seed| random_assignment(4, 2, seed, 0).unwrap().batch(0).contains(&coded_shuffle::PointId(0)))
        .count() as f64;
    let frac = hits / trials as f64;
    assert!((frac - 0.5).abs() <= 0.02, "fraction {frac}");
}

#[test]
fn dataset_size_mismatch_rejected() {
    let cfg = SimConfig::new(3, 15, 1, 0, ShuffleKind::Random);
    let data = Dataset::generate(12, 4, 0).unwrap();
    assert!(matches!(run_simulation(&cfg, &data), Err(Error::InvalidArgument(_))));
}
