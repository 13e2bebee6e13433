use mtsindy_experiments::output::write_study;
use mtsindy_experiments::{run_nmse_study, run_study_replicates, NmseSplit, ScenarioConfig};

fn quick(replicates: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::paper_multi_task();
    cfg.replicates = replicates;
    cfg.chain.n_iterations = 400;
    cfg.chain.n_burn_in = 100;
    cfg
}

#[test]
fn study_is_bit_identical_across_runs() {
    let cfg = quick(2);
    let a = run_nmse_study(&cfg).unwrap();
    let b = run_nmse_study(&cfg).unwrap();
    assert_eq!(a, b);
    assert!(a.failures.is_empty());
    for split in [NmseSplit::Train, NmseSplit::HeldOut] {
        for s in ["ST", "MT"] {
            for f in [1e1, 1e2, 1e3] {
                let cell = a.aggregate(s, f, split).unwrap();
                assert_eq!(cell.n, 2);
                assert!(cell.mean.is_finite() && cell.std >= 0.0);
            }
        }
    }

    let dir = tempfile::tempdir().unwrap();
    write_study(dir.path(), &a, NmseSplit::Train).unwrap();
    let first = std::fs::read(dir.path().join("nmse.csv")).unwrap();
    write_study(dir.path(), &b, NmseSplit::Train).unwrap();
    assert_eq!(first, std::fs::read(dir.path().join("nmse.csv")).unwrap());
    let rows = String::from_utf8(first).unwrap().lines().count();
    assert_eq!(rows, 1 + 2 * 3 * 2);
}

#[test]
fn replicate_order_does_not_matter() {
    let cfg = quick(3);
    let a = run_study_replicates(&cfg, &[0, 1, 2]).unwrap();
    let b = run_study_replicates(&cfg, &[2, 0, 1]).unwrap();
    assert_eq!(a, b);
}

#[test]
fn diverging_replicates_are_recorded_not_fatal() {
    let mut cfg = quick(2);
    cfg.excitation_scales = vec![1e1, 1e200];
    let study = run_nmse_study(&cfg).unwrap();
    assert!(study.replicates.is_empty());
    assert_eq!(study.failures.iter().map(|f| f.replicate).collect::<Vec<_>>(), [0, 1]);
    assert!(study.failures[0].message.contains("replicate 0"), "{}", study.failures[0].message);
    assert_eq!(study.aggregate("MT", 1e1, NmseSplit::Train).unwrap().n, 0);
}

#[test]
fn one_replicate_is_not_a_study() {
    assert!(run_nmse_study(&quick(1)).is_err());
}
