use std::fs;

use onebit::bench::{
    aggregate, presets, read_plot_data, read_records_json, read_rows_csv, run_cell, run_trials,
    ExperimentPlan, Method, SweepKey, TrialRecord,
};
use onebit::model::{ProblemConfig, SignalKind};

fn small_plan(seed: u64) -> ExperimentPlan {
    ExperimentPlan::sweep(
        ProblemConfig::new(80, 60, 2, 0.1, 0.1, 0.02),
        SweepKey::S,
        &[1.0, 2.0, 4.0],
        &[Method::Gna, Method::Biht, Method::Lp],
        5,
        seed,
    )
}

fn without_times(mut records: Vec<TrialRecord>) -> Vec<TrialRecord> {
    for r in &mut records {
        r.wall_time_s = 0.0;
    }
    records
}

#[test]
fn run_trials_is_deterministic_across_thread_counts() {
    let mut plan = small_plan(17);
    plan.threads = Some(1);
    let serial = without_times(run_trials(&plan).unwrap());
    plan.threads = Some(4);
    let parallel = without_times(run_trials(&plan).unwrap());
    assert_eq!(serial, parallel);
    assert_eq!(serial.len(), 3 * 5 * 3);
    assert!(serial.iter().all(|r| r.error.is_none()));
}

#[test]
fn a_cell_reproduces_in_isolation() {
    let plan = small_plan(5);
    let all = without_times(run_trials(&plan).unwrap());
    let cell = without_times(run_cell(&plan, 2, 3).unwrap());
    let from_all: Vec<TrialRecord> = all
        .into_iter()
        .filter(|r| r.config_index == 2 && r.replication == 3)
        .collect();
    assert_eq!(cell, from_all);
}

#[test]
fn different_seeds_give_different_data() {
    let a = run_trials(&small_plan(1)).unwrap();
    let b = run_trials(&small_plan(2)).unwrap();
    let errs = |v: &[TrialRecord]| v.iter().map(|r| r.l2_err).collect::<Vec<_>>();
    assert_ne!(errs(&a), errs(&b));
}

#[test]
fn aggregate_counts_and_ranges() {
    let records = run_trials(&small_plan(3)).unwrap();
    let rows = aggregate(&records).unwrap();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        assert_eq!(r.trial_count, 5);
        assert!((0.0..=100.0).contains(&r.pre_percent));
        assert!((0.0..=2.0).contains(&r.mean_l2_err));
    }
}

#[test]
fn default_regime_recovers_support() {
    let plan = ExperimentPlan::single(
        ProblemConfig::new(500, 1000, 5, 0.1, 0.05, 0.01),
        &[Method::Gna],
        100,
        2019,
    );
    let rows = aggregate(&run_trials(&plan).unwrap()).unwrap();
    assert!(rows[0].pre_percent >= 90.0, "{}", rows[0].pre_percent);
}

#[test]
fn gaussian_signals_are_harder_to_recover_exactly() {
    let cfg = ProblemConfig::new(300, 500, 5, 0.1, 0.05, 0.01);
    let pre = |signal| {
        let plan = ExperimentPlan::single(cfg.with_signal(signal), &[Method::Gna], 60, 9);
        aggregate(&run_trials(&plan).unwrap()).unwrap()[0].pre_percent
    };
    assert!(pre(SignalKind::Gaussian) < pre(SignalKind::Sign));
}

#[test]
fn oracle_guard_applies_to_plans() {
    let big = ExperimentPlan::single(ProblemConfig::new(50, 200, 5, 0.0, 0.0, 0.0), &[Method::Oracle], 1, 0);
    assert!(run_trials(&big).is_err());
    let small = ExperimentPlan::single(ProblemConfig::new(40, 10, 2, 0.0, 0.0, 0.0), &[Method::Oracle], 3, 0);
    assert_eq!(run_trials(&small).unwrap().len(), 3);
}

#[test]
fn plan_file_drives_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let text = "m = 60\nn = 40\ns = 1:1:3\nnu = 0.1\nsigma = 0.1\nflip_prob = 0.0\n\
                methods = gna,lp\nreps = 4\nseed = 8\noutputs = csv,json,plot\n";
    let plan = ExperimentPlan::from_kv_str(text).unwrap();
    assert_eq!(plan.grid.len(), 3);
    let records = run_trials(&plan).unwrap();
    let paths = onebit::bench::write_outputs(&plan, &records, dir.path(), "demo").unwrap();

    let rows = read_rows_csv(dir.path().join("demo.csv")).unwrap();
    assert_eq!(rows, aggregate(&records).unwrap());
    assert_eq!(read_records_json(dir.path().join("demo_records.json")).unwrap(), records);
    let recovery = read_plot_data(dir.path().join("demo_recovery_gna_vs_s.csv")).unwrap();
    assert_eq!(recovery.iter().map(|p| p.x).collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
    assert!(paths.iter().all(|p| fs::metadata(p).is_ok()));
    assert_eq!(paths.len(), 2 + 2 * 4);
}

#[test]
fn presets_are_runnable_at_one_replication() {
    for name in presets::NAMES.iter().filter(|n| **n != "wavelet1d") {
        let mut plan = presets::plan(name, presets::Profile::Default, 1, 0).unwrap();
        plan.grid.truncate(2);
        let records = run_trials(&plan).unwrap();
        assert_eq!(records.len(), plan.grid.len() * plan.methods.len(), "{name}");
    }
}
