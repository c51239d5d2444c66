use std::fs;
use std::path::Path;

use cfi_core::harness::{
    build_report, emit_report, generate_scenarios, paired_scenarios, read_scenarios, run_suite, write_run,
    GeneratorConfig, ResultRow, ResultsTable, RowMetrics, ScenarioKind, ScenarioSet, SuiteConfig, SuiteRun,
    CANONICAL_SEED,
};
use cfi_core::model::{build_topology, classify_shares, default_params, BalanceClass, Thresholds, TurnClass};
use cfi_core::pipeline::Model;
use cfi_core::sim::{Counters, Stat};

fn golden_path() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data/golden_scenarios.tsv"))
}

fn generate(seed: u64) -> ScenarioSet {
    let cfg = GeneratorConfig {
        seed,
        ..GeneratorConfig::default()
    };
    generate_scenarios(&cfg, &build_topology(), &default_params()).unwrap()
}

#[test]
fn scenario_set_shape() {
    let set = read_scenarios(golden_path()).unwrap();
    assert_eq!(set.len(), 322);
    let count = |k| set.records.iter().filter(|r| r.kind == k).count();
    assert_eq!(count(ScenarioKind::Base), 10);
    assert_eq!(count(ScenarioKind::Share), 271);
    assert_eq!(count(ScenarioKind::Scaled), 41);
    for r in &set.records {
        let s = &r.scenario;
        let sum: f64 = s.shares.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "scenario {}", s.id);
        match r.kind {
            ScenarioKind::Share => {
                assert_eq!(s.total_demand, 4000.0);
                assert!(s.shares.iter().all(|&x| (0.03 - 1e-9..=0.34 + 1e-9).contains(&x)), "scenario {}", s.id);
            }
            ScenarioKind::Base => assert_eq!(s.total_demand, 4000.0),
            ScenarioKind::Scaled => {
                let base = set.get(r.base.unwrap()).unwrap();
                assert_eq!(s.shares, base.scenario.shares);
                assert!((s.total_demand - 4000.0 * r.multiplier).abs() < 1e-6);
            }
        }
    }
    let ids: Vec<u32> = set.records.iter().map(|r| r.scenario.id).collect();
    assert_eq!(ids, (1..=322).collect::<Vec<_>>());
    assert_eq!(set.count_by_cell().len(), 6);
}

#[test]
fn generation_is_reproducible_and_matches_the_golden_file() {
    let a = generate(CANONICAL_SEED).to_tsv();
    let b = generate(CANONICAL_SEED).to_tsv();
    assert_eq!(a, b);
    assert_eq!(a, fs::read_to_string(golden_path()).unwrap());
    assert_ne!(generate(7).to_tsv(), a);

    let back = ScenarioSet::from_tsv(&a).unwrap();
    assert_eq!(back.to_tsv(), a);
    assert_eq!(back, generate(CANONICAL_SEED));
}

#[test]
fn malformed_scenario_files_are_rejected() {
    assert!(ScenarioSet::from_tsv("").is_err());
    assert!(ScenarioSet::from_tsv("# something else\n").is_err());
    let good = generate(CANONICAL_SEED).to_tsv();
    let broken: String = good.lines().take(3).map(|l| format!("{}\n", l.replace('\t', " "))).collect();
    assert!(ScenarioSet::from_tsv(&broken).is_err());
}

#[test]
fn classification_examples() {
    let th = Thresholds::default();
    let l = classify_shares(&[0.125; 8], th);
    assert_eq!((l.balance, l.turn), (BalanceClass::Balanced, TurnClass::Equal));
    let (a, b) = (0.34 / 4.0, 0.66 / 4.0);
    assert_eq!(classify_shares(&[a, a, b, b, a, a, b, b], th).balance, BalanceClass::Imbalanced);
    let (t, r) = (0.30 / 4.0, 0.70 / 4.0);
    assert_eq!(classify_shares(&[t, r, t, r, t, r, t, r], th).turn, TurnClass::RightHeavy);
    assert_eq!(classify_shares(&[r, t, r, t, r, t, r, t], th).turn, TurnClass::ThroughHeavy);
    let (a, b) = (0.45 / 4.0, 0.55 / 4.0);
    assert_eq!(classify_shares(&[a, a, b, b, a, a, b, b], th).balance, BalanceClass::Balanced);
}

#[test]
fn config_parsing() {
    let cfg = SuiteConfig::from_toml("replications = 2\nhorizon = 900.0\nlimit = 4\nnode_limit = 50\n").unwrap();
    assert_eq!(cfg.replications, 2);
    assert_eq!(cfg.horizon, 900.0);
    assert_eq!(cfg.limit, Some(4));
    assert_eq!(cfg.step2_options().node_limit, Some(50));
    assert_eq!(cfg.seed, CANONICAL_SEED);
    assert_eq!(SuiteConfig::from_toml("").unwrap(), SuiteConfig::default());
    assert!(SuiteConfig::from_toml("replications = 0").is_err());
    assert!(SuiteConfig::from_toml("bogus = 1").is_err());
    assert!(SuiteConfig::from_toml("horizon = \"long\"").is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("suite.toml");
    fs::write(&path, "scenarios = \"s.tsv\"\n").unwrap();
    let cfg = SuiteConfig::load(&path).unwrap();
    assert_eq!(cfg.scenarios, Some(dir.path().join("s.tsv")));
    assert_ne!(cfg.sim_seed(1, 0), cfg.sim_seed(1, 1));
    assert_ne!(cfg.sim_seed(1, 0), cfg.sim_seed(2, 0));
}

fn sample_rows() -> ResultsTable {
    let metrics = RowMetrics {
        delay: 12.25,
        queue: 3.5,
        movement: [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.125],
        counters: Counters {
            generated: 10,
            discharged: 7,
            in_network: 2,
            denied: 1,
        },
    };
    let row = ResultRow {
        scenario: 4,
        model: Model::Proposed,
        replication: 1,
        seed: 99,
        status: "optimal".into(),
        solve_time: 0.5,
        objective: Some(17.5),
        cycle: Some(60),
        violations: 0,
        balance: BalanceClass::Balanced,
        turn: TurnClass::Equal,
        base: Some(1),
        multiplier: 0.6,
        metrics: Some(metrics),
        message: String::new(),
    };
    let failed = ResultRow {
        model: Model::Benchmark,
        status: "step1-infeasible".into(),
        objective: None,
        cycle: None,
        metrics: None,
        base: None,
        multiplier: 1.0,
        message: "no feasible cycle and split".into(),
        ..row.clone()
    };
    ResultsTable { rows: vec![row, failed] }
}

#[test]
fn results_round_trip() {
    let t = sample_rows();
    let text = t.to_tsv();
    let back = ResultsTable::from_tsv(&text).unwrap();
    assert_eq!(back, t);
    assert!(text.lines().nth(3).unwrap().contains("\tNA\t"));
    assert!(ResultsTable::from_tsv("scenario\tmodel\n1\tproposed\n").is_err());
}

fn small_config() -> SuiteConfig {
    SuiteConfig {
        scenarios: Some(golden_path().to_path_buf()),
        replications: 2,
        horizon: 600.0,
        limit: Some(3),
        profile_scenarios: vec![1, 2],
        ..SuiteConfig::default()
    }
}

fn without_times(mut t: ResultsTable) -> ResultsTable {
    for r in &mut t.rows {
        r.solve_time = 0.0;
    }
    t
}

fn run(cfg: &SuiteConfig, journal: Option<&Path>) -> SuiteRun {
    let set = read_scenarios(golden_path()).unwrap();
    run_suite(cfg, &set, journal).unwrap()
}

#[test]
fn interrupted_journal_resumes_to_the_same_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let reference = run(&cfg, None);
    assert_eq!(reference.table.rows.len(), 3 * 2 * 2);
    assert_eq!(reference.replayed_rows, 0);

    let journal = dir.path().join("journal.tsv");
    let full = run(&cfg, Some(&journal));
    assert_eq!(without_times(full.table.clone()), without_times(reference.table.clone()));
    assert_eq!(full.profiles, reference.profiles);

    // Second pass replays everything.
    let again = run(&cfg, Some(&journal));
    assert_eq!(again.replayed_rows, 12);
    assert!(again.units.is_empty());
    assert_eq!(again.table, full.table);

    // Keep one complete unit plus a torn row of the next one, then resume twice.
    let text = fs::read_to_string(&journal).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let mut cut: String = lines[..3].iter().map(|l| format!("{l}\n")).collect();
    cut.push_str(&lines[3][..lines[3].len() / 2]);
    fs::write(&journal, cut).unwrap();
    let resumed = run(&cfg, Some(&journal));
    assert_eq!(resumed.replayed_rows, 2);
    assert_eq!(without_times(resumed.table.clone()), without_times(reference.table.clone()));
    assert_eq!(resumed.profiles, reference.profiles);
    let replay = run(&cfg, Some(&journal));
    assert_eq!(replay.replayed_rows, 12);
    assert_eq!(replay.table, resumed.table);

    let out = dir.path().join("out");
    write_run(&resumed, &out).unwrap();
    let written = ResultsTable::from_tsv(&fs::read_to_string(out.join("results.tsv")).unwrap()).unwrap();
    assert_eq!(written, resumed.table);
}

fn mean_where(table: &ResultsTable, model: Model, keep: &dyn Fn(&ResultRow) -> bool) -> f64 {
    let paired = paired_scenarios(table);
    let v: Vec<f64> = table
        .rows
        .iter()
        .filter(|r| r.model == model && paired.contains(&r.scenario) && keep(r))
        .map(|r| r.metrics.as_ref().unwrap().delay)
        .collect();
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn report_matches_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let r = run(&cfg, None);
    let report = build_report(&r.table);
    assert_eq!(report.total_rows, 12);
    assert_eq!(report.paired_scenarios, 3);
    for (k, model) in [Model::Proposed, Model::Benchmark].into_iter().enumerate() {
        let overall = mean_where(&r.table, model, &|_| true);
        assert!((report.overall.delay[k].mean - overall).abs() < 1e-12);
        let balanced = report.groups.iter().find(|g| g.label == "balanced").unwrap();
        if balanced.rows[k] > 0 {
            let m = mean_where(&r.table, model, &|row| row.balance == BalanceClass::Balanced);
            assert!((balanced.delay[k].mean - m).abs() < 1e-12);
        }
    }
    let d: Vec<f64> = r
        .table
        .rows
        .iter()
        .filter(|x| x.model == Model::Benchmark)
        .map(|x| x.metrics.as_ref().unwrap().movement[5])
        .collect();
    assert_eq!(report.movements[5].1[1], Stat::of(&d));

    let out = dir.path().join("report");
    emit_report(&r.table, &r.profiles, &out).unwrap();
    for f in ["summary.txt", "overall.tsv", "groups.tsv", "movements.tsv", "sweeps.tsv", "profiles.tsv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("reference 61.61 -> 51.26"));
}

#[test]
fn partial_and_empty_tables_still_report() {
    let dir = tempfile::tempdir().unwrap();
    let empty = emit_report(&ResultsTable::default(), &[], dir.path()).unwrap();
    assert_eq!(empty.total_rows, 0);
    let text = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(text.contains("nothing to report"));

    let mut t = sample_rows();
    t.rows.truncate(1);
    let r = build_report(&t);
    assert_eq!(r.total_rows, 1);
    assert_eq!(r.paired_scenarios, 0);
    emit_report(&t, &[], &dir.path().join("partial")).unwrap();
}
