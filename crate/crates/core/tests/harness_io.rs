use std::collections::BTreeMap;

use submigrate::greedy::{greedy_maximize, GreedyConfig};
use submigrate::harness::{
    read_records, run_experiment, run_point, training_seed, ExperimentSpec, Family, MemoCache,
    ModelOracle, Point, PointConfig, CSV_COLUMNS,
};
use submigrate::matroid::build_matching_matroids;
use submigrate::models::{
    AgentRecord, EstimatorConfig, GroupKey, LocalityRecord, ModelKind, ProbabilitySpec, Scenario,
    ScenarioFile,
};

fn tiny_spec(model: ModelKind) -> ExperimentSpec {
    ExperimentSpec {
        values: vec![Point::Count(5)],
        trials: 1,
        samples: 100,
        seed: 3,
        ..ExperimentSpec::new(Family::NumLocalities, model)
    }
}

fn uniform_scenario(model: ModelKind, agents: u32, p: f64, jobs: u32) -> Scenario {
    Scenario::try_from(ScenarioFile {
        model,
        agents: (0..agents)
            .map(|id| AgentRecord {
                id,
                profession: 1 + id % 2,
                p: ProbabilitySpec::Uniform(p),
            })
            .collect(),
        localities: (0..2)
            .map(|id| LocalityRecord {
                id,
                capacity: jobs * 2,
                jobs: BTreeMap::from([(1, jobs), (2, jobs)]),
            })
            .collect(),
        p_table: Vec::new(),
        corrections: Vec::new(),
        allowed_pairs: None,
    })
    .unwrap()
}

#[test]
fn one_point_one_trial_gives_one_record_and_reruns_add_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_spec(ModelKind::Interview);
    let first = run_experiment(&spec, dir.path(), |_| {}).unwrap();
    assert_eq!(first.written.len(), 1);
    assert_eq!(first.skipped, 0);
    let again = run_experiment(&spec, dir.path(), |_| {}).unwrap();
    assert!(again.written.is_empty());
    assert_eq!(again.skipped, 1);
    assert_eq!(read_records(&first.csv).unwrap().len(), 1);
    let jsonl = std::fs::read_to_string(&first.jsonl).unwrap();
    assert_eq!(jsonl.lines().count(), 1);
}

#[test]
fn resume_fills_in_missing_trials_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = tiny_spec(ModelKind::Correction);
    run_experiment(&spec, dir.path(), |_| {}).unwrap();
    spec.trials = 3;
    spec.values.push(Point::Count(2));
    let summary = run_experiment(&spec, dir.path(), |_| {}).unwrap();
    assert_eq!(summary.skipped, 1);
    assert_eq!(summary.written.len(), 5);
    let records = read_records(&summary.csv).unwrap();
    let mut keys: Vec<(String, u32)> = records.iter().map(|r| (r.x.clone(), r.trial)).collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 6);
}

#[test]
fn csv_has_the_fixed_columns_and_round_trips_through_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_experiment(&tiny_spec(ModelKind::Coordination), dir.path(), |_| {}).unwrap();
    let text = std::fs::read_to_string(&summary.csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert!(summary.csv.ends_with("num_localities-coordination.csv"));
    let from_csv = read_records(&summary.csv).unwrap();
    let from_json: Vec<submigrate::harness::ExperimentRecord> =
        std::fs::read_to_string(&summary.jsonl)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
    assert_eq!(from_csv, from_json);
    assert_eq!(from_csv, summary.written);
    let r = &from_csv[0];
    let rel = r.rel_improvement.unwrap();
    assert!((rel - (r.greedy_utility / r.additive_utility - 1.0)).abs() < 1e-15);
}

#[test]
fn foreign_csv_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_spec(ModelKind::Interview);
    std::fs::write(
        dir.path().join("num_localities-interview.csv"),
        "a,b\n1,2\n",
    )
    .unwrap();
    assert!(run_experiment(&spec, dir.path(), |_| {}).is_err());
}

#[test]
fn invalid_specs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        ExperimentSpec {
            trials: 0,
            ..tiny_spec(ModelKind::Interview)
        },
        ExperimentSpec {
            values: vec![],
            ..tiny_spec(ModelKind::Interview)
        },
        ExperimentSpec {
            values: vec![Point::Jobs(1, 2)],
            ..tiny_spec(ModelKind::Interview)
        },
    ] {
        assert!(run_experiment(&bad, dir.path(), |_| {}).is_err());
    }
}

#[test]
fn everyone_qualifying_employs_everyone() {
    let s = uniform_scenario(ModelKind::Correction, 6, 1.0, 3);
    let out = run_point(
        &s,
        1,
        PointConfig {
            samples: 50,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(out.greedy_utility, 6.0);
    assert_eq!(out.additive_utility, 6.0);
}

#[test]
fn nobody_qualifying_gives_no_improvement_value() {
    let s = uniform_scenario(ModelKind::Interview, 6, 0.0, 3);
    let out = run_point(
        &s,
        1,
        PointConfig {
            samples: 50,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!((out.greedy_utility, out.additive_utility), (0.0, 0.0));
    assert_eq!(submigrate::harness::relative_improvement(0.0, 0.0), None);
    // Nothing has positive weight, so the additive matching is empty.
    assert!(out.additive.is_empty());
}

#[test]
fn memo_changes_nothing_but_the_work_done() {
    let spec = tiny_spec(ModelKind::Interview);
    let scenario = spec.scenario(Point::Count(5), 0).unwrap();
    let with = run_point(
        &scenario,
        9,
        PointConfig {
            samples: 100,
            ..Default::default()
        },
    )
    .unwrap();
    let without = run_point(
        &scenario,
        9,
        PointConfig {
            samples: 100,
            memo: false,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(with.greedy, without.greedy);
    assert_eq!(
        with.greedy_utility.to_bits(),
        without.greedy_utility.to_bits()
    );
    assert!(with.memo.hits > 0);
    assert_eq!(without.memo.hits + without.memo.misses, 0);
}

#[test]
fn cached_values_replay_bit_exactly() {
    let scenario = tiny_spec(ModelKind::Coordination)
        .scenario(Point::Count(5), 0)
        .unwrap();
    let family = build_matching_matroids(&scenario).unwrap();
    let memo = MemoCache::new();
    let cfg = EstimatorConfig {
        samples: 100,
        seed: training_seed(4),
        exact_cutoff: 0,
    };
    let oracle = ModelOracle::new(&scenario, family.ground(), cfg, Some(&memo));
    let trace = greedy_maximize(&oracle, &family, GreedyConfig::default()).unwrap();
    assert!(!trace.selected.is_empty());
    let fresh = ModelOracle::new(&scenario, family.ground(), cfg, None);
    let key = GroupKey::new(0, None);
    for agents in [vec![0usize], vec![1, 2], vec![0, 3, 7]] {
        let cached = memo.get(key, &agents);
        let direct = fresh.group_value(key, &agents).unwrap();
        if let Some(v) = cached {
            assert_eq!(v.to_bits(), direct.to_bits());
        }
    }
}

#[test]
fn parallel_greedy_scan_matches_sequential() {
    let scenario = tiny_spec(ModelKind::Interview)
        .scenario(Point::Count(5), 1)
        .unwrap();
    let seq = run_point(
        &scenario,
        2,
        PointConfig {
            samples: 100,
            ..Default::default()
        },
    )
    .unwrap();
    let par = run_point(
        &scenario,
        2,
        PointConfig {
            samples: 100,
            parallel: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(seq.greedy, par.greedy);
    assert_eq!(seq.trace.marginal_gains, par.trace.marginal_gains);
}

#[test]
fn exact_cutoff_only_affects_the_greedy_oracle() {
    let scenario = tiny_spec(ModelKind::Correction)
        .scenario(Point::Count(5), 0)
        .unwrap();
    let out = run_point(
        &scenario,
        2,
        PointConfig {
            samples: 100,
            exact_cutoff: 7,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(out.greedy_utility > 0.0 && out.additive_utility > 0.0);
}

#[test]
fn scenario_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let s = Family::JobAvailability
        .generate(ModelKind::Coordination, Point::Jobs(25, 75), 4)
        .unwrap();
    s.save(&path).unwrap();
    assert_eq!(Scenario::load(&path).unwrap(), s);
    std::fs::write(&path, "{\"model\": \"interview\"}").unwrap();
    assert!(Scenario::load(&path).is_err());
    assert!(Scenario::load(&dir.path().join("missing.json")).is_err());
}
