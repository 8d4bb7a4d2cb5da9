//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::time::{Duration, Instant};

use submigrate::harness::{
    run_experiment, run_trial, ExperimentRecord, ExperimentSpec, Family, Point,
};
use submigrate::models::ModelKind;
use submigrate::selftest::{self, SuiteReport};

const SEED: u64 = 20_190_127;

struct Gate {
    failed: Vec<&'static str>,
}

impl Gate {
    fn report(&mut self, name: &'static str, passed: bool, detail: String) {
        println!(
            "[{}] {name}: {detail}",
            if passed { "PASS" } else { "FAIL" }
        );
        if !passed {
            self.failed.push(name);
        }
    }

    fn suites(&mut self, name: &'static str, reports: &[SuiteReport], budget: Option<Duration>) {
        let elapsed: Duration = reports.iter().map(|r| r.elapsed).sum();
        let within = budget.map_or(true, |b| elapsed < b);
        let detail = reports
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(" | ");
        self.report(
            name,
            within && reports.iter().all(SuiteReport::passed),
            format!("{detail} [total {:.1}s]", elapsed.as_secs_f64()),
        );
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn submodularity(gate: &mut Gate) {
    let reports: Vec<_> = ModelKind::ALL
        .iter()
        .map(|&m| selftest::submodularity(m, 20, SEED))
        .collect();
    gate.suites(
        "submodularity and monotonicity",
        &reports,
        Some(Duration::from_secs(120)),
    );
}

fn interview_supermodularity(gate: &mut Gate) {
    let reports = [
        selftest::interview_supermodularity(5, SEED),
        selftest::open_positions_convexity(50, SEED),
    ];
    gate.suites(
        "interview supermodularity and open-position convexity",
        &reports,
        None,
    );
}

fn matching_submodularity(gate: &mut Gate) {
    gate.suites(
        "matching-size submodularity",
        &[selftest::matching_submodularity(100, SEED)],
        None,
    );
}

fn greedy_ratio(gate: &mut Gate) {
    gate.suites(
        "greedy approximation ratio",
        &[selftest::greedy_ratio(500, &[0.05, 0.1], SEED)],
        None,
    );
}

fn additive_exactness(gate: &mut Gate) {
    gate.suites(
        "additive solver exactness",
        &[selftest::additive_exactness(500, SEED)],
        None,
    );
}

fn standard_setting_trend(gate: &mut Gate) {
    let started = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for model in ModelKind::ALL {
        let spec = ExperimentSpec {
            values: vec![Point::Count(10)],
            trials: 30,
            seed: SEED,
            ..ExperimentSpec::new(Family::NumLocalities, model)
        };
        let records: Vec<ExperimentRecord> = (0..spec.trials)
            .map(|t| run_trial(&spec, Point::Count(10), t, false).expect("trial runs"))
            .collect();
        let improvements: Vec<f64> = records
            .iter()
            .map(|r| r.rel_improvement.expect("additive utility is positive"))
            .collect();
        let med = median(improvements);
        let close = records
            .iter()
            .filter(|r| r.greedy_utility >= 0.97 * r.additive_utility)
            .count();
        let needed = if model == ModelKind::Correction {
            0.0
        } else {
            0.05
        };
        let model_ok = med >= needed && close as f64 >= 0.9 * records.len() as f64;
        ok &= model_ok;
        details.push(format!(
            "{model}: median {:+.1}% (need ≥ {:+.0}%), greedy ≥ 0.97·additive in {close}/{}",
            100.0 * med,
            100.0 * needed,
            records.len()
        ));
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(30 * 60);
    gate.report(
        "standard-setting improvement trend",
        ok,
        format!("{} [{:.0}s]", details.join("; "), elapsed.as_secs_f64()),
    );
}

fn correction_saturation(gate: &mut Gate) {
    let spec = ExperimentSpec {
        values: vec![Point::Count(200)],
        trials: 10,
        seed: SEED,
        ..ExperimentSpec::new(Family::NumAgents, ModelKind::Correction)
    };
    let utilities: Vec<f64> = (0..spec.trials)
        .map(|t| {
            run_trial(&spec, Point::Count(200), t, false)
                .expect("trial runs")
                .additive_utility
        })
        .collect();
    let mean = utilities.iter().sum::<f64>() / utilities.len() as f64;
    let (lo, hi) = utilities
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &u| {
            (a.min(u), b.max(u))
        });
    gate.report(
        "correction saturation at n = 200",
        (mean - 100.0).abs() <= 10.0,
        format!(
            "mean additive utility {mean:.2} over {} seeds (range {lo:.2}–{hi:.2}), target 100 ± 10",
            utilities.len()
        ),
    );
}

/// CSV text with the two timing columns removed.
fn untimed_csv(path: &std::path::Path) -> String {
    std::fs::read_to_string(path)
        .expect("csv written")
        .lines()
        .map(|line| line.rsplitn(3, ',').nth(2).unwrap_or_default().to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism(gate: &mut Gate) {
    let mut same = true;
    let mut rows = 0;
    for model in ModelKind::ALL {
        let spec = ExperimentSpec {
            values: vec![Point::Count(2), Point::Count(5)],
            trials: 2,
            seed: SEED,
            ..ExperimentSpec::new(Family::NumLocalities, model)
        };
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let texts: Vec<String> = dirs
            .iter()
            .map(|d| untimed_csv(&run_experiment(&spec, d.path(), |_| {}).expect("run").csv))
            .collect();
        rows += texts[0].lines().count() - 1;
        same &= texts[0] == texts[1];
    }
    gate.report(
        "determinism",
        same,
        format!("two runs per model, {rows} rows compared without timing columns"),
    );
}

fn main() {
    let mut gate = Gate { failed: Vec::new() };
    submodularity(&mut gate);
    interview_supermodularity(&mut gate);
    matching_submodularity(&mut gate);
    greedy_ratio(&mut gate);
    additive_exactness(&mut gate);
    standard_setting_trend(&mut gate);
    correction_saturation(&mut gate);
    determinism(&mut gate);
    if gate.failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!(
            "acceptance: {} failed: {}",
            gate.failed.len(),
            gate.failed.join(", ")
        );
        std::process::exit(1);
    }
}
