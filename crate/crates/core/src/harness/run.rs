use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::memo::{MemoCache, MemoStats, ModelOracle};
use super::spec::{ExperimentSpec, Family, Point};
use crate::additive::{solve_additive, AdditiveInstance};
use crate::error::{Error, Result};
use crate::greedy::{greedy_maximize, GreedyConfig, GreedyTrace};
use crate::matroid::{build_matching_matroids, Matching, Pair};
use crate::models::exact::{group_value_exact, ExactLimits};
use crate::models::seed::derive;
use crate::models::{
    model_expected_mc, solo_probability, EstimatorConfig, GroupKey, ModelKind, Scenario,
};

const TRAIN_STREAM: u64 = 0x7472_6169_6e;
const EVAL_STREAM: u64 = 0x6576_616c;

const SOLO_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointConfig {
    pub samples: u32,
    pub exact_cutoff: usize,
    /// Share estimates between greedy queries.
    pub memo: bool,
    /// Evaluate each greedy round's candidates on the rayon pool.
    pub parallel: bool,
}

impl Default for PointConfig {
    fn default() -> Self {
        PointConfig {
            samples: 1000,
            exact_cutoff: 0,
            memo: true,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub greedy: Matching,
    pub additive: Matching,
    pub greedy_utility: f64,
    pub additive_utility: f64,
    pub greedy_ms: f64,
    pub additive_ms: f64,
    pub trace: GreedyTrace,
    pub memo: MemoStats,
}

/// Seed used for the final, cache-free scoring of both matchings.
pub fn evaluation_seed(trial_seed: u64) -> u64 {
    derive(trial_seed, &[EVAL_STREAM])
}

/// Seed of the estimates queried by greedy.
pub fn training_seed(trial_seed: u64) -> u64 {
    derive(trial_seed, &[TRAIN_STREAM])
}

/// Checks every solo-probability weight against the exact oracle on the
/// singleton group, where the oracle is within its limits.
pub fn check_solo_weights(scenario: &Scenario) -> Result<()> {
    let limits = ExactLimits::default();
    for agent in 0..scenario.agents().len() {
        for locality in 0..scenario.localities().len() {
            let pair = Pair::new(agent, locality);
            let key = GroupKey::of(scenario, pair);
            let exact = match group_value_exact(scenario, key, &[agent], limits) {
                Ok(v) => v,
                Err(Error::OversizeGroup { .. }) => continue,
                Err(e) => return Err(e),
            };
            let solo = solo_probability(scenario, agent, locality);
            if (exact - solo).abs() > SOLO_TOLERANCE {
                return Err(Error::Oracle(format!(
                    "solo probability {solo} of agent {agent} at locality {locality} \
                     disagrees with the exact value {exact}"
                )));
            }
        }
    }
    Ok(())
}

/// Runs greedy and the additive baseline on one scenario and scores both
/// results with fresh estimates under the evaluation seed.
pub fn run_point(scenario: &Scenario, trial_seed: u64, cfg: PointConfig) -> Result<PointOutcome> {
    let family = build_matching_matroids(scenario)?;
    let ground = family.ground();

    let started = Instant::now();
    let memo = MemoCache::new();
    let train = EstimatorConfig {
        samples: cfg.samples,
        seed: training_seed(trial_seed),
        exact_cutoff: cfg.exact_cutoff,
    };
    let oracle = ModelOracle::new(scenario, ground, train, cfg.memo.then_some(&memo));
    let trace = greedy_maximize(
        &oracle,
        &family,
        GreedyConfig {
            parallel: cfg.parallel,
            lazy: false,
        },
    )?;
    let greedy = Matching::from_elements(ground, &trace.selected)?;
    let greedy_ms = started.elapsed().as_secs_f64() * 1e3;

    let started = Instant::now();
    check_solo_weights(scenario)?;
    let additive = solve_additive(&AdditiveInstance::from_scenario(scenario)?).matching;
    let additive_ms = started.elapsed().as_secs_f64() * 1e3;

    let eval = EstimatorConfig {
        samples: cfg.samples,
        seed: evaluation_seed(trial_seed),
        exact_cutoff: 0,
    };
    Ok(PointOutcome {
        greedy_utility: model_expected_mc(&greedy, scenario, &eval)?,
        additive_utility: model_expected_mc(&additive, scenario, &eval)?,
        greedy,
        additive,
        greedy_ms,
        additive_ms,
        trace,
        memo: memo.stats(),
    })
}

/// One CSV / JSON-lines row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub family: Family,
    pub model: ModelKind,
    pub x: String,
    pub trial: u32,
    pub seed: u64,
    pub greedy_utility: f64,
    pub additive_utility: f64,
    /// `greedy / additive − 1`; empty when the additive utility is 0.
    pub rel_improvement: Option<f64>,
    pub greedy_ms: f64,
    pub additive_ms: f64,
}

pub const CSV_COLUMNS: [&str; 10] = [
    "family",
    "model",
    "x",
    "trial",
    "seed",
    "greedy_utility",
    "additive_utility",
    "rel_improvement",
    "greedy_ms",
    "additive_ms",
];

pub fn relative_improvement(greedy: f64, additive: f64) -> Option<f64> {
    (additive > 0.0).then(|| greedy / additive - 1.0)
}

/// Generates and runs one (point, trial) of the spec.
pub fn run_trial(
    spec: &ExperimentSpec,
    point: Point,
    trial: u32,
    parallel: bool,
) -> Result<ExperimentRecord> {
    let seed = spec.trial_seed(point, trial);
    let scenario = spec.scenario(point, trial)?;
    let out = run_point(
        &scenario,
        seed,
        PointConfig {
            samples: spec.samples,
            exact_cutoff: spec.exact_cutoff,
            memo: true,
            parallel,
        },
    )?;
    Ok(ExperimentRecord {
        family: spec.family,
        model: spec.model,
        x: point.to_string(),
        trial,
        seed,
        greedy_utility: out.greedy_utility,
        additive_utility: out.additive_utility,
        rel_improvement: relative_improvement(out.greedy_utility, out.additive_utility),
        greedy_ms: out.greedy_ms,
        additive_ms: out.additive_ms,
    })
}

/// `<family>-<model>.csv` and `.jsonl` inside the output directory.
pub fn output_paths(spec: &ExperimentSpec, out_dir: &Path) -> (PathBuf, PathBuf) {
    let stem = format!("{}-{}", spec.family, spec.model);
    (
        out_dir.join(format!("{stem}.csv")),
        out_dir.join(format!("{stem}.jsonl")),
    )
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::InvalidSpec(format!(
            "{} does not have the expected columns {}",
            path.display(),
            CSV_COLUMNS.join(",")
        )));
    }
    reader.deserialize().map(|r| r.map_err(csv_err)).collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSummary {
    pub written: Vec<ExperimentRecord>,
    pub skipped: usize,
    pub csv: PathBuf,
    pub jsonl: PathBuf,
}

struct Sinks {
    csv: csv::Writer<File>,
    csv_path: PathBuf,
    jsonl: BufWriter<File>,
    jsonl_path: PathBuf,
}

impl Sinks {
    fn open(csv_path: &Path, jsonl_path: &Path, new_csv: bool) -> Result<Self> {
        let append = |p: &Path| {
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| Error::io(p, e))
        };
        let csv = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(append(csv_path)?);
        let mut sinks = Sinks {
            csv,
            csv_path: csv_path.to_path_buf(),
            jsonl: BufWriter::new(append(jsonl_path)?),
            jsonl_path: jsonl_path.to_path_buf(),
        };
        if new_csv {
            sinks
                .csv
                .write_record(CSV_COLUMNS)
                .map_err(|e| sinks.csv_error(e))?;
        }
        Ok(sinks)
    }

    fn csv_error(&self, source: csv::Error) -> Error {
        Error::Csv {
            path: self.csv_path.clone(),
            source,
        }
    }

    fn write(&mut self, record: &ExperimentRecord) -> Result<()> {
        self.csv.serialize(record).map_err(|e| self.csv_error(e))?;
        let line = serde_json::to_string(record).map_err(|source| Error::Json {
            path: self.jsonl_path.clone(),
            source,
        })?;
        writeln!(self.jsonl, "{line}").map_err(|e| Error::io(&self.jsonl_path, e))
    }

    fn flush(&mut self) -> Result<()> {
        self.csv.flush().map_err(|e| Error::io(&self.csv_path, e))?;
        self.jsonl
            .flush()
            .map_err(|e| Error::io(&self.jsonl_path, e))
    }
}

/// Runs every (value, trial) of the spec that is not already in the output
/// CSV, appending new rows in spec order. Trials run in batches on the
/// current rayon pool; `on_record` sees each row as its batch is written.
pub fn run_experiment(
    spec: &ExperimentSpec,
    out_dir: &Path,
    mut on_record: impl FnMut(&ExperimentRecord),
) -> Result<RunSummary> {
    spec.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let (csv_path, jsonl_path) = output_paths(spec, out_dir);
    let has_rows = csv_path.exists() && !is_empty_file(&csv_path);
    let existing = if has_rows {
        read_records(&csv_path)?
    } else {
        Vec::new()
    };
    let done: HashSet<(String, u32)> = existing
        .iter()
        .filter(|r| r.family == spec.family && r.model == spec.model)
        .map(|r| (r.x.clone(), r.trial))
        .collect();
    let mut todo = Vec::new();
    let mut skipped = 0;
    for &point in &spec.values {
        for trial in 0..spec.trials {
            if done.contains(&(point.to_string(), trial)) {
                skipped += 1;
            } else {
                todo.push((point, trial));
            }
        }
    }

    let mut sinks = Sinks::open(&csv_path, &jsonl_path, !has_rows)?;
    let mut written = Vec::with_capacity(todo.len());
    let batch = rayon::current_num_threads().max(1);
    for chunk in todo.chunks(batch) {
        let records: Vec<Result<ExperimentRecord>> = chunk
            .par_iter()
            .map(|&(point, trial)| run_trial(spec, point, trial, false))
            .collect();
        for record in records {
            let record = record?;
            sinks.write(&record)?;
            on_record(&record);
            written.push(record);
        }
        sinks.flush()?;
    }
    sinks.flush()?;
    Ok(RunSummary {
        written,
        skipped,
        csv: csv_path,
        jsonl: jsonl_path,
    })
}

fn is_empty_file(path: &Path) -> bool {
    std::fs::metadata(path).map_or(true, |m| m.len() == 0)
}
