use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use submigrate::harness::{run_experiment, run_point, ExperimentSpec, Family, PointConfig};
use submigrate::models::{ModelKind, Scenario};
use submigrate::selftest;

#[derive(Parser)]
#[command(
    name = "submigrate",
    version,
    about = "Greedy vs. additive matching of migrants to localities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment family for one model and append results to
    /// `<out>/<family>-<model>.csv` and `.jsonl`.
    Run(RunArgs),
    /// Generate, validate or solve scenario files.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
    /// Run the exhaustive small-instance property suites.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    model: ModelKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    trials: u32,
    #[arg(long, default_value_t = 1000)]
    samples: u32,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated swept values (`a:b` pairs for job_availability);
    /// defaults to the family's grid.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<String>>,
    /// Value groups of at most this many agents exactly during greedy.
    #[arg(long, default_value_t = 0)]
    exact_cutoff: usize,
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Write a generated scenario to a file.
    Gen {
        file: PathBuf,
        #[arg(long, default_value = "num_localities")]
        family: Family,
        #[arg(long, default_value = "interview")]
        model: ModelKind,
        /// Family value; defaults to the middle of the family's grid.
        #[arg(long)]
        value: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a scenario file and print a summary.
    Validate { file: PathBuf },
    /// Run greedy and the additive baseline on a scenario file.
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: u32,
        #[arg(long, default_value_t = 0)]
        exact_cutoff: usize,
    },
}

fn init_threads() -> anyhow::Result<()> {
    let threads = match std::env::var("SUBMIGRATE_THREADS") {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("SUBMIGRATE_THREADS must be a positive integer, got {v:?}"))?,
        Err(_) => 1,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("building the worker pool")
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let mut spec = ExperimentSpec::new(args.family, args.model);
    spec.seed = args.seed;
    spec.trials = args.trials;
    spec.samples = args.samples;
    spec.exact_cutoff = args.exact_cutoff;
    if let Some(values) = args.values {
        spec.values = values
            .iter()
            .map(|v| args.family.parse_point(v))
            .collect::<Result<_, _>>()?;
    }
    let summary = run_experiment(&spec, &args.out, |r| {
        let rel = r
            .rel_improvement
            .map_or_else(|| "n/a".to_string(), |v| format!("{:+.1}%", 100.0 * v));
        eprintln!(
            "{} {} x={} trial={} greedy={:.3} additive={:.3} ({rel})",
            r.family, r.model, r.x, r.trial, r.greedy_utility, r.additive_utility
        );
    })?;
    println!(
        "{} new records, {} already present -> {}",
        summary.written.len(),
        summary.skipped,
        summary.csv.display()
    );
    Ok(())
}

fn scenario(cmd: ScenarioCommand) -> anyhow::Result<()> {
    match cmd {
        ScenarioCommand::Gen {
            file,
            family,
            model,
            value,
            seed,
        } => {
            let point = match value {
                Some(v) => family.parse_point(&v)?,
                None => {
                    let grid = family.default_values();
                    grid[grid.len() / 2]
                }
            };
            family.generate(model, point, seed)?.save(&file)?;
            println!("wrote {} ({family} = {point}, {model})", file.display());
        }
        ScenarioCommand::Validate { file } => {
            let s = Scenario::load(&file)?;
            let jobs: u32 = s.localities().iter().map(|l| l.total_jobs()).sum();
            let capacity: u32 = s.localities().iter().map(|l| l.capacity).sum();
            println!(
                "ok: {} model, {} agents, {} localities, {jobs} jobs, total capacity {capacity}",
                s.model(),
                s.agents().len(),
                s.localities().len()
            );
        }
        ScenarioCommand::Solve {
            file,
            seed,
            samples,
            exact_cutoff,
        } => {
            let s = Scenario::load(&file)?;
            let out = run_point(
                &s,
                seed,
                PointConfig {
                    samples,
                    exact_cutoff,
                    ..PointConfig::default()
                },
            )?;
            let show = |m: &submigrate::matroid::Matching| {
                m.pairs()
                    .iter()
                    .map(|p| {
                        format!(
                            "{}->{}",
                            s.agents()[p.agent].id,
                            s.localities()[p.locality].id
                        )
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            println!(
                "greedy   {:.4}  [{}]",
                out.greedy_utility,
                show(&out.greedy)
            );
            println!(
                "additive {:.4}  [{}]",
                out.additive_utility,
                show(&out.additive)
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::Run(args) => run(args),
        Command::Scenario(cmd) => scenario(cmd),
        Command::Selftest { seed } => {
            let reports = selftest::run_all(seed);
            for r in &reports {
                println!("{r}");
            }
            if reports.iter().all(|r| r.passed()) {
                Ok(())
            } else {
                bail!("selftest failed")
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
