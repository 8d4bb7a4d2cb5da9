//! Random scenario generators for the experiment families.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

use crate::error::{Error, Result};
use crate::models::{
    AgentRecord, LocalityRecord, ModelKind, ProbabilitySpec, Scenario, ScenarioFile,
};

/// Per-locality job counts by profession.
type JobTable = Vec<BTreeMap<u32, u32>>;

fn rng_for(seed: u64) -> Pcg64Mcg {
    Pcg64Mcg::seed_from_u64(seed)
}

/// Agents with the given professions and one `p ~ U[0, 1]` each, the same at
/// every locality.
fn agents(professions: &[u32], rng: &mut impl Rng) -> Vec<AgentRecord> {
    professions
        .iter()
        .enumerate()
        .map(|(id, &profession)| AgentRecord {
            id: id as u32,
            profession,
            p: ProbabilitySpec::Uniform(rng.gen::<f64>()),
        })
        .collect()
}

/// `n` agents, half in profession 1 and half in profession 2, in random order.
fn two_professions(n: u32, rng: &mut impl Rng) -> Vec<u32> {
    let mut v: Vec<u32> = (0..n).map(|i| if i < n / 2 { 1 } else { 2 }).collect();
    v.shuffle(rng);
    v
}

fn build(
    model: ModelKind,
    agents: Vec<AgentRecord>,
    jobs: JobTable,
    capacities: Vec<u32>,
) -> Result<Scenario> {
    let localities = jobs
        .into_iter()
        .zip(capacities)
        .enumerate()
        .map(|(id, (mut jobs, capacity))| {
            jobs.retain(|_, n| *n > 0);
            LocalityRecord {
                id: id as u32,
                capacity,
                jobs,
            }
        })
        .collect();
    Scenario::try_from(ScenarioFile {
        model,
        agents,
        localities,
        p_table: Vec::new(),
        corrections: Vec::new(),
        allowed_pairs: None,
    })
}

fn add_job(table: &mut JobTable, locality: usize, profession: u32) {
    *table[locality].entry(profession).or_insert(0) += 1;
}

/// Deals a shuffled job list out in consecutive runs of `per_locality`.
fn deal(
    mut jobs: Vec<u32>,
    localities: usize,
    per_locality: usize,
    rng: &mut impl Rng,
) -> JobTable {
    jobs.shuffle(rng);
    let mut table = vec![BTreeMap::new(); localities];
    for (i, prof) in jobs.into_iter().enumerate() {
        add_job(&mut table, i / per_locality, prof);
    }
    table
}

fn totals(table: &JobTable) -> Vec<u32> {
    table.iter().map(|jobs| jobs.values().sum()).collect()
}

/// The standard setting: `n_agents` split evenly over professions 1 and 2,
/// `n_agents` jobs (half per profession) spread over the localities with at
/// least one job each, and every capacity equal to the job count.
pub fn generate_standard(
    model: ModelKind,
    n_agents: u32,
    n_localities: u32,
    seed: u64,
) -> Result<Scenario> {
    if n_agents == 0 || n_agents % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "the standard setting needs a positive even number of agents, got {n_agents}"
        )));
    }
    if n_localities == 0 || n_localities > n_agents {
        return Err(Error::InvalidArgument(format!(
            "{n_localities} localities cannot each receive one of {n_agents} jobs"
        )));
    }
    let mut rng = rng_for(seed);
    let agents = agents(&two_professions(n_agents, &mut rng), &mut rng);
    let localities = n_localities as usize;
    let mut left = [n_agents / 2, n_agents / 2];
    let mut table = vec![BTreeMap::new(); localities];
    for l in 0..localities {
        let open: Vec<usize> = (0..2).filter(|&i| left[i] > 0).collect();
        let i = *open
            .choose(&mut rng)
            .expect("jobs remain for every locality");
        left[i] -= 1;
        add_job(&mut table, l, i as u32 + 1);
    }
    for (i, &n) in left.iter().enumerate() {
        for _ in 0..n {
            add_job(&mut table, rng.gen_range(0..localities), i as u32 + 1);
        }
    }
    let caps = totals(&table);
    build(model, agents, table, caps)
}

/// Ten localities with capacity and job count `n / 10` each; the `n / 2`
/// jobs of each profession are dealt out at random.
pub fn generate_num_agents(model: ModelKind, n_agents: u32, seed: u64) -> Result<Scenario> {
    if n_agents == 0 || n_agents % 10 != 0 {
        return Err(Error::InvalidArgument(format!(
            "number of agents must be a positive multiple of 10, got {n_agents}"
        )));
    }
    let mut rng = rng_for(seed);
    let agents = agents(&two_professions(n_agents, &mut rng), &mut rng);
    let per = (n_agents / 10) as usize;
    let jobs = two_professions(n_agents, &mut rng);
    let table = deal(jobs, 10, per, &mut rng);
    build(model, agents, table, vec![per as u32; 10])
}

/// 100 agents over `professions` professions, each profession held by at
/// least one agent; one job per agent, dealt ten per locality.
pub fn generate_num_professions(model: ModelKind, professions: u32, seed: u64) -> Result<Scenario> {
    if professions == 0 || professions > 100 {
        return Err(Error::InvalidArgument(format!(
            "number of professions must lie in 1..=100, got {professions}"
        )));
    }
    let mut rng = rng_for(seed);
    let mut profs: Vec<u32> = (1..=professions).collect();
    profs.extend((professions..100).map(|_| rng.gen_range(1..=professions)));
    profs.shuffle(&mut rng);
    let agents = agents(&profs, &mut rng);
    let table = deal(profs, 10, 10, &mut rng);
    build(model, agents, table, vec![10; 10])
}

/// 100 agents (50 per profession), ten localities of capacity 10, and
/// `jobs_1` / `jobs_2` jobs of each profession placed uniformly at random.
pub fn generate_job_availability(
    model: ModelKind,
    jobs_1: u32,
    jobs_2: u32,
    seed: u64,
) -> Result<Scenario> {
    let mut rng = rng_for(seed);
    let agents = agents(&two_professions(100, &mut rng), &mut rng);
    let mut table = vec![BTreeMap::new(); 10];
    for (prof, n) in [(1, jobs_1), (2, jobs_2)] {
        for _ in 0..n {
            add_job(&mut table, rng.gen_range(0..10), prof);
        }
    }
    build(model, agents, table, vec![10; 10])
}

/// 100 agents (50 per profession), ten localities of capacity 10 with ten
/// jobs each: `s` localities with 8/2 jobs for professions 1/2, `s` with
/// 2/8, and the rest 5/5.
pub fn generate_specialization(model: ModelKind, s: u32, seed: u64) -> Result<Scenario> {
    if s > 5 {
        return Err(Error::InvalidArgument(format!(
            "specialization must lie in 0..=5, got {s}"
        )));
    }
    let mut rng = rng_for(seed);
    let agents = agents(&two_professions(100, &mut rng), &mut rng);
    let table = (0..10)
        .map(|l| {
            let (a, b) = if l < s {
                (8, 2)
            } else if l < 2 * s {
                (2, 8)
            } else {
                (5, 5)
            };
            BTreeMap::from([(1, a), (2, b)])
        })
        .collect();
    build(model, agents, table, vec![10; 10])
}
