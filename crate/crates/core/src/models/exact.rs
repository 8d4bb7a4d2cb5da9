//! Exact expected-employment oracles for small groups.

use itertools::Itertools;

use super::bipartite::HopcroftKarp;
use super::correction::CorrectionFunction;
use super::{group_pairs, GroupKey, ModelKind, Scenario};
use crate::error::{Error, Result};
use crate::matroid::Pair;

/// Size limits for exact evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactLimits {
    /// Maximum agents in one group (all `n!` orders are enumerated for the
    /// interview model).
    pub group_cutoff: usize,
    /// Maximum number of uncertain (`0 < p < 1`) agent–job edges enumerated
    /// for the coordination model.
    pub edge_budget: usize,
}

pub const DEFAULT_EXACT_CUTOFF: usize = 7;
pub const DEFAULT_EDGE_BUDGET: usize = 20;

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            group_cutoff: DEFAULT_EXACT_CUTOFF,
            edge_budget: DEFAULT_EDGE_BUDGET,
        }
    }
}

impl ExactLimits {
    pub fn with_cutoff(group_cutoff: usize) -> Self {
        ExactLimits {
            group_cutoff,
            ..Default::default()
        }
    }
}

fn check_size(size: usize, cutoff: usize) -> Result<()> {
    if size > cutoff {
        Err(Error::OversizeGroup { size, cutoff })
    } else {
        Ok(())
    }
}

/// Distribution of the number of successes among independent coins.
pub fn poisson_binomial(probs: &[f64]) -> Vec<f64> {
    let mut dist = vec![0.0; probs.len() + 1];
    dist[0] = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        for n in (0..=i + 1).rev() {
            let stay = dist[n] * (1.0 - p);
            let up = if n > 0 { dist[n - 1] * p } else { 0.0 };
            dist[n] = stay + up;
        }
    }
    dist
}

/// `E[C(#qualifying agents)]` for one (locality, profession) group.
pub fn correction_expected_exact(
    probs: &[f64],
    correction: &CorrectionFunction,
    cutoff: usize,
) -> Result<f64> {
    check_size(probs.len(), cutoff)?;
    Ok(poisson_binomial(probs)
        .iter()
        .enumerate()
        .map(|(n, w)| w * correction.eval(n as u32))
        .sum())
}

/// Distribution over the number of jobs still open after the agents apply in
/// the given order, starting from `jobs` open positions. An agent facing `k`
/// open jobs is hired with probability `1 − (1 − p)^k`.
fn open_positions_distribution(order: &[f64], jobs: u32) -> Vec<f64> {
    let k_max = jobs as usize;
    let mut dist = vec![0.0; k_max + 1];
    dist[k_max] = 1.0;
    for &p in order {
        let miss = 1.0 - p;
        let mut miss_k = 1.0;
        // dist[k] only flows into dist[k] and dist[k - 1]; ascending k keeps
        // each mass moved once.
        for k in 1..=k_max {
            miss_k *= miss;
            let hired = dist[k] * (1.0 - miss_k);
            dist[k] -= hired;
            dist[k - 1] += hired;
        }
    }
    dist
}

/// Expected number of the `jobs` positions left open when the agents apply
/// in exactly this order.
pub fn interview_open_positions_exact(order: &[f64], jobs: u32) -> f64 {
    open_positions_distribution(order, jobs)
        .iter()
        .enumerate()
        .map(|(k, w)| k as f64 * w)
        .sum()
}

/// Expected employment for a fixed application order.
pub fn interview_employment_fixed_order(order: &[f64], jobs: u32) -> f64 {
    f64::from(jobs) - interview_open_positions_exact(order, jobs)
}

/// Expected employment in one (locality, profession) group, averaged over
/// all application orders.
pub fn interview_expected_exact(probs: &[f64], jobs: u32, cutoff: usize) -> Result<f64> {
    check_size(probs.len(), cutoff)?;
    if jobs == 0 || probs.is_empty() {
        return Ok(0.0);
    }
    let n = probs.len();
    let mut order = Vec::with_capacity(n);
    let mut total = 0.0;
    let mut count = 0usize;
    for perm in (0..n).permutations(n) {
        order.clear();
        order.extend(perm.iter().map(|&i| probs[i]));
        total += interview_employment_fixed_order(&order, jobs);
        count += 1;
    }
    Ok(total / count as f64)
}

/// Expected maximum-matching size of the random compatibility graph whose
/// edge `(i, j)` is present with probability `rows[i][j]`.
pub fn coordination_expected_exact(rows: &[&[f64]], edge_budget: usize) -> Result<f64> {
    let mut certain = Vec::new();
    let mut uncertain = Vec::new();
    let mut jobs = 0;
    for (i, row) in rows.iter().enumerate() {
        jobs = jobs.max(row.len());
        for (j, &p) in row.iter().enumerate() {
            if p >= 1.0 {
                certain.push((i, j));
            } else if p > 0.0 {
                uncertain.push(((i, j), p));
            }
        }
    }
    check_size(uncertain.len(), edge_budget)?;
    let mut hk = HopcroftKarp::default();
    let mut edges = Vec::with_capacity(certain.len() + uncertain.len());
    let mut total = 0.0;
    for mask in 0u64..(1u64 << uncertain.len()) {
        edges.clear();
        edges.extend_from_slice(&certain);
        let mut weight = 1.0;
        for (bit, &(edge, p)) in uncertain.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                weight *= p;
                edges.push(edge);
            } else {
                weight *= 1.0 - p;
            }
        }
        total += weight * hk.max_matching(rows.len(), jobs, &edges) as f64;
    }
    Ok(total)
}

/// Exact expected employment of one group of agents (sorted agent indices).
pub fn group_value_exact(
    scenario: &Scenario,
    key: GroupKey,
    agents: &[usize],
    limits: ExactLimits,
) -> Result<f64> {
    let locality = &scenario.localities()[key.locality];
    let probs = || -> Vec<f64> {
        agents
            .iter()
            .map(|&a| scenario.agents()[a].p(key.locality))
            .collect()
    };
    match scenario.model() {
        ModelKind::Correction => {
            let profession = key
                .profession
                .expect("correction groups carry a profession");
            correction_expected_exact(
                &probs(),
                &scenario.correction(key.locality, profession),
                limits.group_cutoff,
            )
        }
        ModelKind::Interview => {
            let profession = key.profession.expect("interview groups carry a profession");
            interview_expected_exact(&probs(), locality.jobs_of(profession), limits.group_cutoff)
        }
        ModelKind::Coordination => {
            check_size(agents.len(), limits.group_cutoff)?;
            let table = scenario.compat(key.locality);
            let rows: Vec<&[f64]> = agents.iter().map(|&a| table.row(a)).collect();
            coordination_expected_exact(&rows, limits.edge_budget)
        }
    }
}

/// Exact expected employment of a set of pairs, summed over its groups.
/// Feasibility is not required: each pair simply joins its group.
pub fn model_expected_exact(
    scenario: &Scenario,
    pairs: &[Pair],
    limits: ExactLimits,
) -> Result<f64> {
    group_pairs(scenario, pairs.iter().copied())
        .iter()
        .map(|(&key, agents)| group_value_exact(scenario, key, agents, limits))
        .sum()
}
