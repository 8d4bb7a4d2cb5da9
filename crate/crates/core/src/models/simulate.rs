//! Seeded Monte Carlo estimation of expected employment.

use rand::seq::SliceRandom;
use rand::Rng;

use super::bipartite::HopcroftKarp;
use super::seed::{group_seed, sample_rng};
use super::{group_pairs, GroupKey, ModelKind, Scenario};
use crate::error::{Error, Result};
use crate::matroid::Matching;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorConfig {
    pub samples: u32,
    pub seed: u64,
    /// Groups with at most this many agents may be valued by an exact oracle
    /// instead of sampling (0 disables this). Sampled estimators ignore it.
    pub exact_cutoff: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            samples: 1000,
            seed: 0,
            exact_cutoff: 0,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Scratch space for simulating one group.
#[derive(Debug, Default)]
struct Simulator {
    order: Vec<usize>,
    edges: Vec<(usize, usize)>,
    matcher: HopcroftKarp,
}

impl Simulator {
    fn correction<R: Rng>(
        &mut self,
        scenario: &Scenario,
        key: GroupKey,
        agents: &[usize],
        rng: &mut R,
        c: &super::CorrectionFunction,
    ) -> f64 {
        let qualified = agents
            .iter()
            .filter(|&&a| bernoulli(rng, scenario.agents()[a].p(key.locality)))
            .count();
        c.eval(qualified as u32)
    }

    fn interview<R: Rng>(
        &mut self,
        scenario: &Scenario,
        key: GroupKey,
        agents: &[usize],
        rng: &mut R,
        jobs: u32,
    ) -> f64 {
        self.order.clear();
        self.order.extend_from_slice(agents);
        self.order.shuffle(rng);
        let mut open = jobs;
        let mut employed = 0u32;
        for &a in &self.order {
            if open == 0 {
                break;
            }
            let p = scenario.agents()[a].p(key.locality);
            // One application per open job until the first acceptance.
            for _ in 0..open {
                if bernoulli(rng, p) {
                    employed += 1;
                    open -= 1;
                    break;
                }
            }
        }
        f64::from(employed)
    }

    fn coordination<R: Rng>(
        &mut self,
        scenario: &Scenario,
        key: GroupKey,
        agents: &[usize],
        rng: &mut R,
    ) -> f64 {
        let table = scenario.compat(key.locality);
        self.edges.clear();
        for (i, &a) in agents.iter().enumerate() {
            for (j, &p) in table.row(a).iter().enumerate() {
                if bernoulli(rng, p) {
                    self.edges.push((i, j));
                }
            }
        }
        self.matcher
            .max_matching(agents.len(), table.jobs(), &self.edges) as f64
    }
}

#[inline]
fn bernoulli<R: Rng>(rng: &mut R, p: f64) -> bool {
    if p <= 0.0 {
        false
    } else if p >= 1.0 {
        true
    } else {
        rng.gen::<f64>() < p
    }
}

/// Sample mean of one group's employment. `agents` must be sorted; sample `r`
/// draws from the substream `(master_seed, key, agents, r)`.
pub fn estimate_group(
    scenario: &Scenario,
    key: GroupKey,
    agents: &[usize],
    samples: u32,
    master_seed: u64,
) -> f64 {
    debug_assert!(agents.windows(2).all(|w| w[0] < w[1]));
    if agents.is_empty() || samples == 0 {
        return 0.0;
    }
    let locality = &scenario.localities()[key.locality];
    let base = group_seed(master_seed, key, agents);
    let mut sim = Simulator::default();
    let model = scenario.model();
    let correction = match (model, key.profession) {
        (ModelKind::Correction, Some(prof)) => Some(scenario.correction(key.locality, prof)),
        _ => None,
    };
    let jobs = key.profession.map_or(0, |prof| locality.jobs_of(prof));
    let mut total = 0.0;
    for r in 0..samples {
        let mut rng = sample_rng(base, r);
        total += match model {
            ModelKind::Correction => sim.correction(
                scenario,
                key,
                agents,
                &mut rng,
                correction
                    .as_ref()
                    .expect("correction groups carry a profession"),
            ),
            ModelKind::Interview => sim.interview(scenario, key, agents, &mut rng, jobs),
            ModelKind::Coordination => sim.coordination(scenario, key, agents, &mut rng),
        };
    }
    total / f64::from(samples)
}

/// Monte Carlo estimate of the expected employment under a feasible
/// matching: the sum of per-group sample means.
pub fn model_expected_mc(
    matching: &Matching,
    scenario: &Scenario,
    cfg: &EstimatorConfig,
) -> Result<f64> {
    cfg.validate()?;
    matching.validate(scenario)?;
    Ok(group_pairs(scenario, matching.pairs().iter().copied())
        .iter()
        .map(|(&key, agents)| estimate_group(scenario, key, agents, cfg.samples, cfg.seed))
        .sum())
}
