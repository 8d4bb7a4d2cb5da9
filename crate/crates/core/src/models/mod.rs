//! The three competition models: retroactive correction, interviews and
//! coordinated hiring. Each offers an exact expectation for small groups and a
//! seeded Monte Carlo estimator for any size.

use std::collections::BTreeMap;

mod bipartite;
mod correction;
pub mod exact;
mod scenario;
pub mod seed;
mod simulate;
mod solo;

pub use bipartite::{hopcroft_karp, HopcroftKarp};
pub use correction::CorrectionFunction;
pub use exact::{
    coordination_expected_exact, correction_expected_exact, group_value_exact,
    interview_employment_fixed_order, interview_expected_exact, interview_open_positions_exact,
    model_expected_exact, ExactLimits,
};
pub use scenario::{
    Agent, AgentRecord, CompatTable, CorrectionEntry, Locality, LocalityRecord, ModelKind,
    PTableEntry, ProbabilitySpec, Scenario, ScenarioFile, ScenarioLoadError,
};
pub use simulate::{estimate_group, model_expected_mc, EstimatorConfig};
pub use solo::solo_probability;

use crate::matroid::Pair;

/// The unit at which employment is computed: a locality, plus a profession
/// for the models that separate professions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupKey {
    pub locality: usize,
    pub profession: Option<u32>,
}

impl GroupKey {
    pub fn new(locality: usize, profession: Option<u32>) -> Self {
        GroupKey {
            locality,
            profession,
        }
    }

    pub fn of(scenario: &Scenario, pair: Pair) -> Self {
        let profession = scenario
            .model()
            .splits_by_profession()
            .then(|| scenario.agents()[pair.agent].profession);
        GroupKey::new(pair.locality, profession)
    }
}

/// Splits pairs into groups; each group's agents are sorted and distinct.
pub fn group_pairs(
    scenario: &Scenario,
    pairs: impl IntoIterator<Item = Pair>,
) -> BTreeMap<GroupKey, Vec<usize>> {
    let mut groups: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
    for pair in pairs {
        groups
            .entry(GroupKey::of(scenario, pair))
            .or_default()
            .push(pair.agent);
    }
    for agents in groups.values_mut() {
        agents.sort_unstable();
        agents.dedup();
    }
    groups
}
