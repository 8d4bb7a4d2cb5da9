//! The additive baseline: a maximum-weight matching under locality
//! capacities, where a pair's weight is the agent's solo employment
//! probability there.

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::matroid::{Matching, Pair};
use crate::models::{solo_probability, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveInstance {
    /// `weights[i][ℓ]`, `None` where the pair is not allowed.
    weights: Vec<Vec<Option<f64>>>,
    capacities: Vec<u32>,
}

impl AdditiveInstance {
    pub fn new(weights: Vec<Vec<Option<f64>>>, capacities: Vec<u32>) -> Result<Self> {
        if weights.is_empty() || capacities.is_empty() {
            return Err(Error::EmptyScenario);
        }
        for (i, row) in weights.iter().enumerate() {
            if row.len() != capacities.len() {
                return Err(Error::InvalidArgument(format!(
                    "weight row {i} has {} entries for {} localities",
                    row.len(),
                    capacities.len()
                )));
            }
            if let Some(w) = row.iter().flatten().find(|w| !w.is_finite() || **w < 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "weight {w} in row {i} is not a finite nonnegative number"
                )));
            }
        }
        Ok(AdditiveInstance {
            weights,
            capacities,
        })
    }

    /// Solo probabilities of every allowed pair of the scenario.
    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        let agents = scenario.agents().len();
        let localities = scenario.localities().len();
        let mut weights = vec![vec![None; localities]; agents];
        let mut set = |p: Pair| {
            weights[p.agent][p.locality] = Some(solo_probability(scenario, p.agent, p.locality))
        };
        match scenario.allowed_pairs() {
            Some(pairs) => pairs.iter().copied().for_each(&mut set),
            None => (0..agents)
                .flat_map(|a| (0..localities).map(move |l| Pair::new(a, l)))
                .for_each(&mut set),
        }
        AdditiveInstance::new(
            weights,
            scenario.localities().iter().map(|l| l.capacity).collect(),
        )
    }

    pub fn weights(&self) -> &[Vec<Option<f64>>] {
        &self.weights
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    /// Sum of the weights of `matching`'s pairs.
    pub fn value_of(&self, matching: &Matching) -> f64 {
        matching
            .pairs()
            .iter()
            .map(|p| self.weights[p.agent][p.locality].unwrap_or(0.0))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveSolution {
    pub matching: Matching,
    pub value: f64,
}

/// Maximum-weight matching by successive shortest paths on
/// source → agent → locality → sink. Zero-weight pairs are never used, so
/// agents with nothing to gain stay unmatched.
pub fn solve_additive(instance: &AdditiveInstance) -> AdditiveSolution {
    let agents = instance.weights.len();
    let localities = instance.capacities.len();
    let source = agents + localities;
    let sink = source + 1;
    let mut g = FlowNetwork::new(agents + localities + 2);
    for a in 0..agents {
        g.add_arc(source, a, 1, 0.0);
    }
    let mut pair_arcs = Vec::new();
    for (a, row) in instance.weights.iter().enumerate() {
        for (l, w) in row.iter().enumerate() {
            if let Some(w) = *w {
                if w > 0.0 {
                    pair_arcs.push((g.add_arc(a, agents + l, 1, -w), Pair::new(a, l)));
                }
            }
        }
    }
    for (l, &cap) in instance.capacities.iter().enumerate() {
        g.add_arc(agents + l, sink, i64::from(cap), 0.0);
    }
    g.min_cost_flow(source, sink);
    let matching = Matching::new(
        pair_arcs
            .into_iter()
            .filter(|&(arc, _)| g.flow_on(arc) > 0)
            .map(|(_, p)| p),
    );
    let value = instance.value_of(&matching);
    AdditiveSolution { matching, value }
}
