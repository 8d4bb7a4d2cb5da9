//! Ground sets of agent–locality pairs, partition matroids and their
//! intersections.
//!
//! Element indices are dense (`0..|G|`) and ordered lexicographically by
//! `(agent, locality)`; every deterministic tie-break downstream keys off this
//! order.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Scenario;

/// An agent–locality pair, by position in the scenario's (id-sorted) lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pair {
    pub agent: usize,
    pub locality: usize,
}

impl Pair {
    pub fn new(agent: usize, locality: usize) -> Self {
        Pair { agent, locality }
    }
}

#[derive(Debug, Clone)]
pub struct GroundSet {
    pairs: Vec<Pair>,
    index: HashMap<Pair, usize>,
}

impl GroundSet {
    /// The complete bipartite ground set `agents × localities`.
    pub fn complete(agents: usize, localities: usize) -> Self {
        let pairs = (0..agents)
            .flat_map(|a| (0..localities).map(move |l| Pair::new(a, l)))
            .collect();
        Self::from_sorted(pairs)
    }

    /// Builds a ground set from an explicit list of allowed pairs. Duplicates
    /// are rejected.
    pub fn from_pairs(pairs: impl IntoIterator<Item = Pair>) -> Result<Self> {
        let mut pairs: Vec<Pair> = pairs.into_iter().collect();
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "duplicate pair (agent {}, locality {}) in ground set",
                w[0].agent, w[0].locality
            )));
        }
        Ok(Self::from_sorted(pairs))
    }

    fn from_sorted(pairs: Vec<Pair>) -> Self {
        let index = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        GroundSet { pairs, index }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    /// # Panics
    /// If `element` is out of range.
    pub fn pair(&self, element: usize) -> Pair {
        self.pairs[element]
    }

    pub fn index_of(&self, pair: Pair) -> Option<usize> {
        self.index.get(&pair).copied()
    }

    pub fn check(&self, element: usize) -> Result<()> {
        if element < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: element,
                len: self.len(),
            })
        }
    }
}

/// A partition matroid: `S` is independent iff `|S ∩ block_i| ≤ caps[i]` for
/// every block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMatroid {
    block_of: Vec<usize>,
    caps: Vec<usize>,
}

impl PartitionMatroid {
    pub fn new(block_of: Vec<usize>, caps: Vec<usize>) -> Result<Self> {
        if let Some(&b) = block_of.iter().find(|&&b| b >= caps.len()) {
            return Err(Error::InvalidArgument(format!(
                "block index {b} has no cap (only {} blocks)",
                caps.len()
            )));
        }
        Ok(PartitionMatroid { block_of, caps })
    }

    pub fn ground_len(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_count(&self) -> usize {
        self.caps.len()
    }

    pub fn block_of(&self, element: usize) -> usize {
        self.block_of[element]
    }

    pub fn cap(&self, block: usize) -> usize {
        self.caps[block]
    }

    /// Per-block counts of the distinct elements of `set`.
    fn block_counts(&self, set: &[usize]) -> Result<Vec<usize>> {
        let mut counts = vec![0; self.caps.len()];
        for e in distinct(set, self.ground_len())? {
            counts[self.block_of[e]] += 1;
        }
        Ok(counts)
    }

    pub fn is_independent(&self, set: &[usize]) -> Result<bool> {
        let counts = self.block_counts(set)?;
        Ok(counts.iter().zip(&self.caps).all(|(n, cap)| n <= cap))
    }

    /// `Σ_i min(|S ∩ block_i|, g_i)`.
    pub fn rank(&self, set: &[usize]) -> Result<usize> {
        let counts = self.block_counts(set)?;
        Ok(counts
            .iter()
            .zip(&self.caps)
            .map(|(&n, &cap)| n.min(cap))
            .sum())
    }

    /// `S` together with every element whose block is already saturated by
    /// `S`. Returned sorted.
    pub fn span(&self, set: &[usize]) -> Result<Vec<usize>> {
        let counts = self.block_counts(set)?;
        let mut in_set = vec![false; self.ground_len()];
        for &e in set {
            in_set[e] = true;
        }
        Ok((0..self.ground_len())
            .filter(|&e| in_set[e] || counts[self.block_of[e]] >= self.caps[self.block_of[e]])
            .collect())
    }
}

fn distinct(set: &[usize], len: usize) -> Result<Vec<usize>> {
    if let Some(&index) = set.iter().find(|&&e| e >= len) {
        return Err(Error::IndexOutOfRange { index, len });
    }
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

/// Partition matroids over one shared ground set; independence means
/// independence in every member.
#[derive(Debug, Clone)]
pub struct MatroidFamily {
    ground: Arc<GroundSet>,
    matroids: Vec<PartitionMatroid>,
}

impl MatroidFamily {
    pub fn new(ground: Arc<GroundSet>, matroids: Vec<PartitionMatroid>) -> Result<Self> {
        if matroids.is_empty() {
            return Err(Error::InvalidArgument("matroid family is empty".into()));
        }
        if let Some(m) = matroids.iter().find(|m| m.ground_len() != ground.len()) {
            return Err(Error::InvalidArgument(format!(
                "matroid over {} elements does not match ground set of {}",
                m.ground_len(),
                ground.len()
            )));
        }
        Ok(MatroidFamily { ground, matroids })
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn ground_arc(&self) -> Arc<GroundSet> {
        Arc::clone(&self.ground)
    }

    pub fn matroids(&self) -> &[PartitionMatroid] {
        &self.matroids
    }

    /// Number of member matroids (`P`).
    pub fn len(&self) -> usize {
        self.matroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matroids.is_empty()
    }

    pub fn is_independent(&self, set: &[usize]) -> Result<bool> {
        for m in &self.matroids {
            if !m.is_independent(set)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Incremental independence checks for a growing set, starting empty.
    pub fn tracker(&self) -> IndependenceTracker<'_> {
        IndependenceTracker {
            family: self,
            counts: self
                .matroids
                .iter()
                .map(|m| vec![0; m.block_count()])
                .collect(),
        }
    }
}

/// Block occupancy of a set that only grows. Callers must not add an element
/// twice.
#[derive(Debug, Clone)]
pub struct IndependenceTracker<'a> {
    family: &'a MatroidFamily,
    counts: Vec<Vec<usize>>,
}

impl IndependenceTracker<'_> {
    /// Whether the tracked set stays independent after adding `element`.
    pub fn can_add(&self, element: usize) -> bool {
        self.family
            .matroids
            .iter()
            .zip(&self.counts)
            .all(|(m, counts)| {
                let b = m.block_of[element];
                counts[b] < m.caps[b]
            })
    }

    pub fn add(&mut self, element: usize) {
        for (m, counts) in self.family.matroids.iter().zip(self.counts.iter_mut()) {
            counts[m.block_of[element]] += 1;
        }
    }
}

/// The two matching matroids of a scenario: one block per agent with cap 1,
/// one block per locality with cap `q_ℓ`. Sets independent in both are exactly
/// the feasible matchings.
pub fn build_matching_matroids(scenario: &Scenario) -> Result<MatroidFamily> {
    let agents = scenario.agents().len();
    let localities = scenario.localities().len();
    if agents == 0 || localities == 0 {
        return Err(Error::EmptyScenario);
    }
    let ground = match scenario.allowed_pairs() {
        Some(pairs) => GroundSet::from_pairs(pairs.iter().copied())?,
        None => GroundSet::complete(agents, localities),
    };
    let by_agent = PartitionMatroid::new(
        ground.pairs().iter().map(|p| p.agent).collect(),
        vec![1; agents],
    )?;
    let by_locality = PartitionMatroid::new(
        ground.pairs().iter().map(|p| p.locality).collect(),
        scenario
            .localities()
            .iter()
            .map(|l| l.capacity as usize)
            .collect(),
    )?;
    MatroidFamily::new(Arc::new(ground), vec![by_agent, by_locality])
}

/// A set of agent–locality pairs, kept sorted and duplicate-free.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matching {
    pairs: Vec<Pair>,
}

impl Matching {
    pub fn new(pairs: impl IntoIterator<Item = Pair>) -> Self {
        let mut pairs: Vec<Pair> = pairs.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup();
        Matching { pairs }
    }

    pub fn from_elements(ground: &GroundSet, elements: &[usize]) -> Result<Self> {
        for &e in elements {
            ground.check(e)?;
        }
        Ok(Self::new(elements.iter().map(|&e| ground.pair(e))))
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Checks agent degree ≤ 1, locality degree ≤ capacity and, when the
    /// scenario restricts pairs, membership in the allowed set.
    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        let n = scenario.agents().len();
        let m = scenario.localities().len();
        let mut agent_seen = vec![false; n];
        let mut load = vec![0u32; m];
        for p in &self.pairs {
            if p.agent >= n || p.locality >= m {
                return Err(Error::InfeasibleMatching(format!(
                    "pair ({}, {}) outside the scenario",
                    p.agent, p.locality
                )));
            }
            if std::mem::replace(&mut agent_seen[p.agent], true) {
                return Err(Error::InfeasibleMatching(format!(
                    "agent {} matched more than once",
                    scenario.agents()[p.agent].id
                )));
            }
            load[p.locality] += 1;
        }
        for (l, loc) in scenario.localities().iter().enumerate() {
            if load[l] > loc.capacity {
                return Err(Error::InfeasibleMatching(format!(
                    "locality {} receives {} agents but has capacity {}",
                    loc.id, load[l], loc.capacity
                )));
            }
        }
        if let Some(allowed) = scenario.allowed_pairs() {
            if let Some(p) = self
                .pairs
                .iter()
                .find(|p| allowed.binary_search(p).is_err())
            {
                return Err(Error::InfeasibleMatching(format!(
                    "pair ({}, {}) is not allowed",
                    p.agent, p.locality
                )));
            }
        }
        Ok(())
    }
}
