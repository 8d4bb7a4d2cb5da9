use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::error::Result;
use crate::greedy::ValueOracle;
use crate::matroid::GroundSet;
use crate::models::exact::{group_value_exact, ExactLimits};
use crate::models::{estimate_group, group_pairs, EstimatorConfig, GroupKey, Scenario};
use crate::Error;

/// Group estimates keyed by (locality, profession, sorted agents). Lives for
/// one trial.
#[derive(Debug, Default)]
pub struct MemoCache {
    map: Mutex<HashMap<(GroupKey, Vec<usize>), f64>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MemoStats {
    pub hits: u64,
    pub misses: u64,
    pub entries: usize,
}

impl MemoCache {
    pub fn new() -> Self {
        MemoCache::default()
    }

    pub fn get(&self, key: GroupKey, agents: &[usize]) -> Option<f64> {
        self.map
            .lock()
            .expect("memo lock")
            .get(&(key, agents.to_vec()))
            .copied()
    }

    /// The stored value for the key, computing and storing it on a miss.
    /// When two workers race on one key the first insertion is kept.
    pub fn get_or_compute(
        &self,
        key: GroupKey,
        agents: &[usize],
        compute: impl FnOnce() -> Result<f64>,
    ) -> Result<f64> {
        if let Some(v) = self.get(key, agents) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(v);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let v = compute()?;
        Ok(*self
            .map
            .lock()
            .expect("memo lock")
            .entry((key, agents.to_vec()))
            .or_insert(v))
    }

    pub fn stats(&self) -> MemoStats {
        MemoStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            entries: self.map.lock().expect("memo lock").len(),
        }
    }
}

/// Expected employment of a set of ground-set elements, as the sum of its
/// group values. A group is valued exactly when it has at most
/// `cfg.exact_cutoff` agents and fits the exact limits, otherwise by
/// sampling with `cfg.seed`.
pub struct ModelOracle<'a> {
    scenario: &'a Scenario,
    ground: &'a GroundSet,
    cfg: EstimatorConfig,
    memo: Option<&'a MemoCache>,
}

impl<'a> ModelOracle<'a> {
    pub fn new(
        scenario: &'a Scenario,
        ground: &'a GroundSet,
        cfg: EstimatorConfig,
        memo: Option<&'a MemoCache>,
    ) -> Self {
        ModelOracle {
            scenario,
            ground,
            cfg,
            memo,
        }
    }

    pub fn group_value(&self, key: GroupKey, agents: &[usize]) -> Result<f64> {
        let compute = || {
            if agents.len() <= self.cfg.exact_cutoff {
                let limits = ExactLimits::with_cutoff(self.cfg.exact_cutoff);
                match group_value_exact(self.scenario, key, agents, limits) {
                    Err(Error::OversizeGroup { .. }) => {}
                    other => return other,
                }
            }
            Ok(estimate_group(
                self.scenario,
                key,
                agents,
                self.cfg.samples,
                self.cfg.seed,
            ))
        };
        match self.memo {
            Some(memo) => memo.get_or_compute(key, agents, compute),
            None => compute(),
        }
    }
}

impl ValueOracle for ModelOracle<'_> {
    fn value(&self, set: &[usize]) -> Result<f64> {
        for &e in set {
            self.ground.check(e)?;
        }
        group_pairs(self.scenario, set.iter().map(|&e| self.ground.pair(e)))
            .iter()
            .map(|(&key, agents)| self.group_value(key, agents))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_insert_wins_and_hits_are_counted() {
        let memo = MemoCache::new();
        let key = GroupKey::new(0, Some(1));
        assert_eq!(memo.get_or_compute(key, &[1, 2], || Ok(0.5)).unwrap(), 0.5);
        assert_eq!(memo.get_or_compute(key, &[1, 2], || Ok(0.9)).unwrap(), 0.5);
        assert_eq!(memo.get_or_compute(key, &[1], || Ok(0.9)).unwrap(), 0.9);
        let stats = memo.stats();
        assert_eq!((stats.hits, stats.misses, stats.entries), (1, 2, 2));
    }

    #[test]
    fn failed_computations_are_not_stored() {
        let memo = MemoCache::new();
        let key = GroupKey::new(0, None);
        assert!(memo
            .get_or_compute(key, &[0], || Err(Error::Oracle("x".into())))
            .is_err());
        assert_eq!(memo.get(key, &[0]), None);
    }
}
