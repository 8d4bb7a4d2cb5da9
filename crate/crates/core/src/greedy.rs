//! Greedy maximization of a set function over an intersection of partition
//! matroids, and the approximation bound it carries.
//!
//! Each round evaluates `z(S ∪ {j})` for every candidate `j` left in the
//! pool, takes the maximizer (smallest element index on ties) and either
//! accepts it, if `S ∪ {j}` stays independent, or drops it from the pool.
//! The loop ends when the pool is empty.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::brute;
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::matroid::MatroidFamily;

/// A value query `z(S)` on sets of ground-set element indices. Sets are
/// passed sorted and duplicate-free.
pub trait ValueOracle: Sync {
    fn value(&self, set: &[usize]) -> Result<f64>;
}

impl<F> ValueOracle for F
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
{
    fn value(&self, set: &[usize]) -> Result<f64> {
        self(set)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GreedyConfig {
    /// Evaluate the candidates of one round on the rayon pool.
    pub parallel: bool,
    /// Lazy (CELF) evaluation: stale marginal gains act as upper bounds.
    /// Only equivalent to the plain scan when `z` is submodular.
    pub lazy: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrace {
    /// Accepted elements in acceptance order.
    pub selected: Vec<usize>,
    /// Elements dropped because adding them broke independence, in order.
    pub rejected: Vec<usize>,
    /// `z(S^t) − z(S^{t−1})` for each accepted element.
    pub marginal_gains: Vec<f64>,
    pub oracle_calls: usize,
    /// `z` of the final selection.
    pub value: f64,
}

impl GreedyTrace {
    /// The selection as a sorted element list.
    pub fn selected_sorted(&self) -> Vec<usize> {
        let mut s = self.selected.clone();
        s.sort_unstable();
        s
    }
}

fn with_element(sorted: &[usize], e: usize) -> Vec<usize> {
    let mut v = Vec::with_capacity(sorted.len() + 1);
    let at = sorted.partition_point(|&x| x < e);
    v.extend_from_slice(&sorted[..at]);
    v.push(e);
    v.extend_from_slice(&sorted[at..]);
    v
}

fn checked(v: f64, set: &[usize]) -> Result<f64> {
    if v.is_nan() {
        Err(Error::Oracle(format!("oracle returned NaN for {set:?}")))
    } else {
        Ok(v)
    }
}

struct Run<'a, O: ?Sized> {
    oracle: &'a O,
    family: &'a MatroidFamily,
    cfg: GreedyConfig,
    sorted: Vec<usize>,
    trace: GreedyTrace,
    base: Option<f64>,
}

impl<O: ValueOracle + ?Sized> Run<'_, O> {
    fn query(&mut self, set: &[usize]) -> Result<f64> {
        self.trace.oracle_calls += 1;
        checked(self.oracle.value(set)?, set)
    }

    /// `z(S)` for the current selection; only needed once something is
    /// accepted, so `z(∅)` is queried lazily.
    fn base_value(&mut self) -> Result<f64> {
        if let Some(v) = self.base {
            return Ok(v);
        }
        let s = self.sorted.clone();
        let v = self.query(&s)?;
        self.base = Some(v);
        Ok(v)
    }

    fn evaluate_all(&mut self, candidates: &[usize]) -> Result<Vec<f64>> {
        self.trace.oracle_calls += candidates.len();
        let sorted = &self.sorted;
        let oracle = self.oracle;
        let eval = |&j: &usize| {
            let set = with_element(sorted, j);
            checked(oracle.value(&set)?, &set)
        };
        if self.cfg.parallel {
            candidates.par_iter().map(eval).collect()
        } else {
            candidates.iter().map(eval).collect()
        }
    }

    fn accept(&mut self, j: usize, value: f64) -> Result<()> {
        let before = self.base_value()?;
        self.trace.selected.push(j);
        self.trace.marginal_gains.push(value - before);
        self.sorted = with_element(&self.sorted, j);
        self.base = Some(value);
        Ok(())
    }

    fn scan(mut self) -> Result<GreedyTrace> {
        let n = self.family.ground().len();
        let mut tracker = self.family.tracker();
        let mut pool: Vec<usize> = (0..n).collect();
        // z(S ∪ {j}) for the current S, aligned with `pool`; cleared when S
        // changes.
        let mut values: Vec<f64> = Vec::new();
        while !pool.is_empty() {
            if values.is_empty() {
                values = self.evaluate_all(&pool)?;
            }
            // First maximum wins, and `pool` is ascending.
            let mut best = 0;
            for (i, &v) in values.iter().enumerate() {
                if v > values[best] {
                    best = i;
                }
            }
            let j = pool.remove(best);
            let v = values.remove(best);
            if tracker.can_add(j) {
                tracker.add(j);
                self.accept(j, v)?;
                values.clear();
            } else {
                self.trace.rejected.push(j);
            }
        }
        self.finish()
    }

    fn lazy(mut self) -> Result<GreedyTrace> {
        #[derive(PartialEq)]
        struct Entry {
            gain: f64,
            element: usize,
            round: usize,
        }
        impl Eq for Entry {}
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> Ordering {
                self.gain
                    .total_cmp(&other.gain)
                    .then_with(|| other.element.cmp(&self.element))
            }
        }
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let n = self.family.ground().len();
        let mut tracker = self.family.tracker();
        let all: Vec<usize> = (0..n).collect();
        let first = self.evaluate_all(&all)?;
        let base = if n > 0 { self.base_value()? } else { 0.0 };
        let mut heap: BinaryHeap<Entry> = all
            .iter()
            .zip(first)
            .map(|(&element, v)| Entry {
                gain: v - base,
                element,
                round: 0,
            })
            .collect();
        let mut round = 0;
        while let Some(top) = heap.pop() {
            if top.round != round {
                let set = with_element(&self.sorted, top.element);
                let v = self.query(&set)?;
                let base = self.base_value()?;
                heap.push(Entry {
                    gain: v - base,
                    round,
                    ..top
                });
                continue;
            }
            if tracker.can_add(top.element) {
                tracker.add(top.element);
                let value = self.base_value()? + top.gain;
                self.accept(top.element, value)?;
                round += 1;
            } else {
                self.trace.rejected.push(top.element);
            }
        }
        self.finish()
    }

    fn finish(mut self) -> Result<GreedyTrace> {
        self.trace.value = match self.base {
            Some(v) => v,
            None if self.trace.selected.is_empty() => self.query(&[])?,
            None => unreachable!("accepting sets the base value"),
        };
        debug_assert!(self.family.is_independent(&self.sorted)?);
        Ok(self.trace)
    }
}

/// Runs the greedy algorithm with value oracle `z` over `family`.
pub fn greedy_maximize<O: ValueOracle + ?Sized>(
    oracle: &O,
    family: &MatroidFamily,
    cfg: GreedyConfig,
) -> Result<GreedyTrace> {
    let run = Run {
        oracle,
        family,
        cfg,
        sorted: Vec::new(),
        trace: GreedyTrace {
            selected: Vec::new(),
            rejected: Vec::new(),
            marginal_gains: Vec::new(),
            oracle_calls: 0,
            value: 0.0,
        },
        base: None,
    };
    if cfg.lazy {
        run.lazy()
    } else {
        run.scan()
    }
}

/// `1 / (P + 1 + 4ε/(1−ε)·k)`: the guaranteed fraction of the optimum of a
/// monotone submodular `ẑ` reached by greedy run on an ε-approximation of it,
/// subject to `P` matroids whose intersection has largest independent sets
/// of size `k`.
pub fn theorem1_ratio(p: usize, epsilon: f64, k: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if p == 0 {
        return Err(Error::InvalidArgument("P must be at least 1".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    Ok(1.0 / (p as f64 + 1.0 + 4.0 * epsilon / (1.0 - epsilon) * k as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndependentSize {
    pub size: usize,
    /// False when `size` is only an upper bound.
    pub exact: bool,
}

const BRUTE_FORCE_LIMIT: usize = 20;

/// Size `k` of the largest set independent in every member of the family.
///
/// Exact for one matroid (its rank) and for two (a max flow through the
/// blocks). With three or more it enumerates subsets up to 20 elements and
/// otherwise returns the smallest member rank as an upper bound.
pub fn max_independent_size(family: &MatroidFamily) -> IndependentSize {
    let n = family.ground().len();
    let all: Vec<usize> = (0..n).collect();
    let ranks = family
        .matroids()
        .iter()
        .map(|m| m.rank(&all).expect("ground elements are in range"));
    match family.matroids() {
        [m] => IndependentSize {
            size: m.rank(&all).expect("ground elements are in range"),
            exact: true,
        },
        [a, b] => {
            let (na, nb) = (a.block_count(), b.block_count());
            let source = na + nb;
            let sink = source + 1;
            let mut g = FlowNetwork::new(na + nb + 2);
            for i in 0..na {
                g.add_arc(source, i, a.cap(i) as i64, 0.0);
            }
            for i in 0..nb {
                g.add_arc(na + i, sink, b.cap(i) as i64, 0.0);
            }
            for e in 0..n {
                g.add_arc(a.block_of(e), na + b.block_of(e), 1, 0.0);
            }
            IndependentSize {
                size: g.max_flow(source, sink) as usize,
                exact: true,
            }
        }
        _ if n <= BRUTE_FORCE_LIMIT => IndependentSize {
            size: brute::max_independent_size(family),
            exact: true,
        },
        _ => IndependentSize {
            size: ranks.min().unwrap_or(0),
            exact: false,
        },
    }
}
