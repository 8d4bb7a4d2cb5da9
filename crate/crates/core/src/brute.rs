//! Exhaustive reference computations for tiny instances.
//!
//! Everything here enumerates outcomes or candidate sets directly and shares
//! no code with the algorithms it is used to check.

use itertools::Itertools;

use crate::matroid::MatroidFamily;

/// Maximum matching size by exhaustive search over which right vertex (if
/// any) each left vertex takes. Requires `right ≤ 16`.
pub fn max_matching_size(left: usize, right: usize, edges: &[(usize, usize)]) -> usize {
    assert!(
        right <= 16,
        "exhaustive matching limited to 16 right vertices"
    );
    let mut adj = vec![0u32; left];
    for &(l, r) in edges {
        adj[l] |= 1 << r;
    }
    // best[mask] = largest matching of the processed left prefix using exactly
    // the right vertices in `mask`, or None if unreachable.
    let mut best: Vec<Option<usize>> = vec![None; 1 << right];
    best[0] = Some(0);
    for &neighbours in &adj {
        let mut next = best.clone();
        for mask in 0..(1usize << right) {
            let Some(size) = best[mask] else { continue };
            for r in 0..right {
                if neighbours >> r & 1 == 1 && mask >> r & 1 == 0 {
                    let m = mask | 1 << r;
                    next[m] = Some(next[m].map_or(size + 1, |s| s.max(size + 1)));
                }
            }
        }
        best = next;
    }
    best.into_iter().flatten().max().unwrap_or(0)
}

/// `E[C(#successes)]` by summing over all `2^n` coin outcomes.
pub fn correction_by_enumeration(probs: &[f64], correction: impl Fn(u32) -> f64) -> f64 {
    let n = probs.len();
    (0u64..1 << n)
        .map(|mask| {
            let weight: f64 = probs
                .iter()
                .enumerate()
                .map(|(i, &p)| if mask >> i & 1 == 1 { p } else { 1.0 - p })
                .product();
            weight * correction(mask.count_ones())
        })
        .sum()
}

/// Distribution of an agent's first-success index capped at `jobs + 1`
/// ("never within the available attempts").
fn first_success_distribution(p: f64, jobs: u32) -> Vec<(u32, f64)> {
    let mut out: Vec<(u32, f64)> = (1..=jobs)
        .map(|c| (c, p * (1.0 - p).powi(c as i32 - 1)))
        .collect();
    out.push((jobs + 1, (1.0 - p).powi(jobs as i32)));
    out
}

/// Expected open positions for a fixed order, enumerating every combination
/// of capped first-success indices. An agent is hired iff her index does not
/// exceed the number of jobs still open on her turn.
pub fn interview_open_by_first_success(order: &[f64], jobs: u32) -> f64 {
    let dists: Vec<_> = order
        .iter()
        .map(|&p| first_success_distribution(p, jobs))
        .collect();
    if dists.is_empty() {
        return f64::from(jobs);
    }
    dists
        .iter()
        .map(|d| d.iter())
        .multi_cartesian_product()
        .map(|outcome| {
            let mut open = jobs;
            let mut weight = 1.0;
            for &(c, w) in outcome {
                weight *= w;
                if c <= open {
                    open -= 1;
                }
            }
            weight * f64::from(open)
        })
        .sum()
}

/// Expected interview employment averaged over all orders, by
/// first-success enumeration.
pub fn interview_by_first_success(probs: &[f64], jobs: u32) -> f64 {
    let n = probs.len();
    if n == 0 {
        return 0.0;
    }
    let orders: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    orders
        .iter()
        .map(|perm| {
            let order: Vec<f64> = perm.iter().map(|&i| probs[i]).collect();
            f64::from(jobs) - interview_open_by_first_success(&order, jobs)
        })
        .sum::<f64>()
        / orders.len() as f64
}

/// Expected maximum matching by enumerating all `2^(agents·jobs)` edge
/// subsets of the compatibility graph.
pub fn coordination_by_enumeration(rows: &[Vec<f64>]) -> f64 {
    let jobs = rows.first().map_or(0, Vec::len);
    let cells: Vec<(usize, usize, f64)> = rows
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &p)| (i, j, p)))
        .collect();
    assert!(cells.len() <= 24, "too many edges to enumerate");
    (0u64..1 << cells.len())
        .map(|mask| {
            let mut weight = 1.0;
            let mut edges = Vec::new();
            for (bit, &(i, j, p)) in cells.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    weight *= p;
                    edges.push((i, j));
                } else {
                    weight *= 1.0 - p;
                }
            }
            if weight == 0.0 {
                return 0.0;
            }
            weight * max_matching_size(rows.len(), jobs, &edges) as f64
        })
        .sum()
}

/// Best additive value over all matchings: each agent either stays unmatched
/// or picks one locality with remaining capacity. `None` weights mark
/// forbidden pairs.
pub fn max_weight_b_matching(weights: &[Vec<Option<f64>>], caps: &[u32]) -> f64 {
    fn go(i: usize, weights: &[Vec<Option<f64>>], load: &mut [u32], caps: &[u32]) -> f64 {
        if i == weights.len() {
            return 0.0;
        }
        let mut best = go(i + 1, weights, load, caps);
        for (l, w) in weights[i].iter().enumerate() {
            let Some(w) = *w else { continue };
            if load[l] < caps[l] {
                load[l] += 1;
                best = best.max(w + go(i + 1, weights, load, caps));
                load[l] -= 1;
            }
        }
        best
    }
    let mut load = vec![0; caps.len()];
    go(0, weights, &mut load, caps)
}

/// Elements of `mask` as a sorted index list.
pub fn mask_elements(mask: u64) -> Vec<usize> {
    (0..64).filter(|&e| mask >> e & 1 == 1).collect()
}

/// Every subset of the family's ground set that is independent in all
/// members, as bitmasks. Requires `|G| ≤ 20`.
pub fn independent_sets(family: &MatroidFamily) -> Vec<u64> {
    let n = family.ground().len();
    assert!(n <= 20, "exhaustive enumeration limited to 20 elements");
    (0u64..1 << n)
        .filter(|&mask| {
            family
                .is_independent(&mask_elements(mask))
                .expect("indices are in range")
        })
        .collect()
}

/// `max_{S ∈ F} f(S)` over the intersection, with the maximizing mask.
pub fn best_independent(family: &MatroidFamily, f: impl Fn(u64) -> f64) -> (u64, f64) {
    independent_sets(family)
        .into_iter()
        .map(|m| (m, f(m)))
        .fold((0, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        })
}

/// Size of the largest set independent in every member.
pub fn max_independent_size(family: &MatroidFamily) -> usize {
    independent_sets(family)
        .into_iter()
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_size_small_cases() {
        assert_eq!(max_matching_size(2, 2, &[]), 0);
        assert_eq!(max_matching_size(2, 2, &[(0, 0), (1, 0)]), 1);
        assert_eq!(max_matching_size(2, 2, &[(0, 0), (0, 1), (1, 0)]), 2);
    }

    #[test]
    fn first_success_distribution_sums_to_one() {
        for &p in &[0.0, 0.3, 1.0] {
            let total: f64 = first_success_distribution(p, 3).iter().map(|x| x.1).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn b_matching_respects_caps() {
        let w = vec![vec![Some(0.8)], vec![Some(0.6)]];
        assert!((max_weight_b_matching(&w, &[1]) - 0.8).abs() < 1e-15);
        assert!((max_weight_b_matching(&w, &[2]) - 1.4).abs() < 1e-15);
        assert_eq!(max_weight_b_matching(&w, &[0]), 0.0);
    }
}
