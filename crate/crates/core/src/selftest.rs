//! Exhaustive property suites on small random instances.
//!
//! Each suite draws its instances from a seeded RNG, checks every case
//! against an independent reference, and reports how many checks it made
//! and how many failed. The CLI `selftest` command and the acceptance tests
//! both run these.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

use crate::additive::{solve_additive, AdditiveInstance};
use crate::brute;
use crate::greedy::{greedy_maximize, max_independent_size, theorem1_ratio, GreedyConfig};
use crate::matroid::{build_matching_matroids, GroundSet, MatroidFamily, PartitionMatroid};
use crate::models::exact::{interview_open_positions_exact, model_expected_exact, ExactLimits};
use crate::models::seed::derive;
use crate::models::{
    hopcroft_karp, AgentRecord, CorrectionEntry, CorrectionFunction, LocalityRecord, ModelKind,
    PTableEntry, ProbabilitySpec, Scenario, ScenarioFile,
};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub cases: u64,
    pub checks: u64,
    pub violations: u64,
    pub first_violation: Option<String>,
    pub elapsed: Duration,
}

impl SuiteReport {
    fn new(name: impl Into<String>) -> Self {
        SuiteReport {
            name: name.into(),
            cases: 0,
            checks: 0,
            violations: 0,
            first_violation: None,
            elapsed: Duration::ZERO,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.checks > 0
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(describe());
            }
        }
    }

    fn timed(mut self, started: Instant) -> Self {
        self.elapsed = started.elapsed();
        self
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {} cases, {} checks, {} violations ({:.1}s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.checks,
            self.violations,
            self.elapsed.as_secs_f64()
        )?;
        if let Some(v) = &self.first_violation {
            write!(f, "; first: {v}")?;
        }
        Ok(())
    }
}

fn rng(seed: u64, stream: u64) -> Pcg64Mcg {
    Pcg64Mcg::seed_from_u64(derive(seed, &[stream]))
}

/// A probability that is exactly 0 or 1 now and then.
fn probability(rng: &mut impl Rng) -> f64 {
    match rng.gen_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen(),
    }
}

fn masks_of(n: usize) -> impl Iterator<Item = u64> {
    0u64..1 << n
}

/// A random instance with `agents` agents and `localities` localities, at
/// most 3 jobs per group, random capacities and (for correction) random
/// concave correction functions.
pub fn small_scenario(
    model: ModelKind,
    agents: usize,
    localities: usize,
    rng: &mut impl Rng,
) -> Scenario {
    let agent_records: Vec<AgentRecord> = (0..agents)
        .map(|id| AgentRecord {
            id: id as u32,
            profession: rng.gen_range(1..=2),
            p: if rng.gen_bool(0.5) {
                ProbabilitySpec::Uniform(probability(rng))
            } else {
                ProbabilitySpec::PerLocality(
                    (0..localities as u32)
                        .map(|l| (l, probability(rng)))
                        .collect(),
                )
            },
        })
        .collect();
    let mut locality_records = Vec::new();
    let mut p_table = Vec::new();
    let mut corrections = Vec::new();
    for l in 0..localities as u32 {
        let jobs: BTreeMap<u32, u32> = if model == ModelKind::Coordination {
            // The group is the whole locality, so cap its total at 3.
            let total = rng.gen_range(0..=3);
            let first = rng.gen_range(0..=total);
            [(1, first), (2, total - first)]
                .into_iter()
                .filter(|&(_, n)| n > 0)
                .collect()
        } else {
            [(1, rng.gen_range(0..=3)), (2, rng.gen_range(0..=3))]
                .into_iter()
                .filter(|&(_, n)| n > 0)
                .collect()
        };
        if model == ModelKind::Coordination {
            let total: u32 = jobs.values().sum();
            for agent in 0..agents as u32 {
                for job in 0..total {
                    if rng.gen_bool(0.7) {
                        p_table.push(PTableEntry {
                            agent,
                            locality: l,
                            job,
                            p: probability(rng),
                        });
                    }
                }
            }
        }
        if model == ModelKind::Correction {
            for profession in 1..=2 {
                let function = match rng.gen_range(0..3) {
                    0 => continue,
                    1 => CorrectionFunction::cap(rng.gen_range(0..=3)),
                    _ => {
                        let mut slopes: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
                        slopes.sort_by(|a, b| b.total_cmp(a));
                        let mut y = 0.0;
                        CorrectionFunction::Piecewise {
                            breakpoints: slopes
                                .iter()
                                .enumerate()
                                .map(|(i, s)| {
                                    y += s;
                                    (i as u32 + 1, y)
                                })
                                .collect(),
                        }
                    }
                };
                corrections.push(CorrectionEntry {
                    locality: l,
                    profession,
                    function,
                });
            }
        }
        locality_records.push(LocalityRecord {
            id: l,
            capacity: rng.gen_range(0..=agents as u32),
            jobs,
        });
    }
    Scenario::try_from(ScenarioFile {
        model,
        agents: agent_records,
        localities: locality_records,
        p_table,
        corrections,
        allowed_pairs: None,
    })
    .expect("generated scenarios are valid")
}

/// Submodularity and monotonicity of the exact expected employment of
/// `model` over all feasible `S ⊆ T` and `x ∉ T`, on every shape with 1–4
/// agents and 1–2 localities, `draws` times each.
pub fn submodularity(model: ModelKind, draws: u32, seed: u64) -> SuiteReport {
    let started = Instant::now();
    let mut report = SuiteReport::new(format!("submodularity/{model}"));
    let mut rng = rng(seed, 1 + model as u64);
    for _ in 0..draws {
        for agents in 1..=4 {
            for localities in 1..=2 {
                let scenario = small_scenario(model, agents, localities, &mut rng);
                check_submodular_instance(&scenario, &mut report);
                report.cases += 1;
            }
        }
    }
    report.timed(started)
}

fn check_submodular_instance(scenario: &Scenario, report: &mut SuiteReport) {
    let family = build_matching_matroids(scenario).expect("non-empty");
    let ground = family.ground();
    let n = ground.len();
    let value: Vec<f64> = masks_of(n)
        .map(|m| {
            let pairs: Vec<_> = brute::mask_elements(m)
                .into_iter()
                .map(|e| ground.pair(e))
                .collect();
            model_expected_exact(scenario, &pairs, ExactLimits::default()).expect("within limits")
        })
        .collect();
    let feasible: Vec<bool> = masks_of(n)
        .map(|m| {
            family
                .is_independent(&brute::mask_elements(m))
                .expect("in range")
        })
        .collect();
    report.check(value[0] == 0.0, || format!("f(∅) = {}", value[0]));
    for t in masks_of(n).filter(|&t| feasible[t as usize]) {
        for x in (0..n).filter(|&x| t >> x & 1 == 0 && feasible[(t | 1 << x) as usize]) {
            let gain_t = value[(t | 1 << x) as usize] - value[t as usize];
            report.check(gain_t >= -TOL, || {
                format!("f(T+x) < f(T) for T={t:#b}, x={x}")
            });
            // Every submask of T.
            let mut s = t;
            loop {
                let gain_s = value[(s | 1 << x) as usize] - value[s as usize];
                report.check(gain_s >= gain_t - TOL, || {
                    format!("gain {gain_s} at S={s:#b} below {gain_t} at T={t:#b}, x={x}")
                });
                if s == 0 {
                    break;
                }
                s = (s - 1) & t;
            }
        }
    }
}

/// Open positions `o(S)` of the interview model are supermodular for every
/// fixed order: `o(S+x+y) − o(S+y) ≥ o(S+x) − o(S)`. Runs all orders of 1–4
/// agents with 0–4 jobs, `draws` probability vectors each.
pub fn interview_supermodularity(draws: u32, seed: u64) -> SuiteReport {
    let started = Instant::now();
    let mut report = SuiteReport::new("interview-supermodularity");
    let mut rng = rng(seed, 10);
    for _ in 0..draws {
        for agents in 1..=4usize {
            let probs: Vec<f64> = (0..agents).map(|_| probability(&mut rng)).collect();
            for jobs in 0..=4 {
                for order in (0..agents).permutations(agents) {
                    let open: Vec<f64> = masks_of(agents)
                        .map(|m| {
                            let seq: Vec<f64> = order
                                .iter()
                                .filter(|&&a| m >> a & 1 == 1)
                                .map(|&a| probs[a])
                                .collect();
                            interview_open_positions_exact(&seq, jobs)
                        })
                        .collect();
                    for s in masks_of(agents) {
                        for [x, y] in (0..agents).array_combinations() {
                            if s >> x & 1 == 1 || s >> y & 1 == 1 {
                                continue;
                            }
                            let (sx, sy, sxy) = (s | 1 << x, s | 1 << y, s | 1 << x | 1 << y);
                            let lhs = open[sxy as usize] - open[sy as usize];
                            let rhs = open[sx as usize] - open[s as usize];
                            report.check(lhs >= rhs - TOL, || {
                                format!("order {order:?}, jobs {jobs}, S={s:#b}, x={x}, y={y}: {lhs} < {rhs}")
                            });
                        }
                    }
                    report.cases += 1;
                }
            }
        }
    }
    report.timed(started)
}

/// For a fixed agent sequence, open positions as a function of the initial
/// job count `n = 0..=6` are nondecreasing and convex.
pub fn open_positions_convexity(sets: u32, seed: u64) -> SuiteReport {
    let started = Instant::now();
    let mut report = SuiteReport::new("open-positions-convexity");
    let mut rng = rng(seed, 11);
    for _ in 0..sets {
        let len = rng.gen_range(1..=6);
        let seq: Vec<f64> = (0..len).map(|_| probability(&mut rng)).collect();
        let o: Vec<f64> = (0..=6)
            .map(|n| interview_open_positions_exact(&seq, n))
            .collect();
        for n in 0..6 {
            report.check(o[n + 1] >= o[n] - TOL, || {
                format!("{seq:?}: o({}) < o({n})", n + 1)
            });
        }
        for n in 0..5 {
            let second = o[n + 2] - 2.0 * o[n + 1] + o[n];
            report.check(second >= -TOL, || format!("{seq:?}: concave at n={n}"));
        }
        report.cases += 1;
    }
    report.timed(started)
}

/// On random bipartite graphs with at most 5 + 5 vertices, the maximum
/// matching size of the subgraph induced by a left subset is monotone and
/// submodular in that subset, and Hopcroft–Karp agrees with exhaustive
/// search on every induced subgraph.
pub fn matching_submodularity(graphs: u32, seed: u64) -> SuiteReport {
    let started = Instant::now();
    let mut report = SuiteReport::new("matching-submodularity");
    let mut rng = rng(seed, 12);
    for _ in 0..graphs {
        let left = rng.gen_range(1..=5usize);
        let right = rng.gen_range(1..=5usize);
        let density: f64 = rng.gen_range(0.15..0.85);
        let edges: Vec<(usize, usize)> = (0..left)
            .cartesian_product(0..right)
            .filter(|_| rng.gen_bool(density))
            .collect();
        let size: Vec<usize> = masks_of(left)
            .map(|m| {
                let induced: Vec<_> = edges
                    .iter()
                    .copied()
                    .filter(|&(l, _)| m >> l & 1 == 1)
                    .collect();
                let hk = hopcroft_karp(left, right, &induced).expect("in range");
                let bf = brute::max_matching_size(left, right, &induced);
                report.check(hk == bf, || {
                    format!("{induced:?}: hopcroft_karp {hk} vs {bf}")
                });
                hk
            })
            .collect();
        for t in masks_of(left) {
            for x in (0..left).filter(|&x| t >> x & 1 == 0) {
                let gain_t = size[(t | 1 << x) as usize] as i64 - size[t as usize] as i64;
                report.check(gain_t >= 0, || {
                    format!("{edges:?}: not monotone at T={t:#b}")
                });
                let mut s = t;
                loop {
                    let gain_s = size[(s | 1 << x) as usize] as i64 - size[s as usize] as i64;
                    report.check(gain_s >= gain_t, || {
                        format!("{edges:?}: S={s:#b}, T={t:#b}, x={x}")
                    });
                    if s == 0 {
                        break;
                    }
                    s = (s - 1) & t;
                }
            }
        }
        report.cases += 1;
    }
    report.timed(started)
}

/// A random monotone submodular set function on `n` elements, as a table
/// over bitmasks.
fn random_submodular(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    match rng.gen_range(0..3) {
        0 => {
            // Weighted coverage.
            let universe = 8;
            let weights: Vec<f64> = (0..universe).map(|_| rng.gen()).collect();
            let covers: Vec<u32> = (0..n).map(|_| rng.gen_range(0..1u32 << universe)).collect();
            masks_of(n)
                .map(|m| {
                    let covered = brute::mask_elements(m)
                        .iter()
                        .fold(0, |acc, &e| acc | covers[e]);
                    (0..universe)
                        .filter(|&u| covered >> u & 1 == 1)
                        .map(|u| weights[u])
                        .sum()
                })
                .collect()
        }
        1 => {
            // Facility location.
            let clients = 5;
            let w: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..clients).map(|_| rng.gen()).collect())
                .collect();
            masks_of(n)
                .map(|m| {
                    let elems = brute::mask_elements(m);
                    (0..clients)
                        .map(|c| elems.iter().map(|&e| w[e][c]).fold(0.0, f64::max))
                        .sum()
                })
                .collect()
        }
        _ => {
            // Concave function of a modular one.
            let w: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            masks_of(n)
                .map(|m| {
                    brute::mask_elements(m)
                        .iter()
                        .map(|&e| w[e])
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        }
    }
}

fn random_partition_matroid(n: usize, rng: &mut impl Rng) -> PartitionMatroid {
    let blocks = rng.gen_range(1..=n);
    let block_of = (0..n).map(|_| rng.gen_range(0..blocks)).collect();
    let caps = (0..blocks)
        .map(|_| {
            if rng.gen_bool(0.1) {
                0
            } else {
                rng.gen_range(1..=3)
            }
        })
        .collect();
    PartitionMatroid::new(block_of, caps).expect("caps cover every block")
}

/// Multiplicative noise `1 + δ_S`, `|δ_S| ≤ ε`, fixed per set.
fn noise(instance_seed: u64, mask: u64, epsilon: f64) -> f64 {
    let u = (derive(instance_seed, &[mask]) >> 11) as f64 / (1u64 << 53) as f64;
    1.0 + epsilon * (2.0 * u - 1.0)
}

/// Greedy under two random partition matroids on at most 10 elements
/// reaches `theorem1_ratio(2, ε, k)` of the brute-force optimum of a random
/// monotone submodular `ẑ`, when run on `ẑ` itself (ε = 0) and on noisy
/// copies `ẑ(S)(1 + δ_S)` for each listed ε (scored under `ẑ`).
pub fn greedy_ratio(instances: u32, epsilons: &[f64], seed: u64) -> SuiteReport {
    let started = Instant::now();
    let mut report = SuiteReport::new("greedy-ratio");
    let mut rng = rng(seed, 13);
    for case in 0..instances {
        let n = rng.gen_range(1..=10);
        let ground = Arc::new(GroundSet::complete(n, 1));
        let family = MatroidFamily::new(
            ground,
            vec![
                random_partition_matroid(n, &mut rng),
                random_partition_matroid(n, &mut rng),
            ],
        )
        .expect("matroids share the ground set");
        let f = random_submodular(n, &mut rng);
        let (_, opt) = brute::best_independent(&family, |m| f[m as usize]);
        let k = max_independent_size(&family);
        let k_brute = brute::max_independent_size(&family);
        report.check(k.exact && k.size == k_brute, || {
            format!("case {case}: k {k:?} vs {k_brute}")
        });
        let mask_of = |s: &[usize]| s.iter().fold(0u64, |acc, &e| acc | 1 << e);
        let instance_seed = derive(seed, &[u64::from(case)]);
        for &eps in std::iter::once(&0.0).chain(epsilons) {
            let z =
                |s: &[usize]| Ok(f[mask_of(s) as usize] * noise(instance_seed, mask_of(s), eps));
            let trace =
                greedy_maximize(&z, &family, GreedyConfig::default()).expect("total oracle");
            let chosen = trace.selected_sorted();
            report.check(family.is_independent(&chosen).expect("in range"), || {
                format!("case {case}: dependent output {chosen:?}")
            });
            let got = f[mask_of(&chosen) as usize];
            let ratio = theorem1_ratio(2, eps, k.size.max(1)).expect("valid arguments");
            report.check(got >= ratio * opt - 1e-12, || {
                format!("case {case}, ε={eps}: greedy {got} < {ratio} · {opt}")
            });
        }
        report.cases += 1;
    }
    report.timed(started)
}

/// The flow-based additive solver reaches the enumerated optimum on random
/// instances with at most 6 agents and 3 localities, and returns a feasible
/// matching.
pub fn additive_exactness(instances: u32, seed: u64) -> SuiteReport {
    let started = Instant::now();
    let mut report = SuiteReport::new("additive-exactness");
    let mut rng = rng(seed, 14);
    for case in 0..instances {
        let agents = rng.gen_range(1..=6);
        let localities = rng.gen_range(1..=3);
        let weights: Vec<Vec<Option<f64>>> = (0..agents)
            .map(|_| {
                (0..localities)
                    .map(|_| match rng.gen_range(0..10) {
                        0 => None,
                        1 => Some(0.0),
                        // Coarse values make ties common.
                        2 | 3 => Some(f64::from(rng.gen_range(1..=4)) / 4.0),
                        _ => Some(rng.gen()),
                    })
                    .collect()
            })
            .collect();
        let caps: Vec<u32> = (0..localities).map(|_| rng.gen_range(0..=3)).collect();
        let instance = AdditiveInstance::new(weights, caps.clone()).expect("valid instance");
        let sol = solve_additive(&instance);
        let best = brute::max_weight_b_matching(instance.weights(), &caps);
        report.check((sol.value - best).abs() <= TOL, || {
            format!("case {case}: flow {} vs enumeration {best}", sol.value)
        });
        let mut load = vec![0u32; localities];
        let mut seen = vec![false; agents];
        let mut feasible = true;
        for p in sol.matching.pairs() {
            feasible &= !seen[p.agent] && instance.weights()[p.agent][p.locality].is_some();
            seen[p.agent] = true;
            load[p.locality] += 1;
        }
        feasible &= load.iter().zip(&caps).all(|(l, c)| l <= c);
        report.check(feasible, || {
            format!("case {case}: infeasible {:?}", sol.matching)
        });
        report.cases += 1;
    }
    report.timed(started)
}

/// All suites at their default sizes.
pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    let mut out: Vec<SuiteReport> = ModelKind::ALL
        .iter()
        .map(|&m| submodularity(m, 20, seed))
        .collect();
    out.push(interview_supermodularity(5, seed));
    out.push(open_positions_convexity(50, seed));
    out.push(matching_submodularity(100, seed));
    out.push(greedy_ratio(500, &[0.05, 0.1], seed));
    out.push(additive_exactness(500, seed));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for r in [
            submodularity(ModelKind::Correction, 1, 3),
            submodularity(ModelKind::Interview, 1, 3),
            submodularity(ModelKind::Coordination, 1, 3),
            interview_supermodularity(1, 3),
            open_positions_convexity(10, 3),
            matching_submodularity(10, 3),
            greedy_ratio(20, &[0.1], 3),
            additive_exactness(50, 3),
        ] {
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn reports_record_the_first_violation() {
        let mut r = SuiteReport::new("x");
        r.check(true, || unreachable!());
        r.check(false, || "a".into());
        r.check(false, || "b".into());
        assert_eq!((r.checks, r.violations), (3, 2));
        assert_eq!(r.first_violation.as_deref(), Some("a"));
        assert!(!r.passed());
    }
}
