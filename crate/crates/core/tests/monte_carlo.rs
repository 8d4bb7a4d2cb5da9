use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

use submigrate::additive::{solve_additive, AdditiveInstance};
use submigrate::brute;
use submigrate::matroid::{Matching, Pair};
use submigrate::models::exact::{group_value_exact, ExactLimits};
use submigrate::models::{
    estimate_group, group_pairs, model_expected_exact, model_expected_mc, EstimatorConfig,
    GroupKey, ModelKind, Scenario,
};
use submigrate::selftest::small_scenario;

/// `E[X²]` of one group's employment by full outcome enumeration.
fn second_moment(scenario: &Scenario, key: GroupKey, agents: &[usize]) -> f64 {
    let probs: Vec<f64> = agents
        .iter()
        .map(|&a| scenario.agents()[a].p(key.locality))
        .collect();
    match scenario.model() {
        ModelKind::Correction => {
            let c = scenario.correction(key.locality, key.profession.unwrap());
            brute::correction_by_enumeration(&probs, |n| c.eval(n).powi(2))
        }
        ModelKind::Interview => {
            let jobs = scenario.localities()[key.locality].jobs_of(key.profession.unwrap());
            let n = agents.len();
            let orders: Vec<Vec<usize>> = (0..n).permutations(n).collect();
            let per_order = |order: &Vec<usize>| {
                // Distribution of capped first-success indices, as in the
                // interview process: hired iff index ≤ jobs still open.
                let dists: Vec<Vec<(u32, f64)>> = order
                    .iter()
                    .map(|&i| {
                        let p = probs[i];
                        let mut d: Vec<(u32, f64)> = (1..=jobs)
                            .map(|c| (c, p * (1.0 - p).powi(c as i32 - 1)))
                            .collect();
                        d.push((jobs + 1, (1.0 - p).powi(jobs as i32)));
                        d
                    })
                    .collect();
                dists
                    .iter()
                    .map(|d| d.iter())
                    .multi_cartesian_product()
                    .map(|outcome| {
                        let mut open = jobs;
                        let mut w = 1.0;
                        for &(c, q) in outcome {
                            w *= q;
                            if c <= open {
                                open -= 1;
                            }
                        }
                        w * f64::from(jobs - open).powi(2)
                    })
                    .sum::<f64>()
            };
            orders.iter().map(per_order).sum::<f64>() / orders.len() as f64
        }
        ModelKind::Coordination => {
            let table = scenario.compat(key.locality);
            let cells: Vec<(usize, usize, f64)> = agents
                .iter()
                .enumerate()
                .flat_map(|(i, &a)| {
                    table
                        .row(a)
                        .iter()
                        .enumerate()
                        .map(move |(j, &p)| (i, j, p))
                })
                .collect();
            (0u64..1 << cells.len())
                .map(|mask| {
                    let mut w = 1.0;
                    let mut edges = Vec::new();
                    for (bit, &(i, j, p)) in cells.iter().enumerate() {
                        if mask >> bit & 1 == 1 {
                            w *= p;
                            edges.push((i, j));
                        } else {
                            w *= 1.0 - p;
                        }
                    }
                    let m = brute::max_matching_size(agents.len(), table.jobs(), &edges) as f64;
                    w * m * m
                })
                .sum()
        }
    }
}

#[test]
fn sampled_group_means_stay_within_four_sigma() {
    let samples = 1000;
    for model in ModelKind::ALL {
        let mut rng = Pcg64Mcg::seed_from_u64(17 + model as u64);
        let mut trials = 0;
        let mut inside = 0;
        while trials < 300 {
            let agents = rng.gen_range(1..=4);
            let scenario = small_scenario(model, agents, 1, &mut rng);
            let pairs: Vec<Pair> = (0..agents).map(|a| Pair::new(a, 0)).collect();
            for (key, members) in group_pairs(&scenario, pairs) {
                let mean =
                    group_value_exact(&scenario, key, &members, ExactLimits::default()).unwrap();
                let var = (second_moment(&scenario, key, &members) - mean * mean).max(0.0);
                let est = estimate_group(&scenario, key, &members, samples, rng.gen());
                let bound = 4.0 * (var / f64::from(samples)).sqrt();
                trials += 1;
                if (est - mean).abs() <= bound + 1e-9 {
                    inside += 1;
                }
            }
        }
        assert!(
            inside as f64 >= 0.99 * trials as f64,
            "{model}: only {inside}/{trials} estimates within 4σ"
        );
    }
}

#[test]
fn degenerate_coins_make_estimates_exact() {
    let mut rng = Pcg64Mcg::seed_from_u64(5);
    for model in ModelKind::ALL {
        for _ in 0..30 {
            let scenario = small_scenario(model, 4, 2, &mut rng);
            let mut file = scenario.to_file().clone();
            for a in &mut file.agents {
                a.p = submigrate::models::ProbabilitySpec::Uniform(f64::from(rng.gen_range(0..=1)));
            }
            for e in &mut file.p_table {
                e.p = e.p.round();
            }
            let scenario = Scenario::try_from(file).unwrap();
            let matching = Matching::new([Pair::new(0, 0), Pair::new(1, 0), Pair::new(2, 1)]);
            if matching.validate(&scenario).is_err() {
                continue;
            }
            let cfg = EstimatorConfig {
                samples: 7,
                seed: rng.gen(),
                ..Default::default()
            };
            let mc = model_expected_mc(&matching, &scenario, &cfg).unwrap();
            let exact =
                model_expected_exact(&scenario, matching.pairs(), ExactLimits::default()).unwrap();
            assert!((mc - exact).abs() < 1e-12, "{model}: {mc} vs {exact}");
        }
    }
}

#[test]
fn estimates_are_bit_identical_per_seed_and_zero_when_empty() {
    let scenario =
        submigrate::harness::generate_standard(ModelKind::Coordination, 40, 4, 9).unwrap();
    let instance = AdditiveInstance::from_scenario(&scenario).unwrap();
    let matching = solve_additive(&instance).matching;
    let cfg = EstimatorConfig {
        samples: 200,
        seed: 77,
        ..Default::default()
    };
    let a = model_expected_mc(&matching, &scenario, &cfg).unwrap();
    let b = model_expected_mc(&matching, &scenario, &cfg).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
    let other =
        model_expected_mc(&matching, &scenario, &EstimatorConfig { seed: 78, ..cfg }).unwrap();
    assert_ne!(a.to_bits(), other.to_bits());
    assert_eq!(
        model_expected_mc(&Matching::default(), &scenario, &cfg).unwrap(),
        0.0
    );
    let bad = EstimatorConfig { samples: 0, ..cfg };
    assert!(model_expected_mc(&Matching::default(), &scenario, &bad).is_err());
}

#[test]
fn infeasible_matchings_are_rejected() {
    let scenario = submigrate::harness::generate_standard(ModelKind::Interview, 4, 2, 1).unwrap();
    let twice = Matching::new([Pair::new(0, 0), Pair::new(0, 1)]);
    assert!(model_expected_mc(&twice, &scenario, &EstimatorConfig::default()).is_err());
}

#[test]
fn expected_employment_is_bounded_by_agents_and_jobs() {
    let mut rng = Pcg64Mcg::seed_from_u64(8);
    for model in ModelKind::ALL {
        for _ in 0..50 {
            let scenario = small_scenario(model, 4, 2, &mut rng);
            let pairs: Vec<Pair> = (0..4).map(|a| Pair::new(a, a % 2)).collect();
            for (key, agents) in group_pairs(&scenario, pairs) {
                let v = group_value_exact(&scenario, key, &agents, ExactLimits::default()).unwrap();
                let loc = &scenario.localities()[key.locality];
                let jobs = match key.profession {
                    Some(p) => loc.jobs_of(p),
                    None => loc.total_jobs(),
                };
                let mut cap = agents.len().min(jobs as usize) as f64;
                if model == ModelKind::Correction {
                    let c = scenario.correction(key.locality, key.profession.unwrap());
                    cap = c.eval(agents.len() as u32);
                }
                assert!(
                    v >= -1e-12 && v <= cap + 1e-9,
                    "{model}: {v} outside [0, {cap}]"
                );
            }
        }
    }
}
