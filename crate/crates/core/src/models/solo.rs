use super::{ModelKind, Scenario};

/// Probability that `agent` finds work at `locality` when no other agent is
/// matched there. These are the weights of the additive baseline.
pub fn solo_probability(scenario: &Scenario, agent: usize, locality: usize) -> f64 {
    let a = &scenario.agents()[agent];
    let p = a.p(locality);
    match scenario.model() {
        ModelKind::Correction => p * scenario.correction(locality, a.profession).eval(1).min(1.0),
        ModelKind::Interview => {
            let jobs = scenario.localities()[locality].jobs_of(a.profession);
            1.0 - (1.0 - p).powi(jobs as i32)
        }
        ModelKind::Coordination => {
            1.0 - scenario
                .compat(locality)
                .row(agent)
                .iter()
                .map(|q| 1.0 - q)
                .product::<f64>()
        }
    }
}
