use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::generate;
use crate::error::{Error, Result};
use crate::models::seed::derive;
use crate::models::{ModelKind, Scenario};

/// The swept parameter of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    NumLocalities,
    NumAgents,
    NumProfessions,
    JobAvailability,
    Specialization,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::NumLocalities,
        Family::NumAgents,
        Family::NumProfessions,
        Family::JobAvailability,
        Family::Specialization,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::NumLocalities => "num_localities",
            Family::NumAgents => "num_agents",
            Family::NumProfessions => "num_professions",
            Family::JobAvailability => "job_availability",
            Family::Specialization => "specialization",
        }
    }

    fn code(self) -> u64 {
        Family::ALL.iter().position(|&f| f == self).expect("listed") as u64
    }

    pub fn default_values(self) -> Vec<Point> {
        let counts = |v: &[u32]| v.iter().map(|&x| Point::Count(x)).collect();
        match self {
            Family::NumLocalities => counts(&[1, 2, 5, 10, 20, 50]),
            Family::NumAgents => counts(&[20, 50, 100, 150, 200]),
            Family::NumProfessions => counts(&[1, 2, 3, 5, 10, 20]),
            Family::JobAvailability => [(25, 25), (25, 50), (25, 75), (50, 50), (50, 75), (75, 75)]
                .iter()
                .map(|&(a, b)| Point::Jobs(a, b))
                .collect(),
            Family::Specialization => counts(&[0, 1, 2, 3, 4, 5]),
        }
    }

    /// Parses one swept value in this family's notation: a count, or
    /// `a:b` job counts for job availability.
    pub fn parse_point(self, text: &str) -> Result<Point> {
        let bad = || Error::InvalidSpec(format!("invalid {} value {text:?}", self.as_str()));
        let point = match self {
            Family::JobAvailability => {
                let (a, b) = text.split_once(':').ok_or_else(bad)?;
                Point::Jobs(
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                )
            }
            _ => Point::Count(text.trim().parse().map_err(|_| bad())?),
        };
        self.check_point(point)?;
        Ok(point)
    }

    fn check_point(self, point: Point) -> Result<()> {
        let ok = match (self, point) {
            (Family::NumLocalities, Point::Count(l)) => (1..=100).contains(&l),
            (Family::NumAgents, Point::Count(n)) => n > 0 && n % 10 == 0,
            (Family::NumProfessions, Point::Count(m)) => (1..=100).contains(&m),
            (Family::JobAvailability, Point::Jobs(..)) => true,
            (Family::Specialization, Point::Count(s)) => s <= 5,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!(
                "value {point} is outside the {} family",
                self.as_str()
            )))
        }
    }

    /// The scenario of one family point, generated from `seed`.
    pub fn generate(self, model: ModelKind, point: Point, seed: u64) -> Result<Scenario> {
        self.check_point(point)?;
        match (self, point) {
            (Family::NumLocalities, Point::Count(l)) => {
                generate::generate_standard(model, 100, l, seed)
            }
            (Family::NumAgents, Point::Count(n)) => generate::generate_num_agents(model, n, seed),
            (Family::NumProfessions, Point::Count(m)) => {
                generate::generate_num_professions(model, m, seed)
            }
            (Family::JobAvailability, Point::Jobs(a, b)) => {
                generate::generate_job_availability(model, a, b, seed)
            }
            (Family::Specialization, Point::Count(s)) => {
                generate::generate_specialization(model, s, seed)
            }
            _ => unreachable!("checked above"),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown family {s:?}")))
    }
}

/// One value of the swept parameter. Displayed as it appears in the `x`
/// column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Point {
    Count(u32),
    /// Job counts of professions 1 and 2.
    Jobs(u32, u32),
}

impl Point {
    fn code(self) -> u64 {
        match self {
            Point::Count(x) => u64::from(x),
            Point::Jobs(a, b) => 1 << 63 | u64::from(a) << 32 | u64::from(b),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Count(x) => write!(f, "{x}"),
            Point::Jobs(a, b) => write!(f, "{a}:{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub family: Family,
    pub model: ModelKind,
    pub values: Vec<Point>,
    pub trials: u32,
    pub seed: u64,
    pub samples: u32,
    /// Groups with at most this many agents are valued exactly during the
    /// greedy run instead of by sampling; 0 samples everything.
    pub exact_cutoff: usize,
}

impl ExperimentSpec {
    pub fn new(family: Family, model: ModelKind) -> Self {
        ExperimentSpec {
            family,
            model,
            values: family.default_values(),
            trials: 10,
            seed: 0,
            samples: 1000,
            exact_cutoff: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidSpec("trials must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidSpec("samples must be at least 1".into()));
        }
        if self.values.is_empty() {
            return Err(Error::InvalidSpec("no swept values".into()));
        }
        self.values
            .iter()
            .try_for_each(|&p| self.family.check_point(p))
    }

    /// Seed of one (point, trial). It does not depend on the model, so all
    /// three models see the same generated instances.
    pub fn trial_seed(&self, point: Point, trial: u32) -> u64 {
        derive(
            self.seed,
            &[self.family.code(), point.code(), u64::from(trial)],
        )
    }

    pub fn scenario(&self, point: Point, trial: u32) -> Result<Scenario> {
        self.family
            .generate(self.model, point, self.trial_seed(point, trial))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.as_str().parse::<Family>().unwrap(), f);
        }
        assert!("nope".parse::<Family>().is_err());
    }

    #[test]
    fn points_parse_per_family() {
        assert_eq!(
            Family::JobAvailability.parse_point("25:75").unwrap(),
            Point::Jobs(25, 75)
        );
        assert_eq!(Point::Jobs(25, 75).to_string(), "25:75");
        assert!(Family::JobAvailability.parse_point("25").is_err());
        assert!(Family::Specialization.parse_point("6").is_err());
        assert!(Family::NumAgents.parse_point("15").is_err());
        assert_eq!(
            Family::NumLocalities.parse_point("10").unwrap(),
            Point::Count(10)
        );
    }

    #[test]
    fn defaults_are_valid() {
        for f in Family::ALL {
            ExperimentSpec::new(f, ModelKind::Interview)
                .validate()
                .unwrap();
        }
    }

    #[test]
    fn trial_seeds_differ_by_point_and_trial_but_not_model() {
        let a = ExperimentSpec::new(Family::NumLocalities, ModelKind::Interview);
        let b = ExperimentSpec::new(Family::NumLocalities, ModelKind::Coordination);
        let p = Point::Count(10);
        assert_eq!(a.trial_seed(p, 0), b.trial_seed(p, 0));
        assert_ne!(a.trial_seed(p, 0), a.trial_seed(p, 1));
        assert_ne!(a.trial_seed(p, 0), a.trial_seed(Point::Count(5), 0));
    }
}
