//! Problem instances and their JSON file format.
//!
//! A scenario file is a single JSON object:
//!
//! ```json
//! {
//!   "model": "interview",
//!   "agents": [{"id": 0, "profession": 1, "p": 0.42},
//!              {"id": 1, "profession": 2, "p": {"0": 0.3, "1": 0.6}}],
//!   "localities": [{"id": 0, "capacity": 1, "jobs": {"1": 1}},
//!                  {"id": 1, "capacity": 1, "jobs": {"2": 1}}],
//!   "p_table": [{"agent": 1, "locality": 0, "job": 0, "p": 0.1}],
//!   "corrections": [{"locality": 0, "profession": 1, "kind": "cap", "cap": 1}],
//!   "allowed_pairs": [[0, 0], [0, 1], [1, 1]]
//! }
//! ```
//!
//! The README carries the field-by-field description.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use super::correction::CorrectionFunction;
use crate::error::{Error, Result};
use crate::matroid::Pair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Correction,
    Interview,
    Coordination,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::Correction,
        ModelKind::Interview,
        ModelKind::Coordination,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Correction => "correction",
            ModelKind::Interview => "interview",
            ModelKind::Coordination => "coordination",
        }
    }

    /// Whether employment is computed per (locality, profession) rather than
    /// per locality.
    pub fn splits_by_profession(self) -> bool {
        !matches!(self, ModelKind::Coordination)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model {s:?}")))
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub model: ModelKind,
    pub agents: Vec<AgentRecord>,
    pub localities: Vec<LocalityRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub p_table: Vec<PTableEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub corrections: Vec<CorrectionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_pairs: Option<Vec<[u32; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentRecord {
    pub id: u32,
    pub profession: u32,
    pub p: ProbabilitySpec,
}

/// Either one probability for every locality or one per locality id.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ProbabilitySpec {
    Uniform(f64),
    PerLocality(BTreeMap<u32, f64>),
}

// Untagged deserialization buffers the map and then cannot read its string
// keys as integers, so dispatch on the JSON type by hand.
impl<'de> Deserialize<'de> for ProbabilitySpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct SpecVisitor;

        impl<'de> Visitor<'de> for SpecVisitor {
            type Value = ProbabilitySpec;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a probability or a map from locality id to probability")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                Ok(ProbabilitySpec::Uniform(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                Ok(ProbabilitySpec::Uniform(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                Ok(ProbabilitySpec::Uniform(v as f64))
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                map: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                BTreeMap::deserialize(de::value::MapAccessDeserializer::new(map))
                    .map(ProbabilitySpec::PerLocality)
            }
        }

        deserializer.deserialize_any(SpecVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalityRecord {
    pub id: u32,
    pub capacity: u32,
    /// Job count per profession id.
    pub jobs: BTreeMap<u32, u32>,
}

/// Coordination-model override of the compatibility probability between an
/// agent and one job. `job` indexes the locality's jobs expanded in ascending
/// profession order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PTableEntry {
    pub agent: u32,
    pub locality: u32,
    pub job: u32,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionEntry {
    pub locality: u32,
    pub profession: u32,
    #[serde(flatten)]
    pub function: CorrectionFunction,
}

// ---------------------------------------------------------------------------
// Validated scenario
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: u32,
    pub profession: u32,
    p: Vec<f64>,
}

impl Agent {
    /// Qualification / acceptance probability `p_iℓ` at locality index `l`.
    pub fn p(&self, locality: usize) -> f64 {
        self.p[locality]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Locality {
    pub id: u32,
    pub capacity: u32,
    jobs: BTreeMap<u32, u32>,
    job_professions: Vec<u32>,
}

impl Locality {
    /// `k_ℓπ`.
    pub fn jobs_of(&self, profession: u32) -> u32 {
        self.jobs.get(&profession).copied().unwrap_or(0)
    }

    /// `k_ℓ`.
    pub fn total_jobs(&self) -> u32 {
        self.job_professions.len() as u32
    }

    pub fn jobs(&self) -> &BTreeMap<u32, u32> {
        &self.jobs
    }

    /// Profession of each job, in job-index order.
    pub fn job_professions(&self) -> &[u32] {
        &self.job_professions
    }
}

/// Agent × job compatibility probabilities at one locality, row-major by
/// agent index.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatTable {
    jobs: usize,
    probs: Vec<f64>,
}

impl CompatTable {
    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn row(&self, agent: usize) -> &[f64] {
        &self.probs[agent * self.jobs..(agent + 1) * self.jobs]
    }
}

/// A validated problem instance. Agents and localities are sorted by id;
/// everything else refers to them by position.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    model: ModelKind,
    agents: Vec<Agent>,
    localities: Vec<Locality>,
    corrections: HashMap<(usize, u32), CorrectionFunction>,
    compat: Vec<CompatTable>,
    allowed: Option<Vec<Pair>>,
    source: ScenarioFile,
}

impl Scenario {
    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn localities(&self) -> &[Locality] {
        &self.localities
    }

    /// Sorted allowed pairs, or `None` for the complete ground set.
    pub fn allowed_pairs(&self) -> Option<&[Pair]> {
        self.allowed.as_deref()
    }

    /// `C_ℓπ`, defaulting to `n ↦ min(n, k_ℓπ)`.
    pub fn correction(&self, locality: usize, profession: u32) -> CorrectionFunction {
        self.corrections
            .get(&(locality, profession))
            .cloned()
            .unwrap_or_else(|| {
                CorrectionFunction::cap(self.localities[locality].jobs_of(profession))
            })
    }

    pub fn compat(&self, locality: usize) -> &CompatTable {
        &self.compat[locality]
    }

    /// The same instance evaluated under another model.
    pub fn with_model(&self, model: ModelKind) -> Scenario {
        let mut s = self.clone();
        s.model = model;
        s.source.model = model;
        s
    }

    pub fn to_file(&self) -> &ScenarioFile {
        &self.source
    }

    pub fn from_json(text: &str) -> std::result::Result<Scenario, ScenarioLoadError> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(ScenarioLoadError::Json)?;
        Scenario::try_from(file).map_err(ScenarioLoadError::Invalid)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Scenario::from_json(&text).map_err(|e| match e {
            ScenarioLoadError::Json(source) => Error::Json {
                path: path.to_path_buf(),
                source,
            },
            ScenarioLoadError::Invalid(err) => err,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text =
            serde_json::to_string_pretty(&self.source).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug)]
pub enum ScenarioLoadError {
    Json(serde_json::Error),
    Invalid(Error),
}

impl fmt::Display for ScenarioLoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioLoadError::Json(e) => write!(f, "malformed scenario JSON: {e}"),
            ScenarioLoadError::Invalid(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for ScenarioLoadError {}

fn check_probability(what: impl FnOnce() -> String, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidProbability {
            what: what(),
            value,
        })
    }
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = Error;

    fn try_from(mut file: ScenarioFile) -> Result<Scenario> {
        if file.agents.is_empty() || file.localities.is_empty() {
            return Err(Error::EmptyScenario);
        }
        file.agents.sort_by_key(|a| a.id);
        file.localities.sort_by_key(|l| l.id);
        if let Some(w) = file.agents.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::InvalidScenario(format!(
                "duplicate agent id {}",
                w[0].id
            )));
        }
        if let Some(w) = file.localities.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::InvalidScenario(format!(
                "duplicate locality id {}",
                w[0].id
            )));
        }
        let locality_index: HashMap<u32, usize> = file
            .localities
            .iter()
            .enumerate()
            .map(|(i, l)| (l.id, i))
            .collect();
        let agent_index: HashMap<u32, usize> = file
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| (a.id, i))
            .collect();
        let lookup_locality = |id: u32| {
            locality_index
                .get(&id)
                .copied()
                .ok_or_else(|| Error::InvalidScenario(format!("unknown locality id {id}")))
        };
        let lookup_agent = |id: u32| {
            agent_index
                .get(&id)
                .copied()
                .ok_or_else(|| Error::InvalidScenario(format!("unknown agent id {id}")))
        };

        let localities: Vec<Locality> = file
            .localities
            .iter()
            .map(|rec| Locality {
                id: rec.id,
                capacity: rec.capacity,
                jobs: rec
                    .jobs
                    .iter()
                    .filter(|(_, &k)| k > 0)
                    .map(|(&p, &k)| (p, k))
                    .collect(),
                job_professions: rec
                    .jobs
                    .iter()
                    .flat_map(|(&prof, &k)| std::iter::repeat_n(prof, k as usize))
                    .collect(),
            })
            .collect();

        let mut agents = Vec::with_capacity(file.agents.len());
        for rec in &file.agents {
            let p = match &rec.p {
                ProbabilitySpec::Uniform(p) => {
                    let p = check_probability(|| format!("agent {}", rec.id), *p)?;
                    vec![p; localities.len()]
                }
                ProbabilitySpec::PerLocality(map) => {
                    let mut p = vec![f64::NAN; localities.len()];
                    for (&loc, &value) in map {
                        let l = lookup_locality(loc)?;
                        p[l] = check_probability(
                            || format!("agent {} at locality {loc}", rec.id),
                            value,
                        )?;
                    }
                    if let Some(l) = p.iter().position(|v| v.is_nan()) {
                        return Err(Error::InvalidScenario(format!(
                            "agent {} has no probability for locality {}",
                            rec.id, localities[l].id
                        )));
                    }
                    p
                }
            };
            agents.push(Agent {
                id: rec.id,
                profession: rec.profession,
                p,
            });
        }

        let mut corrections = HashMap::new();
        for entry in &file.corrections {
            entry.function.validate()?;
            let l = lookup_locality(entry.locality)?;
            if corrections
                .insert((l, entry.profession), entry.function.clone())
                .is_some()
            {
                return Err(Error::InvalidScenario(format!(
                    "duplicate correction for locality {} profession {}",
                    entry.locality, entry.profession
                )));
            }
        }

        let mut compat: Vec<CompatTable> = localities
            .iter()
            .enumerate()
            .map(|(l, loc)| CompatTable {
                jobs: loc.job_professions.len(),
                probs: agents
                    .iter()
                    .flat_map(|a| {
                        loc.job_professions.iter().map(move |&prof| {
                            if prof == a.profession {
                                a.p[l]
                            } else {
                                0.0
                            }
                        })
                    })
                    .collect(),
            })
            .collect();
        let mut seen = HashSet::new();
        for entry in &file.p_table {
            let a = lookup_agent(entry.agent)?;
            let l = lookup_locality(entry.locality)?;
            let table = &mut compat[l];
            let j = entry.job as usize;
            if j >= table.jobs {
                return Err(Error::InvalidScenario(format!(
                    "p_table job {} out of range at locality {} ({} jobs)",
                    entry.job, entry.locality, table.jobs
                )));
            }
            if !seen.insert((a, l, j)) {
                return Err(Error::InvalidScenario(format!(
                    "duplicate p_table entry for agent {} locality {} job {}",
                    entry.agent, entry.locality, entry.job
                )));
            }
            table.probs[a * table.jobs + j] = check_probability(
                || {
                    format!(
                        "p_table agent {} locality {} job {}",
                        entry.agent, entry.locality, entry.job
                    )
                },
                entry.p,
            )?;
        }

        let allowed = match &file.allowed_pairs {
            None => None,
            Some(list) => {
                let mut pairs = list
                    .iter()
                    .map(|&[a, l]| Ok(Pair::new(lookup_agent(a)?, lookup_locality(l)?)))
                    .collect::<Result<Vec<_>>>()?;
                pairs.sort_unstable();
                if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
                    return Err(Error::InvalidScenario(format!(
                        "duplicate allowed pair ({}, {})",
                        agents[w[0].agent].id, localities[w[0].locality].id
                    )));
                }
                Some(pairs)
            }
        };

        Ok(Scenario {
            model: file.model,
            agents,
            localities,
            corrections,
            compat,
            allowed,
            source: file,
        })
    }
}
