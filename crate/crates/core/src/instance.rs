//! The JSON instance format shared by every command.
//!
//! ```json
//! {
//!   "points": [{"id": "a", "weight": 0.5}, {"id": "b", "weight": 0.5}],
//!   "sets": {"C1": ["a"]},
//!   "functions": {"f": [0.25, -1.0]},
//!   "envelope": [1.0, 1.0],
//!   "processes": {"p": {"kind": "iid", "weights": [0.5, 0.5], "seed": 1, "length": 100}},
//!   "partitions": {"halves": [["a"], ["b"]]}
//! }
//! ```
//!
//! Function values and envelopes are aligned with `points`.

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::bracketing::{DiscreteFunctionClass, NamedFunction};
use crate::counterexample::CounterexampleInstance;
use crate::ergodic::{Process, ProcessConfig};
use crate::error::{Result, VcError};
use crate::space::{Cell, GroundSpace, Member, Partition, SetFamily};
use crate::system::DualFamily;

/// Accepted distance of the total weight from 1.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointEntry {
    pub id: String,
    pub weight: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub points: Vec<PointEntry>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub sets: IndexMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub functions: IndexMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub processes: IndexMap<String, ProcessConfig>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub partitions: IndexMap<String, Vec<Vec<String>>>,
}

/// A validated instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub ground: Arc<GroundSpace>,
    pub family: SetFamily,
    pub functions: Option<DiscreteFunctionClass>,
    pub processes: IndexMap<String, ProcessConfig>,
    pub partitions: IndexMap<String, Partition>,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<InstanceFile> {
        serde_json::from_str(text).map_err(|e| VcError::Config(format!("malformed instance: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Checks referential integrity, the weight total, envelope dominance
    /// and process configs.
    pub fn load(&self) -> Result<Instance> {
        if let Some(bad) = self.points.iter().find(|p| !p.weight.is_finite() || p.weight < 0.0) {
            return Err(VcError::Config(format!(
                "point `{}` has invalid weight {}",
                bad.id, bad.weight
            )));
        }
        let total: f64 = self.points.iter().map(|p| p.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(VcError::Config(format!(
                "point weights sum to {total}, outside [1 - 1e-9, 1 + 1e-9]"
            )));
        }
        let ground = Arc::new(
            GroundSpace::new(
                self.points.iter().map(|p| p.id.clone()).collect(),
                self.points.iter().map(|p| p.weight).collect(),
            )
            .map_err(|e| VcError::Config(e.to_string()))?,
        );
        let lookup = |owner: &str, ids: &[String]| {
            ground.subset(ids).map_err(|_| {
                let missing = ids.iter().find(|i| ground.index_of(i).is_none()).unwrap();
                VcError::Config(format!("{owner} references unknown point `{missing}`"))
            })
        };

        let members = self
            .sets
            .iter()
            .map(|(name, ids)| {
                Ok(Member {
                    name: name.clone(),
                    set: lookup(&format!("set `{name}`"), ids)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let family = SetFamily::new(ground.clone(), members)?;

        let functions = if self.functions.is_empty() && self.envelope.is_none() {
            None
        } else {
            let named = self
                .functions
                .iter()
                .map(|(name, values)| NamedFunction {
                    name: name.clone(),
                    values: values.clone(),
                })
                .collect();
            Some(
                DiscreteFunctionClass::new(ground.clone(), named, self.envelope.clone())
                    .map_err(|e| VcError::Config(e.to_string()))?,
            )
        };

        for (name, config) in &self.processes {
            Process::new(config, ground.len())
                .map_err(|e| VcError::Config(format!("process `{name}`: {e}")))?;
        }

        let partitions = self
            .partitions
            .iter()
            .map(|(name, blocks)| {
                let cells = blocks
                    .iter()
                    .enumerate()
                    .map(|(i, ids)| {
                        Ok(Cell {
                            label: format!("{name}{i}"),
                            set: lookup(&format!("partition `{name}`"), ids)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let p = Partition::new(ground.len(), cells)
                    .map_err(|e| VcError::Config(format!("partition `{name}`: {e}")))?;
                Ok((name.clone(), p))
            })
            .collect::<Result<IndexMap<_, _>>>()?;

        Ok(Instance {
            ground,
            family,
            functions,
            processes: self.processes.clone(),
            partitions,
        })
    }

    /// Points and sets of a family.
    pub fn from_family(family: &SetFamily) -> InstanceFile {
        let g = family.ground();
        InstanceFile {
            points: (0..g.len())
                .map(|i| PointEntry {
                    id: g.id(i).to_string(),
                    weight: g.weight(i),
                })
                .collect(),
            sets: family
                .members()
                .iter()
                .map(|m| (m.name.clone(), g.ids_of(&m.set)))
                .collect(),
            ..InstanceFile::default()
        }
    }

    pub fn from_counterexample(c: &CounterexampleInstance) -> InstanceFile {
        InstanceFile::from_family(&c.family)
    }

    pub fn from_dual(d: &DualFamily) -> InstanceFile {
        InstanceFile::from_family(&d.family)
    }
}
