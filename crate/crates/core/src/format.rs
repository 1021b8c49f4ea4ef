//! JSON file schemas for demand matrices, schedules, and path assignments.
//! Port indices are 0-based in all files.

use crate::error::{Error, Result};
use crate::indirect::{Path, PathAssignment};
use crate::model::{Matching, Schedule, ScheduleEntry, TrafficMatrix};
use serde::{Deserialize, Serialize};

/// `{"n": int, "window": int, "delay": int, "entries": [[int,...],...]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemandFile {
    pub n: usize,
    pub window: u64,
    pub delay: u64,
    pub entries: Vec<Vec<u64>>,
}

impl DemandFile {
    pub fn new(t: &TrafficMatrix, window: u64, delay: u64) -> Self {
        Self {
            n: t.n(),
            window,
            delay,
            entries: t.rows(),
        }
    }

    pub fn matrix(&self) -> Result<TrafficMatrix> {
        if self.entries.len() != self.n {
            return Err(Error::InvalidFormat(format!(
                "demand file declares n={} but has {} rows",
                self.n,
                self.entries.len()
            )));
        }
        TrafficMatrix::from_rows(&self.entries)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("demand serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidFormat(format!("demand file: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleEntryFile {
    pub duration: u64,
    pub pairs: Vec<(usize, usize)>,
}

/// `{"window": int, "delay": int, "entries": [{"duration": int, "pairs": [[in,out],...]},...]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub window: u64,
    pub delay: u64,
    pub entries: Vec<ScheduleEntryFile>,
}

impl ScheduleFile {
    pub fn new(s: &Schedule) -> Self {
        Self {
            window: s.window(),
            delay: s.delay(),
            entries: s
                .entries()
                .iter()
                .map(|e| ScheduleEntryFile {
                    duration: e.duration,
                    pairs: e.matching.pairs().to_vec(),
                })
                .collect(),
        }
    }

    pub fn schedule(&self) -> Result<Schedule> {
        let entries = self
            .entries
            .iter()
            .map(|e| ScheduleEntry::new(e.duration, Matching::new(e.pairs.clone())?))
            .collect::<Result<Vec<_>>>()?;
        Schedule::new(entries, self.window, self.delay)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidFormat(format!("schedule file: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssignmentFile {
    pub beta: u64,
    /// `[[layer, port], ...]`, one node per layer in ascending layer order.
    pub nodes: Vec<(usize, usize)>,
}

/// `{"assignments": [{"beta": int, "nodes": [[layer,port],...]}, ...]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssignmentsFile {
    pub assignments: Vec<AssignmentFile>,
}

impl AssignmentsFile {
    pub fn new(assignments: &[PathAssignment]) -> Self {
        Self {
            assignments: assignments
                .iter()
                .map(|a| AssignmentFile {
                    beta: a.beta,
                    nodes: a.path.nodes().iter().copied().enumerate().collect(),
                })
                .collect(),
        }
    }

    pub fn assignments(&self) -> Result<Vec<PathAssignment>> {
        self.assignments
            .iter()
            .map(|a| {
                for (idx, &(layer, _)) in a.nodes.iter().enumerate() {
                    if layer != idx {
                        return Err(Error::InvalidFormat(format!(
                            "path node {idx} labeled layer {layer}"
                        )));
                    }
                }
                if a.beta == 0 {
                    return Err(Error::InvalidFormat("assignment beta must be >= 1".into()));
                }
                Ok(PathAssignment {
                    beta: a.beta,
                    path: Path::new(a.nodes.iter().map(|&(_, p)| p).collect())?,
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("assignments serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidFormat(format!("assignments file: {e}")))
    }
}
