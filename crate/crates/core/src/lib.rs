//! Near-optimal schedulers for a hybrid circuit/packet data-center switch
//! with reconfiguration delay.
//!
//! A circuit switch delivers traffic through a sequence of matchings
//! (configurations), each held for some duration; every reconfiguration
//! costs `delay` slots during which nothing flows. Given an integer demand
//! matrix and a scheduling window, the crate computes schedules that
//! maximize the demand delivered inside the window:
//!
//! - [`eclipse::eclipse`] -- greedy direct routing driven by effective
//!   utilization `gain / (alpha + delay)`, with an exact greedy step and a
//!   faster binary-search variant;
//! - [`indirect::eclipsepp`] -- multiplicative-weights indirect routing
//!   over the time-layered graph of a fixed schedule, letting traffic hop
//!   through intermediate ports across rounds;
//! - [`baselines`] -- a Solstice-style perfect-matching heuristic and a
//!   truncated Birkhoff-von-Neumann decomposition for comparison;
//! - [`trafficgen`] -- synthetic single-block and multi-block demand
//!   generators;
//! - [`oracle`] -- brute-force optima for small instances, used by tests;
//! - [`harness`] -- seeded experiment sweeps with CSV export.

pub mod baselines;
pub mod eclipse;
pub mod error;
pub mod format;
pub mod harness;
pub mod indirect;
pub mod matching;
pub mod model;
pub mod oracle;
pub mod trafficgen;

pub use error::{Error, Result};
pub use model::{
    direct_throughput, residual_demand, schedule_duration, threshold, validate_demand, Matching,
    Ratio, Schedule, ScheduleEntry, SchedulerConfig, TrafficMatrix, ValidationReport,
};
