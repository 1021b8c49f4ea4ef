//! The Eclipse greedy direct-routing scheduler.
//!
//! Each round adds the `(alpha, M)` pair maximizing effective utilization
//! `||min(alpha*M, T_rem)||_1 / (alpha + delta)`, subtracts the delivered
//! traffic, and stops when the window is exhausted or the demand is fully
//! covered. The maximizing duration always lies among the distinct entries
//! of the remaining demand, so the exact step scans that set; the
//! binary-search step narrows it with pairwise comparisons instead and
//! settles for a local maximum.

use crate::error::{Error, Result};
use crate::matching::{max_weight_matching, mwm_value, WeightedBipartiteGraph};
use crate::model::{
    threshold, validate_demand, Matching, Ratio, Schedule, ScheduleEntry, SchedulerConfig,
    TrafficMatrix,
};

/// Which greedy-step search to use inside [`eclipse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyStep {
    /// Evaluate every distinct entry of the remaining demand.
    Exact,
    /// Binary search over the sorted distinct entries.
    BinarySearch,
}

/// Outcome of one greedy step: the chosen duration and matching, the
/// traffic it delivers, and the effective-utilization ratio that won.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyStepResult {
    pub alpha: u64,
    pub matching: Matching,
    pub gain: u64,
    pub ratio: Ratio,
}

fn step_result_at(t_rem: &TrafficMatrix, delta: u64, alpha: u64) -> GreedyStepResult {
    let clipped = threshold(t_rem, alpha);
    let (matching, gain) = max_weight_matching(&WeightedBipartiteGraph::from_traffic(&clipped));
    GreedyStepResult {
        alpha,
        matching,
        gain,
        ratio: Ratio::new(gain, alpha + delta),
    }
}

/// Exact greedy step: evaluates the matching value at every distinct
/// nonzero entry of `T_rem` and returns the global ratio maximizer.
/// Ties prefer the larger duration, then the lexicographically smaller
/// matching (which the matching solver already provides).
pub fn greedy_step_exact(t_rem: &TrafficMatrix, delta: u64) -> Result<GreedyStepResult> {
    let candidates = t_rem.distinct_nonzero_entries();
    if candidates.is_empty() {
        return Err(Error::EmptyDemand);
    }
    let mut best_alpha = candidates[0];
    let mut best_ratio = Ratio::zero();
    for &alpha in &candidates {
        let value = mwm_value(&threshold(t_rem, alpha));
        let ratio = Ratio::new(value, alpha + delta);
        // Candidates ascend, so >= implements the larger-alpha tie rule.
        if ratio >= best_ratio {
            best_ratio = ratio;
            best_alpha = alpha;
        }
    }
    Ok(step_result_at(t_rem, delta, best_alpha))
}

/// Binary-search greedy step. Maintains index bounds over the sorted
/// distinct entries, compares the effective utilization at adjacent probe
/// points, and narrows toward the larger; equal probes return immediately.
/// When the bounds become adjacent the better endpoint wins (larger alpha
/// on ties), which also guards against the stall when a probe cannot
/// advance the lower bound.
pub fn greedy_step_binary_search(t_rem: &TrafficMatrix, delta: u64) -> Result<GreedyStepResult> {
    let h = t_rem.distinct_nonzero_entries();
    if h.is_empty() {
        return Err(Error::EmptyDemand);
    }
    let ratio_at = |alpha: u64| {
        let value = mwm_value(&threshold(t_rem, alpha));
        Ratio::new(value, alpha + delta)
    };
    if h.len() == 1 {
        return Ok(step_result_at(t_rem, delta, h[0]));
    }
    let mut lb = 0usize;
    let mut ub = h.len() - 1;
    while ub - lb > 1 {
        let i = (lb + ub) / 2;
        let v1 = ratio_at(h[i]);
        let v2 = ratio_at(h[i + 1]);
        if v1 < v2 {
            lb = i;
        } else if v1 > v2 {
            ub = i;
        } else {
            return Ok(step_result_at(t_rem, delta, h[i]));
        }
    }
    let (rl, ru) = (ratio_at(h[lb]), ratio_at(h[ub]));
    let alpha = if ru >= rl { h[ub] } else { h[lb] };
    Ok(step_result_at(t_rem, delta, alpha))
}

/// Runs the greedy scheduler: repeatedly add the greedy-step result and
/// subtract what it delivers, until the demand is covered or the next
/// entry would push `sum(alpha_i) + k*delta` past the window (that entry
/// is discarded and the loop stops). The returned schedule is always
/// window-valid.
pub fn eclipse(t: &TrafficMatrix, cfg: &SchedulerConfig, step: GreedyStep) -> Result<Schedule> {
    validate_demand(t, cfg).into_result()?;
    let mut t_rem = t.clone();
    let mut entries = Vec::new();
    let mut used = 0u64;
    while !t_rem.is_zero() {
        let result = match step {
            GreedyStep::Exact => greedy_step_exact(&t_rem, cfg.delay)?,
            GreedyStep::BinarySearch => greedy_step_binary_search(&t_rem, cfg.delay)?,
        };
        if used + result.alpha + cfg.delay > cfg.window {
            break;
        }
        used += result.alpha + cfg.delay;
        for &(i, j) in result.matching.pairs() {
            let cur = t_rem.get(i, j);
            t_rem.set(i, j, cur - cur.min(result.alpha));
        }
        entries.push(ScheduleEntry::new(result.alpha, result.matching)?);
    }
    Schedule::new(entries, cfg.window, cfg.delay)
}
