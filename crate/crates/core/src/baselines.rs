//! Comparison schedulers: a Solstice-style perfect-matching heuristic and a
//! truncated Birkhoff-von-Neumann decomposition.
//!
//! Both first "stuff" the demand with dummy traffic until every row and
//! column sums to the same value S, which guarantees (by Hall's condition)
//! that the positive support always contains a perfect matching. Solstice
//! repeatedly schedules the longest fully-utilized perfect matching; BvN
//! decomposes the stuffed matrix completely and keeps the longest prefix of
//! terms, by descending weight, that fits in the window. Stuffed traffic is
//! phantom: throughput is always scored against the original demand.

use crate::error::{Error, Result};
use crate::matching::{has_perfect_matching_at_threshold, hopcroft_karp, lex_min_perfect_matching};
use crate::model::{
    validate_demand, Matching, Schedule, ScheduleEntry, SchedulerConfig, TrafficMatrix,
};

/// A demand matrix plus the dummy traffic that balances it: every row and
/// column of `base + stuffing` sums to the common value `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StuffedMatrix {
    base: TrafficMatrix,
    stuffing: TrafficMatrix,
    s: u64,
}

impl StuffedMatrix {
    pub fn base(&self) -> &TrafficMatrix {
        &self.base
    }

    pub fn stuffing(&self) -> &TrafficMatrix {
        &self.stuffing
    }

    /// The common row/column sum.
    pub fn s(&self) -> u64 {
        self.s
    }

    /// `base + stuffing`.
    pub fn total_matrix(&self) -> TrafficMatrix {
        let n = self.base.n();
        let mut out = TrafficMatrix::zero(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.base.get(i, j) + self.stuffing.get(i, j));
            }
        }
        out
    }
}

/// Greedily adds stuffing to deficient cells until every row and column
/// sums to `S = max(row sums, column sums)`. Errors if `S` exceeds the
/// window, since no schedule could then cover the balanced matrix.
pub fn stuff(t: &TrafficMatrix, window: u64) -> Result<StuffedMatrix> {
    let n = t.n();
    let s = (0..n)
        .map(|i| t.row_sum(i))
        .chain((0..n).map(|j| t.col_sum(j)))
        .max()
        .unwrap_or(0);
    if s > window {
        return Err(Error::InfeasibleDemand(format!(
            "max row/column sum {s} exceeds window {window}"
        )));
    }
    let mut row_deficit: Vec<u64> = (0..n).map(|i| s - t.row_sum(i)).collect();
    let mut col_deficit: Vec<u64> = (0..n).map(|j| s - t.col_sum(j)).collect();
    let mut stuffing = TrafficMatrix::zero(n);
    for i in 0..n {
        if row_deficit[i] == 0 {
            continue;
        }
        for j in 0..n {
            let add = row_deficit[i].min(col_deficit[j]);
            if add > 0 {
                stuffing.set(i, j, stuffing.get(i, j) + add);
                row_deficit[i] -= add;
                col_deficit[j] -= add;
            }
            if row_deficit[i] == 0 {
                break;
            }
        }
    }
    Ok(StuffedMatrix {
        base: t.clone(),
        stuffing,
        s,
    })
}

/// Decomposes a stuffed matrix into weighted perfect matchings:
/// repeatedly extract a perfect matching on the positive support with
/// weight = the minimum entry along it, and subtract. The weighted sum of
/// the returned matchings reconstructs `base + stuffing` exactly.
///
/// The matching kept from round to round is repaired incrementally: only
/// rows whose matched cell hit zero are re-augmented, scanning columns in
/// ascending order, which keeps the decomposition deterministic.
pub fn bvn_decompose(m: &StuffedMatrix) -> Result<Vec<(u64, Matching)>> {
    let n = m.base().n();
    let mut work = m.total_matrix();
    for i in 0..n {
        if work.row_sum(i) != m.s() || work.col_sum(i) != m.s() {
            return Err(Error::NotDoublyBalanced(format!(
                "row/column {i} does not sum to {}",
                m.s()
            )));
        }
    }

    let mut terms = Vec::new();
    if work.is_zero() {
        return Ok(terms);
    }

    const NIL: usize = usize::MAX;
    let support_adj = |w: &TrafficMatrix| -> Vec<Vec<usize>> {
        (0..n)
            .map(|i| (0..n).filter(|&j| w.get(i, j) > 0).collect())
            .collect()
    };

    let adj = support_adj(&work);
    let initial = hopcroft_karp(n, n, &adj);
    let mut row_match: Vec<usize> = initial
        .iter()
        .map(|o| {
            o.ok_or_else(|| Error::NotDoublyBalanced("support has no perfect matching".into()))
        })
        .collect::<Result<_>>()?;
    let mut col_match = vec![NIL; n];
    for i in 0..n {
        col_match[row_match[i]] = i;
    }

    fn kuhn(
        i: usize,
        work: &TrafficMatrix,
        row_match: &mut [usize],
        col_match: &mut [usize],
        visited: &mut [bool],
    ) -> bool {
        const NIL: usize = usize::MAX;
        let n = work.n();
        for j in 0..n {
            if work.get(i, j) == 0 || visited[j] {
                continue;
            }
            visited[j] = true;
            if col_match[j] == NIL || kuhn(col_match[j], work, row_match, col_match, visited) {
                row_match[i] = j;
                col_match[j] = i;
                return true;
            }
        }
        false
    }

    while !work.is_zero() {
        // Repair rows whose matched cell was zeroed by the last subtraction.
        for i in 0..n {
            if row_match[i] != NIL && work.get(i, row_match[i]) == 0 {
                col_match[row_match[i]] = NIL;
                row_match[i] = NIL;
            }
        }
        for i in 0..n {
            if row_match[i] == NIL {
                let mut visited = vec![false; n];
                if !kuhn(i, &work, &mut row_match, &mut col_match, &mut visited) {
                    return Err(Error::NotDoublyBalanced(
                        "support lost its perfect matching mid-decomposition".into(),
                    ));
                }
            }
        }
        let weight = (0..n).map(|i| work.get(i, row_match[i])).min().unwrap();
        debug_assert!(weight > 0);
        let matching =
            Matching::new((0..n).map(|i| (i, row_match[i])).collect()).expect("valid matching");
        for i in 0..n {
            let j = row_match[i];
            work.set(i, j, work.get(i, j) - weight);
        }
        terms.push((weight, matching));
    }
    Ok(terms)
}

/// Truncated BvN scheduler: stuff, decompose, sort terms by weight
/// descending, and keep the longest prefix fitting the window budget.
pub fn bvn_schedule(t: &TrafficMatrix, cfg: &SchedulerConfig) -> Result<Schedule> {
    validate_demand(t, cfg).into_result()?;
    let stuffed = stuff(t, cfg.window)?;
    let mut terms = bvn_decompose(&stuffed)?;
    terms.sort_by_key(|t| std::cmp::Reverse(t.0)); // stable: extraction order breaks ties
    let mut entries = Vec::new();
    let mut used = 0u64;
    for (weight, matching) in terms {
        if used + weight + cfg.delay > cfg.window {
            break;
        }
        used += weight + cfg.delay;
        entries.push(ScheduleEntry::new(weight, matching)?);
    }
    Schedule::new(entries, cfg.window, cfg.delay)
}

/// Solstice-style scheduler: stuff the demand, then in each round find the
/// largest duration `alpha` whose thresholded support still has a perfect
/// matching (binary search over the distinct remaining entries), schedule
/// that matching for `alpha` slots, and subtract. Stops when the remaining
/// matrix is zero or the next entry would overflow the window (the entry
/// is dropped entirely).
pub fn solstice_schedule(t: &TrafficMatrix, cfg: &SchedulerConfig) -> Result<Schedule> {
    validate_demand(t, cfg).into_result()?;
    let stuffed = stuff(t, cfg.window)?;
    let mut work = stuffed.total_matrix();
    let n = work.n();
    let mut entries = Vec::new();
    let mut used = 0u64;

    while !work.is_zero() {
        let distinct = work.distinct_nonzero_entries();
        // Feasibility is monotone: raising alpha only removes edges. The
        // smallest entry always works because the balanced support contains
        // a perfect matching.
        let mut lo = 0usize;
        let mut hi = distinct.len() - 1;
        debug_assert!(has_perfect_matching_at_threshold(&work, distinct[0]));
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if has_perfect_matching_at_threshold(&work, distinct[mid]) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let alpha = distinct[lo];
        if used + alpha + cfg.delay > cfg.window {
            break;
        }
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| work.get(i, j) >= alpha).collect())
            .collect();
        let matching = lex_min_perfect_matching(n, &adj)
            .expect("threshold chosen to admit a perfect matching");
        for &(i, j) in matching.pairs() {
            work.set(i, j, work.get(i, j) - alpha);
        }
        used += alpha + cfg.delay;
        entries.push(ScheduleEntry::new(alpha, matching)?);
    }
    Schedule::new(entries, cfg.window, cfg.delay)
}
