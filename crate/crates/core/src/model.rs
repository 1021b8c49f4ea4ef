//! Domain types shared by all schedulers: traffic matrices, matchings,
//! schedules, and the throughput accounting that every algorithm is scored by.
//!
//! All types are immutable values after construction and all operations are
//! pure functions, so everything here is safe to evaluate concurrently on
//! shared inputs.

use crate::error::{Error, Result};

/// An `n x n` nonnegative integer demand matrix. Entry `(i, j)` is the VOQ
/// backlog (in time slots) at input port `i` destined to output port `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrafficMatrix {
    n: usize,
    entries: Vec<u64>, // row-major
}

impl TrafficMatrix {
    /// Builds a matrix from row-major entries. Fails unless `entries` has
    /// exactly `n * n` elements and `n >= 1`.
    pub fn new(n: usize, entries: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("port count must be >= 1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for n={}, got {}",
                n * n,
                n,
                entries.len()
            )));
        }
        Ok(Self { n, entries })
    }

    /// Builds a matrix from nested rows, checking squareness.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("matrix is not square".into()));
        }
        Self::new(n, rows.iter().flatten().copied().collect())
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            entries: vec![0; n * n],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.entries[i * self.n..(i + 1) * self.n].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        (0..self.n).map(|i| self.get(i, j)).sum()
    }

    /// Entrywise L1 norm, written `||T||_1` throughout.
    pub fn total(&self) -> u64 {
        self.entries.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn max_entry(&self) -> u64 {
        self.entries.iter().copied().max().unwrap_or(0)
    }

    /// The distinct nonzero entry values, ascending. This is the candidate
    /// set the greedy step searches over; the maximizer of the effective
    /// utilization ratio always lies in it.
    pub fn distinct_nonzero_entries(&self) -> Vec<u64> {
        let mut vals: Vec<u64> = self.entries.iter().copied().filter(|&e| e > 0).collect();
        vals.sort_unstable();
        vals.dedup();
        vals
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        (0..self.n)
            .map(|i| self.entries[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    /// Row-major view of the entries.
    pub fn as_slice(&self) -> &[u64] {
        &self.entries
    }
}

/// A (possibly partial) one-to-one map from input ports to output ports.
/// Pairs are kept sorted by input port, so the derived ordering is the
/// lexicographic order on pair sets used for tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
}

impl Matching {
    /// Builds a matching, rejecting duplicate inputs or outputs.
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidConfig(format!(
                    "input port {} matched twice",
                    w[0].0
                )));
            }
        }
        let mut outs: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        outs.sort_unstable();
        for w in outs.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidConfig(format!(
                    "output port {} matched twice",
                    w[0]
                )));
            }
        }
        Ok(Self { pairs })
    }

    pub fn empty() -> Self {
        Self { pairs: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            pairs: (0..n).map(|i| (i, i)).collect(),
        }
    }

    /// Builds a full permutation matching from `perm[input] = output`.
    pub fn from_permutation(perm: &[usize]) -> Result<Self> {
        Self::new(perm.iter().copied().enumerate().collect())
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn output_of(&self, input: usize) -> Option<usize> {
        self.pairs
            .binary_search_by_key(&input, |p| p.0)
            .ok()
            .map(|idx| self.pairs[idx].1)
    }

    pub fn is_perfect(&self, n: usize) -> bool {
        self.pairs.len() == n
    }

    /// Largest port index referenced, for dimension checks.
    pub fn max_port(&self) -> Option<usize> {
        self.pairs.iter().map(|&(i, j)| i.max(j)).max()
    }
}

/// One switch configuration: a matching held for `duration` slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub duration: u64,
    pub matching: Matching,
}

impl ScheduleEntry {
    pub fn new(duration: u64, matching: Matching) -> Result<Self> {
        if duration == 0 {
            return Err(Error::InvalidConfig("entry duration must be >= 1".into()));
        }
        Ok(Self { duration, matching })
    }
}

/// An ordered list of `(duration, matching)` configurations for one window.
/// Validity requires `sum(duration) + k * delay <= window`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    entries: Vec<ScheduleEntry>,
    window: u64,
    delay: u64,
}

impl Schedule {
    pub fn new(entries: Vec<ScheduleEntry>, window: u64, delay: u64) -> Result<Self> {
        if entries.iter().any(|e| e.duration == 0) {
            return Err(Error::InvalidConfig("entry duration must be >= 1".into()));
        }
        let used: u64 =
            entries.iter().map(|e| e.duration).sum::<u64>() + entries.len() as u64 * delay;
        if used > window {
            return Err(Error::InvalidConfig(format!(
                "schedule uses {used} slots but window is {window}"
            )));
        }
        Ok(Self {
            entries,
            window,
            delay,
        })
    }

    pub fn empty(window: u64, delay: u64) -> Self {
        Self {
            entries: Vec::new(),
            window,
            delay,
        }
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    pub fn delay(&self) -> u64 {
        self.delay
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Shared scheduler parameters: reconfiguration delay, window length, the
/// entry-bound parameter epsilon, and the RNG seed for anything stochastic.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulerConfig {
    pub delay: u64,
    pub window: u64,
    pub epsilon: f64,
    pub rng_seed: u64,
}

impl SchedulerConfig {
    pub fn new(delay: u64, window: u64, epsilon: f64, rng_seed: u64) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidConfig("window must be >= 1".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0,1), got {epsilon}"
            )));
        }
        Ok(Self {
            delay,
            window,
            epsilon,
            rng_seed,
        })
    }
}

/// An exact nonnegative rational, used for effective-utilization ratios so
/// comparisons never suffer floating-point ties.
#[derive(Debug, Clone, Copy, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "ratio denominator must be positive");
        Self { num, den }
    }

    pub fn zero() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for Ratio {
    fn eq(&self, other: &Self) -> bool {
        (self.num as u128) * (other.den as u128) == (other.num as u128) * (self.den as u128)
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        ((self.num as u128) * (other.den as u128)).cmp(&((other.num as u128) * (self.den as u128)))
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Outcome of demand validation: hard errors (infeasible row/column sums)
/// and soft warnings (entry bounds that only void the approximation
/// guarantee, not the algorithms themselves).
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_feasible(&self) -> bool {
        self.errors.is_empty()
    }

    /// Converts the report into a hard error when any feasibility check
    /// failed, for callers that cannot proceed on infeasible demand.
    pub fn into_result(self) -> Result<Self> {
        if self.errors.is_empty() {
            Ok(self)
        } else {
            Err(Error::InfeasibleDemand(self.errors.join("; ")))
        }
    }
}

/// Checks that every row and column sum fits in the window (errors), and
/// that nonzero entries satisfy `2*delay <= T(i,j) <= epsilon*W + delay`
/// (warnings only: violating them voids the approximation bound but the
/// schedulers still run).
pub fn validate_demand(t: &TrafficMatrix, cfg: &SchedulerConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = t.n();
    for i in 0..n {
        let rs = t.row_sum(i);
        if rs > cfg.window {
            report
                .errors
                .push(format!("row {i} sum {rs} exceeds window {}", cfg.window));
        }
    }
    for j in 0..n {
        let cs = t.col_sum(j);
        if cs > cfg.window {
            report
                .errors
                .push(format!("column {j} sum {cs} exceeds window {}", cfg.window));
        }
    }
    let upper = cfg.epsilon * cfg.window as f64 + cfg.delay as f64;
    for i in 0..n {
        for j in 0..n {
            let e = t.get(i, j);
            if e == 0 {
                continue;
            }
            if e < 2 * cfg.delay {
                report.warnings.push(format!(
                    "entry ({i},{j})={e} below 2*delay={}",
                    2 * cfg.delay
                ));
            }
            if (e as f64) > upper {
                report.warnings.push(format!(
                    "entry ({i},{j})={e} above epsilon*W + delay = {upper:.3}"
                ));
            }
        }
    }
    report
}

/// Total time a schedule occupies: `sum(alpha_i) + k * delay`.
pub fn schedule_duration(s: &Schedule) -> u64 {
    s.entries().iter().map(|e| e.duration).sum::<u64>() + s.len() as u64 * s.delay()
}

/// Entrywise `min(T(i,j), alpha)`.
pub fn threshold(t: &TrafficMatrix, alpha: u64) -> TrafficMatrix {
    let mut out = t.clone();
    for i in 0..t.n() {
        for j in 0..t.n() {
            out.set(i, j, t.get(i, j).min(alpha));
        }
    }
    out
}

/// Entrywise `min(sum_i alpha_i * M_i, T)` for a raw entry list. This is the
/// delivered-traffic matrix of the sum-throughput objective; it is defined on
/// arbitrary entry sets, not only window-valid schedules.
pub fn delivered_matrix(t: &TrafficMatrix, entries: &[ScheduleEntry]) -> Result<TrafficMatrix> {
    let n = t.n();
    let mut offered = TrafficMatrix::zero(n);
    for e in entries {
        if let Some(p) = e.matching.max_port() {
            if p >= n {
                return Err(Error::DimensionMismatch(format!(
                    "matching references port {p} but demand has n={n}"
                )));
            }
        }
        for &(i, j) in e.matching.pairs() {
            offered.set(i, j, offered.get(i, j).saturating_add(e.duration));
        }
    }
    let mut out = TrafficMatrix::zero(n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, offered.get(i, j).min(t.get(i, j)));
        }
    }
    Ok(out)
}

/// Sum-throughput of a schedule against demand `T`:
/// `|| min(sum_i alpha_i * M_i, T) ||_1` with the minimum taken entrywise.
pub fn direct_throughput(t: &TrafficMatrix, s: &Schedule) -> Result<u64> {
    Ok(delivered_matrix(t, s.entries())?.total())
}

/// Demand left over after the schedule: `T - min(sum alpha_i M_i, T)`.
/// Always nonnegative, and `||residual||_1 = ||T||_1 - direct_throughput`.
pub fn residual_demand(t: &TrafficMatrix, s: &Schedule) -> Result<TrafficMatrix> {
    let delivered = delivered_matrix(t, s.entries())?;
    let n = t.n();
    let mut out = TrafficMatrix::zero(n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, t.get(i, j) - delivered.get(i, j));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(delay: u64, window: u64, epsilon: f64) -> SchedulerConfig {
        SchedulerConfig::new(delay, window, epsilon, 0).unwrap()
    }

    #[test]
    fn validate_empty_demand_ok() {
        let t = TrafficMatrix::from_rows(&[vec![0]]).unwrap();
        let r = validate_demand(&t, &cfg(0, 1, 0.5));
        assert!(r.is_feasible());
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn validate_row_sum_exceeds_window() {
        let t = TrafficMatrix::from_rows(&[vec![2, 0], vec![0, 2]]).unwrap();
        let r = validate_demand(&t, &cfg(0, 1, 0.5));
        assert!(!r.is_feasible());
        assert!(matches!(r.into_result(), Err(Error::InfeasibleDemand(_))));
    }

    #[test]
    fn validate_entry_bound_is_warning_only() {
        let t = TrafficMatrix::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        let r = validate_demand(&t, &cfg(1, 100, 0.5));
        assert!(r.is_feasible());
        // entry 1 < 2*delay = 2
        assert_eq!(r.warnings.len(), 2);
    }

    #[test]
    fn schedule_duration_examples() {
        let s = Schedule::empty(100, 3);
        assert_eq!(schedule_duration(&s), 0);

        let m = Matching::identity(2);
        let s = Schedule::new(vec![ScheduleEntry::new(10, m.clone()).unwrap()], 100, 2).unwrap();
        assert_eq!(schedule_duration(&s), 12);

        let s = Schedule::new(
            vec![
                ScheduleEntry::new(4, m.clone()).unwrap(),
                ScheduleEntry::new(4, m).unwrap(),
            ],
            100,
            1,
        )
        .unwrap();
        assert_eq!(schedule_duration(&s), 10);
    }

    #[test]
    fn schedule_rejects_window_overflow() {
        let m = Matching::identity(2);
        let r = Schedule::new(vec![ScheduleEntry::new(10, m).unwrap()], 11, 2);
        assert!(r.is_err());
    }

    #[test]
    fn threshold_examples() {
        let t = TrafficMatrix::from_rows(&[vec![3, 0], vec![0, 5]]).unwrap();
        let clipped = threshold(&t, 4);
        assert_eq!(clipped.rows(), vec![vec![3, 0], vec![0, 4]]);
        assert!(threshold(&t, 0).is_zero());
        assert_eq!(threshold(&t, t.max_entry()), t);
    }

    #[test]
    fn direct_throughput_examples() {
        let t = TrafficMatrix::from_rows(&[vec![10, 0], vec![0, 10]]).unwrap();
        let s = Schedule::new(
            vec![ScheduleEntry::new(10, Matching::identity(2)).unwrap()],
            12,
            2,
        )
        .unwrap();
        assert_eq!(direct_throughput(&t, &s).unwrap(), 20);

        let empty = Schedule::empty(12, 2);
        assert_eq!(direct_throughput(&t, &empty).unwrap(), 0);

        let t2 = TrafficMatrix::from_rows(&[vec![10, 0], vec![0, 2]]).unwrap();
        assert_eq!(direct_throughput(&t2, &s).unwrap(), 12);
    }

    #[test]
    fn direct_throughput_dimension_mismatch() {
        let t = TrafficMatrix::from_rows(&[vec![1]]).unwrap();
        let s = Schedule::new(
            vec![ScheduleEntry::new(1, Matching::identity(2)).unwrap()],
            10,
            0,
        )
        .unwrap();
        assert!(matches!(
            direct_throughput(&t, &s),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn residual_demand_examples() {
        let t = TrafficMatrix::from_rows(&[vec![10, 0], vec![0, 10]]).unwrap();
        let s = Schedule::new(
            vec![ScheduleEntry::new(10, Matching::identity(2)).unwrap()],
            12,
            2,
        )
        .unwrap();
        assert!(residual_demand(&t, &s).unwrap().is_zero());

        let empty = Schedule::empty(12, 2);
        assert_eq!(residual_demand(&t, &empty).unwrap(), t);

        let t2 = TrafficMatrix::from_rows(&[vec![10, 0], vec![0, 2]]).unwrap();
        let s4 = Schedule::new(
            vec![ScheduleEntry::new(4, Matching::identity(2)).unwrap()],
            12,
            2,
        )
        .unwrap();
        assert_eq!(
            residual_demand(&t2, &s4).unwrap().rows(),
            vec![vec![6, 0], vec![0, 0]]
        );
    }

    #[test]
    fn matching_rejects_duplicates() {
        assert!(Matching::new(vec![(0, 1), (0, 2)]).is_err());
        assert!(Matching::new(vec![(0, 1), (1, 1)]).is_err());
    }

    #[test]
    fn matching_lexicographic_order() {
        let a = Matching::new(vec![(0, 0), (1, 1)]).unwrap();
        let b = Matching::new(vec![(0, 1), (1, 0)]).unwrap();
        assert!(a < b);
        // A proper prefix sorts before its extension.
        let c = Matching::new(vec![(0, 0)]).unwrap();
        assert!(c < a);
    }

    #[test]
    fn ratio_ordering_is_exact() {
        assert_eq!(Ratio::new(20, 12), Ratio::new(5, 3));
        assert!(Ratio::new(1, 3) < Ratio::new(1, 2));
        assert!(Ratio::new(u64::MAX, 2) > Ratio::new(u64::MAX / 2, 2));
    }
}
