//! Brute-force references for small instances.
//!
//! These enumerate the full search space independently of the production
//! algorithms (no shared matching or routing code paths) and exist so tests
//! can compare against true optima. Size guards keep them honest: anything
//! beyond a few ports is rejected rather than silently approximated.

use crate::eclipse::GreedyStepResult;
use crate::error::{Error, Result};
use crate::indirect::{LayeredGraph, Path, PathAssignment};
use crate::model::{Matching, Ratio, Schedule, ScheduleEntry, SchedulerConfig, TrafficMatrix};

/// An exhaustive optimum together with a witness achieving it.
#[derive(Debug, Clone)]
pub struct OracleResult<W> {
    pub value: u64,
    pub witness: W,
}

/// All matchings whose pairs lie on the support of `t` (zero-demand edges
/// can never contribute and are excluded). Includes the empty matching.
fn support_matchings(t: &TrafficMatrix) -> Vec<Vec<(usize, usize)>> {
    let n = t.n();
    let mut out = Vec::new();
    let mut current: Vec<(usize, usize)> = Vec::new();
    fn rec(
        i: usize,
        n: usize,
        t: &TrafficMatrix,
        used_cols: &mut Vec<bool>,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if i == n {
            out.push(current.clone());
            return;
        }
        rec(i + 1, n, t, used_cols, current, out); // leave row i unmatched
        for j in 0..n {
            if !used_cols[j] && t.get(i, j) > 0 {
                used_cols[j] = true;
                current.push((i, j));
                rec(i + 1, n, t, used_cols, current, out);
                current.pop();
                used_cols[j] = false;
            }
        }
    }
    rec(0, n, t, &mut vec![false; n], &mut current, &mut out);
    out
}

/// Exhaustive greedy-step reference: every support matching crossed with
/// every distinct entry of `T_rem`, scored by gain/(alpha+delta). Ties
/// prefer larger alpha, then the lexicographically smaller matching --
/// the same rule as the production greedy step.
pub fn brute_force_best_pair(t_rem: &TrafficMatrix, delta: u64) -> Result<GreedyStepResult> {
    if t_rem.n() > 4 {
        return Err(Error::TooLarge(format!("n={} > 4", t_rem.n())));
    }
    let alphas = t_rem.distinct_nonzero_entries();
    if alphas.is_empty() {
        return Err(Error::EmptyDemand);
    }
    let mut best: Option<GreedyStepResult> = None;
    for pairs in support_matchings(t_rem) {
        if pairs.is_empty() {
            continue;
        }
        for &alpha in &alphas {
            let gain: u64 = pairs.iter().map(|&(i, j)| alpha.min(t_rem.get(i, j))).sum();
            let ratio = Ratio::new(gain, alpha + delta);
            let matching = Matching::new(pairs.clone()).unwrap();
            let better = match &best {
                None => true,
                Some(b) => {
                    ratio > b.ratio
                        || (ratio == b.ratio && alpha > b.alpha)
                        || (ratio == b.ratio && alpha == b.alpha && matching < b.matching)
                }
            };
            if better {
                best = Some(GreedyStepResult {
                    alpha,
                    matching,
                    gain,
                    ratio,
                });
            }
        }
    }
    Ok(best.expect("nonzero demand has at least one candidate"))
}

/// Exhaustive direct-routing optimum over schedules with at most `k_max`
/// matchings. Only support-maximal matchings are enumerated (extending a
/// matching along the support never hurts the objective), and durations
/// are integer compositions of the full remaining budget (the objective is
/// nondecreasing in every duration).
pub fn brute_force_optimal_direct(
    t: &TrafficMatrix,
    cfg: &SchedulerConfig,
    k_max: usize,
) -> Result<OracleResult<Schedule>> {
    let n = t.n();
    if n > 4 || cfg.window > 16 || k_max > 3 {
        return Err(Error::TooLarge(format!(
            "need n<=4, W<=16, k_max<=3; got n={n}, W={}, k_max={k_max}",
            cfg.window
        )));
    }

    let all = support_matchings(t);
    // Keep the maximal ones: no support cell can be added.
    let maximal: Vec<Vec<(usize, usize)>> = all
        .iter()
        .filter(|pairs| {
            let rows_used: Vec<bool> = {
                let mut v = vec![false; n];
                pairs.iter().for_each(|&(i, _)| v[i] = true);
                v
            };
            let cols_used: Vec<bool> = {
                let mut v = vec![false; n];
                pairs.iter().for_each(|&(_, j)| v[j] = true);
                v
            };
            !(0..n).any(|i| !rows_used[i] && (0..n).any(|j| !cols_used[j] && t.get(i, j) > 0))
        })
        .cloned()
        .collect();

    let mut best_value = 0u64;
    let mut best_entries: Vec<ScheduleEntry> = Vec::new();

    let evaluate = |combo: &[usize], durations: &[u64], maximal: &[Vec<(usize, usize)>]| -> u64 {
        let mut offered = vec![0u64; n * n];
        for (idx, &m) in combo.iter().enumerate() {
            for &(i, j) in &maximal[m] {
                offered[i * n + j] += durations[idx];
            }
        }
        (0..n * n).map(|c| offered[c].min(t.as_slice()[c])).sum()
    };

    for k in 1..=k_max {
        let kd = k as u64 * cfg.delay;
        if cfg.window < kd + k as u64 {
            continue; // not even one slot per matching
        }
        let budget = cfg.window - kd;

        // Multisets of k maximal matchings (indices nondecreasing).
        let mut combo = vec![0usize; k];
        let mut durations = vec![0u64; k];
        fn combos(
            pos: usize,
            start: usize,
            m: usize,
            combo: &mut Vec<usize>,
            f: &mut dyn FnMut(&[usize]),
        ) {
            if pos == combo.len() {
                f(combo);
                return;
            }
            for idx in start..m {
                combo[pos] = idx;
                combos(pos + 1, idx, m, combo, f);
            }
        }
        fn compositions(
            pos: usize,
            remaining: u64,
            durations: &mut Vec<u64>,
            f: &mut dyn FnMut(&[u64]),
        ) {
            let slots_left = durations.len() - pos;
            if slots_left == 1 {
                durations[pos] = remaining;
                f(durations);
                return;
            }
            // keep at least one slot for every later matching
            for d in 1..=(remaining - (slots_left as u64 - 1)) {
                durations[pos] = d;
                compositions(pos + 1, remaining - d, durations, f);
            }
        }

        let mut on_combo = |combo: &[usize]| {
            let combo_owned = combo.to_vec();
            compositions(0, budget, &mut durations, &mut |durs: &[u64]| {
                let value = evaluate(&combo_owned, durs, &maximal);
                if value > best_value {
                    best_value = value;
                    best_entries = combo_owned
                        .iter()
                        .zip(durs)
                        .map(|(&m, &d)| {
                            ScheduleEntry::new(d, Matching::new(maximal[m].clone()).unwrap())
                                .unwrap()
                        })
                        .collect();
                }
            });
        };
        combos(0, 0, maximal.len(), &mut combo, &mut on_combo);
    }

    let witness = Schedule::new(best_entries, cfg.window, cfg.delay)?;
    Ok(OracleResult {
        value: best_value,
        witness,
    })
}

/// All layer-0-to-layer-k paths through positive-capacity edges, in
/// lexicographic node order.
fn enumerate_paths(g: &LayeredGraph) -> Vec<Path> {
    fn rec(g: &LayeredGraph, round: usize, nodes: &mut Vec<usize>, out: &mut Vec<Path>) {
        if round == g.k() {
            out.push(Path::new(nodes.clone()).unwrap());
            return;
        }
        let here = *nodes.last().unwrap();
        let mut nexts: Vec<usize> = vec![here]; // hold edge
        if let Some((to, cap)) = g.matching_edge(round, here) {
            if cap > 0 && to != here {
                nexts.push(to);
            }
        }
        nexts.sort_unstable(); // keeps the path list lexicographic
        for next in nexts {
            nodes.push(next);
            rec(g, round + 1, nodes, out);
            nodes.pop();
        }
    }
    let mut out = Vec::new();
    for src in 0..g.n() {
        rec(g, 0, &mut vec![src], &mut out);
    }
    out
}

/// Exhaustive indirect-routing optimum: depth-first packing of integer
/// flows over all paths of the layered graph, subject to edge capacities.
/// The witness is a feasible assignment list achieving the value.
pub fn brute_force_indirect(
    g: &LayeredGraph,
    t: &TrafficMatrix,
) -> Result<OracleResult<Vec<PathAssignment>>> {
    let n = g.n();
    let k = g.k();
    if n > 3 || k > 3 {
        return Err(Error::TooLarge(format!(
            "need n<=3, k<=3; got n={n}, k={k}"
        )));
    }
    if g.edges().any(|(_, _, _, cap)| cap > 4) {
        return Err(Error::TooLarge("capacities must be <= 4".into()));
    }
    if t.total() > 12 {
        return Err(Error::TooLarge(format!("||T||_1 = {} > 12", t.total())));
    }

    let paths = enumerate_paths(g);
    let mut caps: Vec<Vec<u64>> = (0..k)
        .map(|r| {
            (0..n)
                .map(|i| g.matching_edge(r, i).map(|(_, c)| c).unwrap_or(0))
                .collect()
        })
        .collect();

    let path_edges: Vec<Vec<(usize, usize)>> = paths
        .iter()
        .map(|p| {
            p.nodes()
                .windows(2)
                .enumerate()
                .filter(|(_, w)| w[0] != w[1])
                .map(|(r, w)| (r, w[0]))
                .collect()
        })
        .collect();

    let mut t_rem = t.clone();
    let mut best_value = 0u64;
    let mut best_flows: Vec<u64> = vec![0; paths.len()];
    let mut flows: Vec<u64> = vec![0; paths.len()];

    // Upper bound: diagonal demand rides free on hold edges; every other
    // delivered unit consumes at least one unit of capacity.
    fn bound(t_rem: &TrafficMatrix, caps: &[Vec<u64>]) -> u64 {
        let n = t_rem.n();
        let diag: u64 = (0..n).map(|i| t_rem.get(i, i)).sum();
        let offdiag = t_rem.total() - diag;
        let cap_total: u64 = caps.iter().flatten().sum();
        diag + offdiag.min(cap_total)
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        idx: usize,
        paths: &[Path],
        path_edges: &[Vec<(usize, usize)>],
        caps: &mut Vec<Vec<u64>>,
        t_rem: &mut TrafficMatrix,
        flows: &mut Vec<u64>,
        current: u64,
        best_value: &mut u64,
        best_flows: &mut Vec<u64>,
    ) {
        if current > *best_value {
            *best_value = current;
            best_flows.clone_from(flows);
        }
        if idx == paths.len() || current + bound(t_rem, caps) <= *best_value {
            return;
        }
        let p = &paths[idx];
        let (src, dst) = (p.source(), p.destination());
        let cap = path_edges[idx]
            .iter()
            .map(|&(r, i)| caps[r][i])
            .min()
            .unwrap_or(u64::MAX);
        let max_beta = cap.min(t_rem.get(src, dst));
        for beta in (0..=max_beta).rev() {
            for &(r, i) in &path_edges[idx] {
                caps[r][i] -= beta;
            }
            t_rem.set(src, dst, t_rem.get(src, dst) - beta);
            flows[idx] = beta;
            rec(
                idx + 1,
                paths,
                path_edges,
                caps,
                t_rem,
                flows,
                current + beta,
                best_value,
                best_flows,
            );
            flows[idx] = 0;
            t_rem.set(src, dst, t_rem.get(src, dst) + beta);
            for &(r, i) in &path_edges[idx] {
                caps[r][i] += beta;
            }
        }
    }

    rec(
        0,
        &paths,
        &path_edges,
        &mut caps,
        &mut t_rem,
        &mut flows,
        0,
        &mut best_value,
        &mut best_flows,
    );

    let witness: Vec<PathAssignment> = paths
        .iter()
        .zip(&best_flows)
        .filter(|(_, &b)| b > 0)
        .map(|(p, &b)| PathAssignment {
            beta: b,
            path: p.clone(),
        })
        .collect();
    Ok(OracleResult {
        value: best_value,
        witness,
    })
}
