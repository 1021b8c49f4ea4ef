//! Time-layered graph construction and the Eclipse++ multiplicative-weights
//! indirect router.
//!
//! A fixed schedule of k matchings induces a (k+1)-partite DAG: layer j-1
//! connects to layer j through the round-j matching edges (finite capacity)
//! and through per-port hold edges (a packet waiting in its VOQ; unbounded
//! capacity, zero cost). Traffic is then routed as weighted end-to-end paths
//! from layer 0 to layer k. Eclipse++ prices each capacitated edge, always
//! routes the cheapest useful path, and inflates the price of the edges it
//! uses, so congested circuits quickly stop attracting flow.

use crate::error::{Error, Result};
use crate::model::{Schedule, TrafficMatrix};
use std::collections::BTreeSet;

/// Whether Eclipse++ sees the full configured capacities or only what
/// direct routing left behind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutingMode {
    /// Matching-edge capacities are the full durations `alpha_j`; demand is
    /// the full matrix.
    Full,
    /// Capacities are `alpha_j` minus the direct traffic the schedule
    /// already delivers on each edge (replaying the greedy delivery), and
    /// the demand forwarded is the corresponding remainder.
    Residual,
}

/// The capacitated time-layered graph of a schedule. Hold edges are
/// implicit: every port always connects to itself in the next layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredGraph {
    n: usize,
    // rounds[j].to[i] = output port of the round-j matching edge leaving
    // port i, if any; rounds[j].cap[i] its remaining capacity.
    rounds: Vec<RoundEdges>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct RoundEdges {
    to: Vec<Option<usize>>,
    cap: Vec<u64>,
}

impl LayeredGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of rounds k; the graph has k+1 layers.
    pub fn k(&self) -> usize {
        self.rounds.len()
    }

    /// The matching edge leaving `input` in `round`, as `(output, capacity)`.
    pub fn matching_edge(&self, round: usize, input: usize) -> Option<(usize, u64)> {
        self.rounds[round].to[input].map(|j| (j, self.rounds[round].cap[input]))
    }

    fn cap_mut(&mut self, round: usize, input: usize) -> &mut u64 {
        &mut self.rounds[round].cap[input]
    }

    /// Iterates all matching edges as `(round, input, output, capacity)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize, u64)> + '_ {
        self.rounds.iter().enumerate().flat_map(|(r, re)| {
            re.to
                .iter()
                .enumerate()
                .filter_map(move |(i, to)| to.map(|j| (r, i, j, re.cap[i])))
        })
    }
}

/// A route through the layered graph: one node per layer, consecutive
/// nodes joined by a hold edge (same port) or that round's matching edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    nodes: Vec<usize>,
}

impl Path {
    pub fn new(nodes: Vec<usize>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidConfig(
                "path must have at least one node".into(),
            ));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn source(&self) -> usize {
        self.nodes[0]
    }

    pub fn destination(&self) -> usize {
        *self.nodes.last().unwrap()
    }

    /// Structural check: spans all layers and only uses hold edges or the
    /// given matchings. Port changes must follow the round's matching.
    pub fn is_valid_in(&self, g: &LayeredGraph) -> bool {
        if self.nodes.len() != g.k() + 1 {
            return false;
        }
        self.nodes.windows(2).enumerate().all(|(round, w)| {
            w[0] == w[1] || g.matching_edge(round, w[0]).map(|(to, _)| to) == Some(w[1])
        })
    }

    /// The matching edges this path occupies, as `(round, input)` ids.
    fn matching_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] != w[1])
            .map(|(round, w)| (round, w[0]))
    }
}

/// A weighted end-to-end route: `beta` units of flow along `path`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathAssignment {
    pub beta: u64,
    pub path: Path,
}

/// Eclipse++ parameters. `lambda` overrides the default update factor
/// `e^(1/eta) * n * k`, where `eta = max T(i,j) / min positive capacity`
/// is computed from the instance.
///
/// The weight budget `sum_e R(e) w_e <= lambda` closes as soon as some edge
/// approaches saturation (each edge's term reaches `lambda` exactly when its
/// flow reaches its capacity), so in regimes where single paths can fill an
/// edge the stock algorithm stops after a handful of paths. Setting
/// `exhaust_capacity` keeps routing -- prices still steer path selection --
/// until no positive-capacity path with remaining demand exists. Feasibility
/// is unaffected: flows are capped at bottleneck residuals either way.
#[derive(Debug, Clone)]
pub struct EclipseppConfig {
    pub lambda: Option<f64>,
    pub mode: RoutingMode,
    pub exhaust_capacity: bool,
}

impl Default for EclipseppConfig {
    fn default() -> Self {
        Self {
            lambda: None,
            mode: RoutingMode::Residual,
            exhaust_capacity: false,
        }
    }
}

/// Builds the layered graph of a schedule and the demand matrix indirect
/// routing should serve. In `Full` mode capacities are the durations and
/// the demand is `T`; in `Residual` mode the direct deliveries of the
/// schedule are replayed round by round and subtracted from both.
pub fn build_layered_graph(
    s: &Schedule,
    mode: RoutingMode,
    t: &TrafficMatrix,
) -> Result<(LayeredGraph, TrafficMatrix)> {
    let n = t.n();
    let mut rounds = Vec::with_capacity(s.len());
    let mut t_rem = t.clone();
    for entry in s.entries() {
        if let Some(p) = entry.matching.max_port() {
            if p >= n {
                return Err(Error::DimensionMismatch(format!(
                    "matching references port {p} but demand has n={n}"
                )));
            }
        }
        let mut to = vec![None; n];
        let mut cap = vec![0u64; n];
        for &(i, j) in entry.matching.pairs() {
            to[i] = Some(j);
            let delivered = entry.duration.min(t_rem.get(i, j));
            cap[i] = match mode {
                RoutingMode::Full => entry.duration,
                RoutingMode::Residual => entry.duration - delivered,
            };
            t_rem.set(i, j, t_rem.get(i, j) - delivered);
        }
        rounds.push(RoundEdges { to, cap });
    }
    let demand = match mode {
        RoutingMode::Full => t.clone(),
        RoutingMode::Residual => t_rem,
    };
    Ok((LayeredGraph { n, rounds }, demand))
}

/// Ports reachable from `source` at the final layer via hold edges and
/// positive-capacity matching edges, excluding the source itself.
pub fn reachable_set(g: &LayeredGraph, source: usize) -> BTreeSet<usize> {
    let n = g.n();
    let mut reach = vec![false; n];
    reach[source] = true;
    for round in 0..g.k() {
        let mut next = reach.clone(); // hold edges
        for i in 0..n {
            if reach[i] {
                if let Some((j, cap)) = g.matching_edge(round, i) {
                    if cap > 0 {
                        next[j] = true;
                    }
                }
            }
        }
        reach = next;
    }
    (0..n).filter(|&p| reach[p] && p != source).collect()
}

/// Per-edge prices for the capacitated matching edges, indexed like the
/// graph's rounds. Hold edges always cost zero.
#[derive(Debug, Clone)]
pub struct EdgeWeights {
    w: Vec<Vec<f64>>,
}

impl EdgeWeights {
    /// Initializes `w_e = 1 / R(e)` on every positive-capacity edge.
    pub fn initial(g: &LayeredGraph) -> Self {
        let w = (0..g.k())
            .map(|r| {
                (0..g.n())
                    .map(|i| match g.matching_edge(r, i) {
                        Some((_, cap)) if cap > 0 => 1.0 / cap as f64,
                        _ => 0.0,
                    })
                    .collect()
            })
            .collect();
        Self { w }
    }

    pub fn get(&self, round: usize, input: usize) -> f64 {
        self.w[round][input]
    }

    pub fn scale(&mut self, round: usize, input: usize, factor: f64) {
        self.w[round][input] *= factor;
    }
}

/// Shortest-path step of the router: one forward sweep of the layered DAG
/// per source port, then the `(source, destination)` pair with positive
/// remaining demand and the smallest path weight wins (ties broken by
/// ascending source, then destination). Only positive-capacity matching
/// edges are traversable. Returns `None` when no reachable pair has demand
/// left; `beta` is the pair's remaining demand, uncapped.
pub fn best_path(
    g: &LayeredGraph,
    weights: &EdgeWeights,
    t_rem: &TrafficMatrix,
) -> Option<PathAssignment> {
    let n = g.n();
    let k = g.k();
    let mut best: Option<(f64, usize, usize, Vec<usize>)> = None;

    for src in 0..n {
        // dist/parent per layer; parent[j][p] = port at layer j-1.
        let mut dist = vec![f64::INFINITY; n];
        let mut reached = vec![false; n];
        dist[src] = 0.0;
        reached[src] = true;
        let mut parents: Vec<Vec<usize>> = Vec::with_capacity(k);
        for round in 0..k {
            let mut next_dist = dist.clone(); // hold: same port, zero cost
            let mut next_reached = reached.clone();
            let mut parent: Vec<usize> = (0..n).collect();
            for i in 0..n {
                if !reached[i] {
                    continue;
                }
                if let Some((j, cap)) = g.matching_edge(round, i) {
                    if cap == 0 {
                        continue;
                    }
                    let cand = dist[i] + weights.get(round, i);
                    if !next_reached[j] || cand < next_dist[j] {
                        next_dist[j] = cand;
                        next_reached[j] = true;
                        parent[j] = i;
                    }
                }
            }
            parents.push(parent);
            dist = next_dist;
            reached = next_reached;
        }
        for dst in 0..n {
            if !reached[dst] || t_rem.get(src, dst) == 0 {
                continue;
            }
            let better = match &best {
                None => true,
                Some((bw, bs, bd, _)) => {
                    dist[dst] < *bw || (dist[dst] == *bw && (src, dst) < (*bs, *bd))
                }
            };
            if better {
                // Walk parents back from dst through the layers.
                let mut nodes = vec![0usize; k + 1];
                nodes[k] = dst;
                for round in (0..k).rev() {
                    nodes[round] = parents[round][nodes[round + 1]];
                }
                debug_assert_eq!(nodes[0], src);
                best = Some((dist[dst], src, dst, nodes));
            }
        }
    }

    best.map(|(_, src, dst, nodes)| PathAssignment {
        beta: t_rem.get(src, dst),
        path: Path::new(nodes).unwrap(),
    })
}

/// `eta = max_(i,j) T(i,j) / min positive capacity`, or `None` when the
/// graph has no positive-capacity edge or the demand is zero.
pub fn compute_eta(g: &LayeredGraph, demand: &TrafficMatrix) -> Option<f64> {
    let min_cap = g.edges().map(|(_, _, _, c)| c).filter(|&c| c > 0).min()?;
    let max_t = demand.max_entry();
    if max_t == 0 {
        return None;
    }
    Some(max_t as f64 / min_cap as f64)
}

/// Greedy indirect routing over a fixed schedule.
///
/// Edge prices start at `1/R(e)`. While the price budget
/// `sum_e R(e) w_e <= lambda` holds and demand remains, the cheapest
/// useful path is routed with `beta = min(remaining pair demand, bottleneck
/// residual capacity)` and the prices of its edges are inflated by
/// `lambda^(beta/R(e))`. Capping beta at the bottleneck keeps every
/// intermediate state feasible; the literal end-of-loop constraint check is
/// kept as a fallback and drops the last assignment if it ever fires.
/// Every returned assignment set satisfies the per-edge capacity
/// constraints exactly.
pub fn eclipsepp(
    t: &TrafficMatrix,
    s: &Schedule,
    cfg: &EclipseppConfig,
) -> Result<Vec<PathAssignment>> {
    let (graph, demand) = build_layered_graph(s, cfg.mode, t)?;
    let n = graph.n();
    let k = graph.k();
    if k == 0 || demand.is_zero() {
        return Ok(Vec::new());
    }

    let ln_lambda = match cfg.lambda {
        Some(l) => {
            if l <= 1.0 {
                return Err(Error::InvalidConfig(format!(
                    "lambda must exceed 1, got {l}"
                )));
            }
            l.ln()
        }
        None => match compute_eta(&graph, &demand) {
            Some(eta) => 1.0 / eta + ((n * k) as f64).ln(),
            // No capacitated edges: only hold paths exist, any budget works.
            None => ((n * k) as f64).max(2.0).ln(),
        },
    };
    let lambda = ln_lambda.exp(); // may round to infinity; the budget then never binds

    let mut residual = graph.clone();
    let mut t_rem = demand;
    let mut weights = EdgeWeights::initial(&graph);
    let mut assignments: Vec<PathAssignment> = Vec::new();

    while !t_rem.is_zero() {
        if !cfg.exhaust_capacity {
            let budget: f64 = graph
                .edges()
                .map(|(r, i, _, cap)| cap as f64 * weights.get(r, i))
                .sum();
            // negated form so an overflowed (infinite) budget also stops
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(budget <= lambda) {
                break;
            }
        }
        let Some(candidate) = best_path(&residual, &weights, &t_rem) else {
            break;
        };
        let bottleneck = candidate
            .path
            .matching_edges()
            .map(|(r, i)| residual.matching_edge(r, i).expect("edge on path").1)
            .min()
            .unwrap_or(u64::MAX); // pure-hold path: uncapacitated
        let beta = candidate.beta.min(bottleneck);
        debug_assert!(beta >= 1);
        let (src, dst) = (candidate.path.source(), candidate.path.destination());
        t_rem.set(src, dst, t_rem.get(src, dst) - beta);
        for (r, i) in candidate.path.matching_edges() {
            *residual.cap_mut(r, i) -= beta;
            let orig = graph.matching_edge(r, i).unwrap().1;
            weights.scale(r, i, (ln_lambda * beta as f64 / orig as f64).exp());
        }
        assignments.push(PathAssignment {
            beta,
            path: candidate.path,
        });
    }

    // Fallback from the literal algorithm: if the output somehow violates a
    // capacity constraint it can only be the last addition; drop it. The
    // per-step bottleneck cap makes this unreachable.
    if !capacity_feasible(&graph, &assignments) {
        assignments.pop();
        debug_assert!(capacity_feasible(&graph, &assignments));
    }
    Ok(assignments)
}

/// Checks the per-edge capacity constraints: total flow through every
/// matching edge is at most its capacity.
pub fn capacity_feasible(g: &LayeredGraph, assignments: &[PathAssignment]) -> bool {
    let mut used = vec![vec![0u64; g.n()]; g.k()];
    for a in assignments {
        for (r, i) in a.path.matching_edges() {
            used[r][i] += a.beta;
        }
    }
    g.edges().all(|(r, i, _, cap)| used[r][i] <= cap)
}

/// Delivered indirect traffic: `sum_(i,j) min(total flow i->j, T(i,j))`.
pub fn indirect_throughput(assignments: &[PathAssignment], t: &TrafficMatrix) -> u64 {
    let n = t.n();
    let mut flow = TrafficMatrix::zero(n);
    for a in assignments {
        let (src, dst) = (a.path.source(), a.path.destination());
        flow.set(src, dst, flow.get(src, dst).saturating_add(a.beta));
    }
    (0..n)
        .map(|i| (0..n).map(|j| flow.get(i, j).min(t.get(i, j))).sum::<u64>())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Matching, ScheduleEntry};

    /// The three-port cycle matching: 0->1, 1->2, 2->0.
    fn cycle3() -> Matching {
        Matching::new(vec![(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    fn schedule_of(entries: Vec<(u64, Matching)>, window: u64, delay: u64) -> Schedule {
        Schedule::new(
            entries
                .into_iter()
                .map(|(d, m)| ScheduleEntry::new(d, m).unwrap())
                .collect(),
            window,
            delay,
        )
        .unwrap()
    }

    #[test]
    fn build_full_mode_cycle() {
        let t = TrafficMatrix::zero(3);
        let s = schedule_of(vec![(4, cycle3())], 100, 0);
        let (g, demand) = build_layered_graph(&s, RoutingMode::Full, &t).unwrap();
        assert_eq!(g.k(), 1);
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges.len(), 3);
        assert!(edges.iter().all(|&(_, _, _, cap)| cap == 4));
        assert!(demand.is_zero());
    }

    #[test]
    fn build_residual_zeroes_fully_used_edges() {
        let mut t = TrafficMatrix::zero(3);
        t.set(0, 1, 4); // direct demand exactly covers the edge
        let s = schedule_of(vec![(4, cycle3())], 100, 0);
        let (g, demand) = build_layered_graph(&s, RoutingMode::Residual, &t).unwrap();
        assert_eq!(g.matching_edge(0, 0), Some((1, 0)));
        assert_eq!(g.matching_edge(0, 1), Some((2, 4)));
        assert_eq!(demand.get(0, 1), 0);
    }

    #[test]
    fn build_empty_schedule() {
        let t = TrafficMatrix::zero(3);
        let s = Schedule::empty(10, 1);
        let (g, _) = build_layered_graph(&s, RoutingMode::Full, &t).unwrap();
        assert_eq!(g.k(), 0);
    }

    #[test]
    fn reachability_single_round() {
        let t = TrafficMatrix::zero(3);
        let s = schedule_of(vec![(4, cycle3())], 100, 0);
        let (g, _) = build_layered_graph(&s, RoutingMode::Full, &t).unwrap();
        let r = reachable_set(&g, 0);
        assert_eq!(r.into_iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn reachability_two_rounds_doubles_plus_one() {
        // Round 1: 0->1. Round 2: 0->2 and 1->3. From port 0: {1, 2, 3}.
        let t = TrafficMatrix::zero(4);
        let m1 = Matching::new(vec![(0, 1)]).unwrap();
        let m2 = Matching::new(vec![(0, 2), (1, 3)]).unwrap();
        let s = schedule_of(vec![(1, m1), (1, m2)], 100, 0);
        let (g, _) = build_layered_graph(&s, RoutingMode::Full, &t).unwrap();
        let r = reachable_set(&g, 0);
        assert_eq!(r.len(), 3);
        assert_eq!(r.into_iter().collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn reachability_shift_construction_is_exponential() {
        let n = 16usize;
        let t = TrafficMatrix::zero(n);
        for k in 1..=4 {
            let entries: Vec<(u64, Matching)> = (0..k)
                .map(|j| {
                    let shift = 1usize << j;
                    let m = Matching::new((0..n).map(|i| (i, (i + shift) % n)).collect()).unwrap();
                    (1, m)
                })
                .collect();
            let s = schedule_of(entries, 100, 0);
            let (g, _) = build_layered_graph(&s, RoutingMode::Full, &t).unwrap();
            assert_eq!(reachable_set(&g, 0).len(), (1 << k) - 1);
        }
    }

    #[test]
    fn best_path_prefers_direct_edge() {
        let mut t = TrafficMatrix::zero(3);
        t.set(0, 1, 2);
        let s = schedule_of(vec![(4, cycle3())], 100, 0);
        let (g, demand) = build_layered_graph(&s, RoutingMode::Full, &t).unwrap();
        let w = EdgeWeights::initial(&g);
        let pa = best_path(&g, &w, &demand).unwrap();
        assert_eq!(pa.path.nodes(), &[0, 1]);
        assert_eq!(pa.beta, 2);
    }

    #[test]
    fn best_path_none_when_unreachable() {
        let mut t = TrafficMatrix::zero(3);
        t.set(1, 0, 5); // only edges 0->1,1->2,2->0 exist in one round
        let s = schedule_of(vec![(4, cycle3())], 100, 0);
        let (g, demand) = build_layered_graph(&s, RoutingMode::Full, &t).unwrap();
        let w = EdgeWeights::initial(&g);
        assert!(best_path(&g, &w, &demand).is_none());
    }

    #[test]
    fn best_path_two_hop_through_intermediate() {
        let mut t = TrafficMatrix::zero(3);
        t.set(0, 2, 4);
        let s = schedule_of(vec![(4, cycle3()), (4, cycle3())], 100, 0);
        let (g, demand) = build_layered_graph(&s, RoutingMode::Full, &t).unwrap();
        let w = EdgeWeights::initial(&g);
        let pa = best_path(&g, &w, &demand).unwrap();
        assert_eq!(pa.path.nodes(), &[0, 1, 2]);
        assert!(pa.path.is_valid_in(&g));
    }

    #[test]
    fn eclipsepp_routes_around_missing_direct_edge() {
        // Demand 0->2 has no direct circuit; two rounds of the cycle
        // matching let it hop through port 1. Direct throughput is zero.
        let mut t = TrafficMatrix::zero(3);
        t.set(0, 2, 4);
        let s = schedule_of(vec![(4, cycle3()), (4, cycle3())], 100, 0);
        let cfg = EclipseppConfig {
            lambda: None,
            mode: RoutingMode::Full,
            exhaust_capacity: false,
        };
        let assignments = eclipsepp(&t, &s, &cfg).unwrap();
        assert_eq!(indirect_throughput(&assignments, &t), 4);
        assert_eq!(crate::model::direct_throughput(&t, &s).unwrap(), 0);
        for a in &assignments {
            let (g, _) = build_layered_graph(&s, RoutingMode::Full, &t).unwrap();
            assert!(a.path.is_valid_in(&g));
        }
    }

    #[test]
    fn eclipsepp_zero_demand() {
        let t = TrafficMatrix::zero(3);
        let s = schedule_of(vec![(4, cycle3())], 100, 0);
        let cfg = EclipseppConfig::default();
        assert!(eclipsepp(&t, &s, &cfg).unwrap().is_empty());
    }

    #[test]
    fn eclipsepp_single_round_is_direct_only() {
        let mut t = TrafficMatrix::zero(3);
        t.set(0, 1, 3);
        t.set(0, 2, 5); // unreachable in one round
        let s = schedule_of(vec![(4, cycle3())], 100, 0);
        let cfg = EclipseppConfig {
            lambda: None,
            mode: RoutingMode::Full,
            exhaust_capacity: false,
        };
        let assignments = eclipsepp(&t, &s, &cfg).unwrap();
        // Only the matched pair is served, and only on its direct edge.
        assert_eq!(indirect_throughput(&assignments, &t), 3);
        for a in &assignments {
            assert_eq!(a.path.nodes().len(), 2);
        }
    }

    #[test]
    fn eclipsepp_respects_capacities() {
        let mut t = TrafficMatrix::zero(3);
        t.set(0, 1, 10); // more demand than the edge can carry
        let s = schedule_of(vec![(4, cycle3())], 100, 0);
        let cfg = EclipseppConfig {
            lambda: None,
            mode: RoutingMode::Full,
            exhaust_capacity: false,
        };
        let assignments = eclipsepp(&t, &s, &cfg).unwrap();
        let (g, _) = build_layered_graph(&s, RoutingMode::Full, &t).unwrap();
        assert!(capacity_feasible(&g, &assignments));
        assert_eq!(indirect_throughput(&assignments, &t), 4);
    }

    #[test]
    fn indirect_throughput_caps_overdelivery() {
        let mut t = TrafficMatrix::zero(3);
        t.set(0, 2, 4);
        let path = Path::new(vec![0, 2]).unwrap();
        assert_eq!(indirect_throughput(&[], &t), 0);
        let one = PathAssignment {
            beta: 4,
            path: path.clone(),
        };
        assert_eq!(indirect_throughput(&[one], &t), 4);
        let over = PathAssignment { beta: 6, path };
        assert_eq!(indirect_throughput(&[over], &t), 4);
    }
}
