//! Experiment runner: seeded parameter sweeps over the schedulers with CSV
//! output. Trials run in parallel; every trial derives its own RNG seed
//! from the master seed, the grid index, and the trial index, so results
//! are byte-identical regardless of execution order.

use crate::baselines::{bvn_schedule, solstice_schedule};
use crate::eclipse::{eclipse, GreedyStep};
use crate::error::{Error, Result};
use crate::indirect::{eclipsepp, indirect_throughput, EclipseppConfig, RoutingMode};
use crate::model::{direct_throughput, residual_demand, SchedulerConfig, TrafficMatrix};
use crate::trafficgen::{
    gen_multi_block, gen_single_block, BlockSpec, MultiBlockSpec, SingleBlockSpec,
    DEFAULT_WINDOW_SLOTS,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Scheduling algorithms the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Greedy direct routing with the binary-search step.
    Eclipse,
    /// Greedy direct routing with the exact step (slower).
    EclipseExact,
    Solstice,
    Bvn,
    /// Eclipse followed by indirect routing of the residual demand.
    #[serde(rename = "eclipse+eclipsepp")]
    EclipseEclipsepp,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Algorithm::Eclipse => "eclipse",
            Algorithm::EclipseExact => "eclipse-exact",
            Algorithm::Solstice => "solstice",
            Algorithm::Bvn => "bvn",
            Algorithm::EclipseEclipsepp => "eclipse+eclipsepp",
        };
        f.write_str(s)
    }
}

/// What the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    /// Reconfiguration delay as a fraction of the window.
    Delay,
    /// Percentage of traffic carried by the small flows (0-100).
    Skew,
    /// Total flow count per port; the base spec's large:small ratio is kept.
    Sparsity,
    /// Size of the trailing uniform block (multi-block traffic only).
    BlockSize,
    /// Flow-count variation parameter sigma of equi-flow blocks.
    FlowVariation,
    /// Per-port traffic as a fraction of the window.
    Load,
}

impl std::fmt::Display for SweepVar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SweepVar::Delay => "delay",
            SweepVar::Skew => "skew",
            SweepVar::Sparsity => "sparsity",
            SweepVar::BlockSize => "block_size",
            SweepVar::FlowVariation => "flow_variation",
            SweepVar::Load => "load",
        };
        f.write_str(s)
    }
}

/// Base traffic shape, adjusted per grid point by the sweep variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum TrafficModel {
    Single(SingleBlockSpec),
    Multi(MultiBlockSpec),
}

impl TrafficModel {
    fn window(&self) -> u64 {
        match self {
            TrafficModel::Single(s) => s.window,
            TrafficModel::Multi(m) => m.window,
        }
    }
}

fn default_epsilon() -> f64 {
    0.9
}

/// One experiment: a traffic model, a list of algorithms, a sweep grid,
/// and the trial count and master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub traffic: TrafficModel,
    pub algorithms: Vec<Algorithm>,
    pub sweep: SweepVar,
    pub grid: Vec<f64>,
    pub trials: u32,
    pub seed: u64,
    /// delay/window used whenever the sweep variable is not the delay.
    pub delay_fraction: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

/// Aggregated result for one (grid point, algorithm) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_var: SweepVar,
    pub sweep_value: f64,
    pub algorithm: Algorithm,
    pub mean_throughput: f64,
    pub std_throughput: f64,
    pub trials: u32,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn trial_seed(master: u64, grid_index: usize, trial: u32) -> u64 {
    splitmix64(master ^ splitmix64(((grid_index as u64) << 32) | trial as u64))
}

fn scale_fractions(c_large: &mut f64, c_small: &mut f64, target_total: f64) {
    let total = *c_large + *c_small;
    if total <= 0.0 {
        *c_large = target_total;
        return;
    }
    let factor = target_total / total;
    *c_large *= factor;
    *c_small *= factor;
}

fn split_flows(total: f64, base_large: usize, base_small: usize) -> (usize, usize) {
    let total = total.round().max(1.0) as usize;
    let base_total = (base_large + base_small).max(1);
    let ratio = base_large as f64 / base_total as f64;
    let n_large = ((total as f64 * ratio).round() as usize).clamp(1, total);
    (n_large, total - n_large)
}

/// Applies the sweep value to the base traffic model.
fn adjusted_traffic(cfg: &ExperimentConfig, value: f64) -> Result<TrafficModel> {
    let mut traffic = cfg.traffic.clone();
    match (cfg.sweep, &mut traffic) {
        (SweepVar::Delay, _) => {}
        (SweepVar::Load, TrafficModel::Single(s)) => {
            scale_fractions(&mut s.c_large, &mut s.c_small, value);
        }
        (SweepVar::Load, TrafficModel::Multi(m)) => {
            for b in &mut m.blocks {
                match b {
                    BlockSpec::Skewed {
                        c_large, c_small, ..
                    } => {
                        scale_fractions(c_large, c_small, value);
                    }
                    BlockSpec::Uniform { load, .. } | BlockSpec::EquiFlows { load, .. } => {
                        *load = value;
                    }
                }
            }
        }
        (SweepVar::Skew, TrafficModel::Single(s)) => {
            let share = value / 100.0;
            let total = s.c_large + s.c_small;
            s.c_small = total * share;
            s.c_large = total - s.c_small;
        }
        (SweepVar::Skew, TrafficModel::Multi(m)) => {
            let share = value / 100.0;
            for b in &mut m.blocks {
                if let BlockSpec::Skewed {
                    c_large, c_small, ..
                } = b
                {
                    let total = *c_large + *c_small;
                    *c_small = total * share;
                    *c_large = total - *c_small;
                }
            }
        }
        (SweepVar::Sparsity, TrafficModel::Single(s)) => {
            let (nl, ns) = split_flows(value, s.n_large, s.n_small);
            s.n_large = nl;
            s.n_small = ns;
            if ns == 0 {
                s.c_large += s.c_small;
                s.c_small = 0.0;
            }
        }
        (SweepVar::Sparsity, TrafficModel::Multi(m)) => {
            for b in &mut m.blocks {
                if let BlockSpec::Skewed {
                    n_large,
                    n_small,
                    c_large,
                    c_small,
                    ..
                } = b
                {
                    let (nl, ns) = split_flows(value, *n_large, *n_small);
                    *n_large = nl;
                    *n_small = ns;
                    if ns == 0 {
                        *c_large += *c_small;
                        *c_small = 0.0;
                    }
                }
            }
        }
        (SweepVar::BlockSize, TrafficModel::Multi(m)) => {
            // Template: one skewed block followed by one uniform block whose
            // size is the sweep value.
            let uniform_size = value.round().max(0.0) as usize;
            if uniform_size > m.n {
                return Err(Error::InvalidConfig(format!(
                    "uniform block {uniform_size} exceeds n={}",
                    m.n
                )));
            }
            let skewed = m
                .blocks
                .iter()
                .find(|b| matches!(b, BlockSpec::Skewed { .. }))
                .cloned()
                .ok_or_else(|| {
                    Error::InvalidConfig("block_size sweep needs a skewed block".into())
                })?;
            let uniform = m
                .blocks
                .iter()
                .find(|b| matches!(b, BlockSpec::Uniform { .. }))
                .cloned()
                .unwrap_or(BlockSpec::Uniform {
                    size: 0,
                    load: 1.0,
                    noise_std: 0.0,
                });
            let mut blocks = Vec::new();
            if m.n > uniform_size {
                let mut s = skewed;
                if let BlockSpec::Skewed { size, .. } = &mut s {
                    *size = m.n - uniform_size;
                }
                blocks.push(s);
            }
            if uniform_size > 0 {
                let mut u = uniform;
                if let BlockSpec::Uniform { size, .. } = &mut u {
                    *size = uniform_size;
                }
                blocks.push(u);
            }
            m.blocks = blocks;
        }
        (SweepVar::FlowVariation, TrafficModel::Multi(m)) => {
            let mut found = false;
            for b in &mut m.blocks {
                if let BlockSpec::EquiFlows { sigma, .. } = b {
                    *sigma = value;
                    found = true;
                }
            }
            if !found {
                return Err(Error::InvalidConfig(
                    "flow_variation sweep needs equi_flows blocks".into(),
                ));
            }
        }
        (sweep, TrafficModel::Single(_)) => {
            return Err(Error::InvalidConfig(format!(
                "sweep {sweep} needs multi-block traffic"
            )));
        }
    }
    Ok(traffic)
}

fn generate(traffic: &TrafficModel, seed: u64) -> Result<TrafficMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match traffic {
        TrafficModel::Single(s) => gen_single_block(s, &mut rng),
        TrafficModel::Multi(m) => gen_multi_block(m, &mut rng),
    }
}

/// Total traffic an algorithm delivers on one instance.
fn run_algorithm(algo: Algorithm, t: &TrafficMatrix, cfg: &SchedulerConfig) -> Result<u64> {
    match algo {
        Algorithm::Eclipse => direct_throughput(t, &eclipse(t, cfg, GreedyStep::BinarySearch)?),
        Algorithm::EclipseExact => direct_throughput(t, &eclipse(t, cfg, GreedyStep::Exact)?),
        Algorithm::Solstice => direct_throughput(t, &solstice_schedule(t, cfg)?),
        Algorithm::Bvn => direct_throughput(t, &bvn_schedule(t, cfg)?),
        Algorithm::EclipseEclipsepp => {
            let s = eclipse(t, cfg, GreedyStep::BinarySearch)?;
            let direct = direct_throughput(t, &s)?;
            // Evaluation mode: pack residual capacity to exhaustion. The
            // literal weight budget closes at the first saturated edge,
            // which in these high-eta regimes strands most of the slack.
            let pp = EclipseppConfig {
                lambda: None,
                mode: RoutingMode::Residual,
                exhaust_capacity: true,
            };
            let assignments = eclipsepp(t, &s, &pp)?;
            let indirect = indirect_throughput(&assignments, &residual_demand(t, &s)?);
            Ok(direct + indirect)
        }
    }
}

/// Runs the sweep: for every grid point and trial, generate a demand
/// matrix (seeded) and score each algorithm's delivered fraction. Rows are
/// ordered by grid point, then by the algorithm list.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    if cfg.trials == 0 {
        return Err(Error::InvalidConfig("trials must be >= 1".into()));
    }
    if cfg.grid.is_empty() {
        return Err(Error::InvalidConfig("sweep grid must be nonempty".into()));
    }
    if cfg.algorithms.is_empty() {
        return Err(Error::InvalidConfig(
            "algorithm list must be nonempty".into(),
        ));
    }
    let window = cfg.traffic.window();

    // One job per (grid point, trial); all algorithms share the instance.
    let jobs: Vec<(usize, u32)> = (0..cfg.grid.len())
        .flat_map(|gi| (0..cfg.trials).map(move |tr| (gi, tr)))
        .collect();

    let fractions: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(gi, trial)| -> Result<Vec<f64>> {
            let value = cfg.grid[gi];
            let traffic = adjusted_traffic(cfg, value)?;
            let seed = trial_seed(cfg.seed, gi, trial);
            let t = generate(&traffic, seed)?;
            let delay_fraction = match cfg.sweep {
                SweepVar::Delay => value,
                _ => cfg.delay_fraction,
            };
            let delay = (delay_fraction * window as f64).round().max(0.0) as u64;
            let scfg = SchedulerConfig::new(delay, window, cfg.epsilon, seed)?;
            let denom = t.total().max(1) as f64;
            cfg.algorithms
                .iter()
                .map(|&algo| {
                    run_algorithm(algo, &t, &scfg)
                        .map(|delivered| delivered as f64 / denom)
                        .map_err(|e| {
                            Error::InvalidConfig(format!("grid point {value} trial {trial}: {e}"))
                        })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for gi in 0..cfg.grid.len() {
        for (ai, &algo) in cfg.algorithms.iter().enumerate() {
            let samples: Vec<f64> = (0..cfg.trials)
                .map(|tr| fractions[gi * cfg.trials as usize + tr as usize][ai])
                .collect();
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            let var =
                samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / samples.len() as f64;
            rows.push(ResultRow {
                sweep_var: cfg.sweep,
                sweep_value: cfg.grid[gi],
                algorithm: algo,
                mean_throughput: mean,
                std_throughput: var.sqrt(),
                trials: cfg.trials,
            });
        }
    }
    Ok(rows)
}

/// Fixed-format CSV: six decimal digits for every floating value.
pub fn export_csv(rows: &[ResultRow]) -> String {
    let mut out =
        String::from("sweep_var,sweep_value,algorithm,mean_throughput,std_throughput,trials\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{},{:.6},{:.6},{}\n",
            r.sweep_var, r.sweep_value, r.algorithm, r.mean_throughput, r.std_throughput, r.trials
        ));
    }
    out
}

/// Built-in experiment configurations mirroring the standard evaluation
/// sweeps, at desk scale by default (10 trials); `full_scale` raises the
/// trial count to 25.
pub fn preset(name: &str, full_scale: bool) -> Option<ExperimentConfig> {
    let trials = if full_scale { 25 } else { 10 };
    let direct_algos = vec![Algorithm::Eclipse, Algorithm::Solstice, Algorithm::Bvn];
    let indirect_algos = vec![Algorithm::Eclipse, Algorithm::EclipseEclipsepp];
    let single = SingleBlockSpec::default_desk_scale();
    let two_block = |uniform: usize| MultiBlockSpec {
        n: 200,
        window: DEFAULT_WINDOW_SLOTS,
        blocks: vec![
            BlockSpec::Skewed {
                size: 200 - uniform,
                n_large: 4,
                n_small: 12,
                c_large: 0.7,
                c_small: 0.3,
                noise_std: 0.003,
            },
            BlockSpec::Uniform {
                size: uniform,
                load: 1.0,
                noise_std: 0.003,
            },
        ],
    };
    let indirect_single = SingleBlockSpec {
        n: 50,
        n_large: 5,
        n_small: 25,
        c_large: 0.1,
        c_small: 0.1,
        noise_std: 0.003,
        window: DEFAULT_WINDOW_SLOTS,
    };

    let cfg = match name {
        "delay-single" => ExperimentConfig {
            traffic: TrafficModel::Single(single),
            algorithms: direct_algos,
            sweep: SweepVar::Delay,
            grid: vec![
                1.0 / 3200.0,
                1.0 / 1600.0,
                1.0 / 800.0,
                1.0 / 400.0,
                1.0 / 200.0,
                1.0 / 100.0,
                2.0 / 100.0,
                4.0 / 100.0,
            ],
            trials,
            seed: 1,
            delay_fraction: 0.01,
            epsilon: 0.9,
        },
        "skew" => ExperimentConfig {
            traffic: TrafficModel::Single(single),
            algorithms: direct_algos,
            sweep: SweepVar::Skew,
            grid: vec![5.0, 15.0, 30.0, 45.0, 60.0, 75.0],
            trials,
            seed: 2,
            delay_fraction: 0.01,
            epsilon: 0.9,
        },
        "sparsity" => ExperimentConfig {
            traffic: TrafficModel::Single(single),
            algorithms: direct_algos,
            sweep: SweepVar::Sparsity,
            grid: vec![4.0, 8.0, 16.0, 24.0, 32.0],
            trials,
            seed: 3,
            delay_fraction: 0.01,
            epsilon: 0.9,
        },
        "block-size" => ExperimentConfig {
            traffic: TrafficModel::Multi(two_block(50)),
            algorithms: direct_algos,
            sweep: SweepVar::BlockSize,
            grid: vec![0.0, 10.0, 30.0, 50.0, 70.0],
            trials,
            seed: 4,
            delay_fraction: 0.01,
            epsilon: 0.9,
        },
        "delay-multi" => ExperimentConfig {
            traffic: TrafficModel::Multi(two_block(50)),
            algorithms: direct_algos,
            sweep: SweepVar::Delay,
            grid: vec![0.0025, 0.005, 0.01, 0.02, 0.04],
            trials,
            seed: 5,
            delay_fraction: 0.01,
            epsilon: 0.9,
        },
        "flow-variation" => ExperimentConfig {
            traffic: TrafficModel::Multi(MultiBlockSpec {
                n: 200,
                window: DEFAULT_WINDOW_SLOTS,
                blocks: (0..8)
                    .map(|_| BlockSpec::EquiFlows {
                        size: 25,
                        base_flows: 10,
                        sigma: 0.0,
                        noise_std: 0.003,
                        load: 1.0,
                    })
                    .collect(),
            }),
            algorithms: direct_algos,
            sweep: SweepVar::FlowVariation,
            grid: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            trials,
            seed: 6,
            delay_fraction: 0.01,
            epsilon: 0.9,
        },
        "indirect-sparsity" => ExperimentConfig {
            traffic: TrafficModel::Single(indirect_single),
            algorithms: indirect_algos,
            sweep: SweepVar::Sparsity,
            grid: vec![12.0, 20.0, 30.0, 42.0, 54.0],
            trials,
            seed: 7,
            delay_fraction: 0.16,
            epsilon: 0.9,
        },
        "indirect-load" => ExperimentConfig {
            traffic: TrafficModel::Single(indirect_single),
            algorithms: indirect_algos,
            sweep: SweepVar::Load,
            grid: vec![0.1, 0.15, 0.2, 0.3, 0.4, 0.5],
            trials,
            seed: 8,
            delay_fraction: 0.16,
            epsilon: 0.9,
        },
        "indirect-delay" => ExperimentConfig {
            traffic: TrafficModel::Single(indirect_single),
            algorithms: indirect_algos,
            sweep: SweepVar::Delay,
            grid: vec![0.03, 0.06, 0.09, 0.12, 0.15, 0.18, 0.21],
            trials,
            seed: 9,
            delay_fraction: 0.16,
            epsilon: 0.9,
        },
        _ => return None,
    };
    Some(cfg)
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: &[&str] = &[
    "delay-single",
    "skew",
    "sparsity",
    "block-size",
    "delay-multi",
    "flow-variation",
    "indirect-sparsity",
    "indirect-load",
    "indirect-delay",
];
