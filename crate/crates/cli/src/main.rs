//! Command-line front end: generate demand, schedule it, route residuals
//! indirectly, query the brute-force oracles, and run experiment sweeps.
//!
//! Exit codes: 0 on success, 2 on infeasible input, 1 on any other error.

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use hybridsched_core::baselines::{bvn_schedule, solstice_schedule};
use hybridsched_core::eclipse::{eclipse, GreedyStep};
use hybridsched_core::error::Error as CoreError;
use hybridsched_core::format::{AssignmentsFile, DemandFile, ScheduleFile};
use hybridsched_core::harness::{export_csv, preset, run_sweep, ExperimentConfig, PRESET_NAMES};
use hybridsched_core::indirect::{
    build_layered_graph, eclipsepp, indirect_throughput, EclipseppConfig, RoutingMode,
};
use hybridsched_core::matching::mwm_curve;
use hybridsched_core::model::{direct_throughput, validate_demand, SchedulerConfig, TrafficMatrix};
use hybridsched_core::oracle::{
    brute_force_best_pair, brute_force_indirect, brute_force_optimal_direct,
};
use hybridsched_core::trafficgen::{
    gen_multi_block, gen_single_block, MultiBlockSpec, SingleBlockSpec,
};
use rand::SeedableRng;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hybridsched",
    version,
    about = "Schedulers for a hybrid circuit/packet switch with reconfiguration delay"
)]
struct Cli {
    /// Master RNG seed (overrides seeds in config files).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials per sweep point (overrides config files).
    #[arg(long, global = true)]
    trials: Option<u32>,
    /// Run presets at full scale (25 trials) instead of desk scale (10).
    #[arg(long, global = true)]
    full_scale: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Eclipse,
    Solstice,
    Bvn,
}

#[derive(Clone, Copy, ValueEnum)]
enum StepArg {
    Exact,
    Bsearch,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Residual,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Single,
    Multi,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic demand matrix (seeded via the global --seed).
    Gen {
        #[arg(long, value_enum)]
        model: ModelArg,
        /// JSON spec file (SingleBlockSpec or MultiBlockSpec).
        #[arg(long)]
        spec: PathBuf,
        /// Reconfiguration delay stored in the demand file; defaults to window/100.
        #[arg(long)]
        delay: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Matching-value curve of a demand matrix, as CSV.
    Curve {
        #[arg(long)]
        demand: PathBuf,
        /// Override the delay stored in the demand file.
        #[arg(long)]
        delay: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute a schedule for a demand file.
    Schedule {
        #[arg(long, value_enum)]
        algo: AlgoArg,
        /// Greedy-step search used by eclipse.
        #[arg(long, value_enum, default_value = "bsearch")]
        step: StepArg,
        #[arg(long)]
        demand: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Entry-bound parameter used for validation warnings.
        #[arg(long, default_value_t = 0.9)]
        epsilon: f64,
        /// Override the delay stored in the demand file.
        #[arg(long)]
        delay: Option<u64>,
    },
    /// Route traffic indirectly over a fixed schedule.
    Route {
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        demand: PathBuf,
        #[arg(long, value_enum, default_value = "residual")]
        mode: ModeArg,
        /// Multiplicative-weights update factor; computed from the instance when omitted.
        #[arg(long)]
        lambda: Option<f64>,
        /// Keep routing until capacity or demand is exhausted instead of
        /// stopping at the weight budget.
        #[arg(long)]
        exhaust: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Brute-force references for small instances.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Run an experiment sweep and write CSV.
    Sweep {
        /// Experiment config JSON; mutually exclusive with --preset.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in experiment by name.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Optimal direct-routing throughput (n <= 4, W <= 16).
    Direct {
        #[arg(long)]
        demand: PathBuf,
        #[arg(long, default_value_t = 3)]
        k_max: usize,
    },
    /// Best single greedy step (n <= 4).
    Step {
        #[arg(long)]
        demand: PathBuf,
    },
    /// Optimal indirect packing over a schedule (n <= 3, k <= 3).
    Indirect {
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        demand: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        mode: ModeArg,
    },
}

fn read_demand(path: &Path) -> anyhow::Result<(TrafficMatrix, u64, u64)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = DemandFile::from_json(&text)?;
    let t = file.matrix()?;
    Ok((t, file.window, file.delay))
}

fn write_out(path: &Path, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen {
            model,
            spec,
            delay,
            out,
        } => {
            let text = std::fs::read_to_string(&spec)
                .with_context(|| format!("reading {}", spec.display()))?;
            let seed = cli.seed.unwrap_or(0);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (t, window) = match model {
                ModelArg::Single => {
                    let s: SingleBlockSpec = serde_json::from_str(&text)
                        .map_err(|e| CoreError::InvalidFormat(format!("spec: {e}")))?;
                    (gen_single_block(&s, &mut rng)?, s.window)
                }
                ModelArg::Multi => {
                    let s: MultiBlockSpec = serde_json::from_str(&text)
                        .map_err(|e| CoreError::InvalidFormat(format!("spec: {e}")))?;
                    (gen_multi_block(&s, &mut rng)?, s.window)
                }
            };
            let delay = delay.unwrap_or(window / 100);
            write_out(&out, &DemandFile::new(&t, window, delay).to_json())?;
            eprintln!(
                "wrote demand: n={}, window={}, delay={}, total={}",
                t.n(),
                window,
                delay,
                t.total()
            );
        }
        Command::Curve { demand, delay, out } => {
            let (t, _, file_delay) = read_demand(&demand)?;
            let delay = delay.unwrap_or(file_delay);
            let mut csv = String::from("alpha,value,eff_util\n");
            for p in mwm_curve(&t, delay) {
                csv.push_str(&format!(
                    "{},{},{:.6}\n",
                    p.alpha,
                    p.value,
                    p.effective_utilization.as_f64()
                ));
            }
            write_out(&out, &csv)?;
            eprintln!("wrote curve for n={} demand, delay={delay}", t.n());
        }
        Command::Schedule {
            algo,
            step,
            demand,
            out,
            epsilon,
            delay,
        } => {
            let (t, window, file_delay) = read_demand(&demand)?;
            let cfg = SchedulerConfig::new(delay.unwrap_or(file_delay), window, epsilon, 0)?;
            let report = validate_demand(&t, &cfg);
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let s = match algo {
                AlgoArg::Eclipse => {
                    let step = match step {
                        StepArg::Exact => GreedyStep::Exact,
                        StepArg::Bsearch => GreedyStep::BinarySearch,
                    };
                    eclipse(&t, &cfg, step)?
                }
                AlgoArg::Solstice => solstice_schedule(&t, &cfg)?,
                AlgoArg::Bvn => bvn_schedule(&t, &cfg)?,
            };
            let thr = direct_throughput(&t, &s)?;
            let total = t.total();
            write_out(&out, &ScheduleFile::new(&s).to_json())?;
            eprintln!(
                "schedule: {} configurations, throughput {thr}/{total} ({:.1}%), leftover {}",
                s.len(),
                100.0 * thr as f64 / total.max(1) as f64,
                total - thr
            );
        }
        Command::Route {
            schedule,
            demand,
            mode,
            lambda,
            exhaust,
            out,
        } => {
            let (t, _, _) = read_demand(&demand)?;
            let text = std::fs::read_to_string(&schedule)
                .with_context(|| format!("reading {}", schedule.display()))?;
            let s = ScheduleFile::from_json(&text)?.schedule()?;
            let mode = match mode {
                ModeArg::Full => RoutingMode::Full,
                ModeArg::Residual => RoutingMode::Residual,
            };
            let cfg = EclipseppConfig {
                lambda,
                mode,
                exhaust_capacity: exhaust,
            };
            let assignments = eclipsepp(&t, &s, &cfg)?;
            let (_, served_demand) = build_layered_graph(&s, mode, &t)?;
            let thr = indirect_throughput(&assignments, &served_demand);
            write_out(&out, &AssignmentsFile::new(&assignments).to_json())?;
            eprintln!(
                "routed {} paths, indirect throughput {thr} of demand {}",
                assignments.len(),
                served_demand.total()
            );
        }
        Command::Oracle { which } => match which {
            OracleCommand::Direct { demand, k_max } => {
                let (t, window, delay) = read_demand(&demand)?;
                let cfg = SchedulerConfig::new(delay, window, 0.9, 0)?;
                let r = brute_force_optimal_direct(&t, &cfg, k_max)?;
                println!("{}", ScheduleFile::new(&r.witness).to_json());
                eprintln!("optimal direct throughput: {}", r.value);
            }
            OracleCommand::Step { demand } => {
                let (t, _, delay) = read_demand(&demand)?;
                let r = brute_force_best_pair(&t, delay)?;
                eprintln!(
                    "best pair: alpha={}, gain={}, ratio={}, pairs={:?}",
                    r.alpha,
                    r.gain,
                    r.ratio,
                    r.matching.pairs()
                );
            }
            OracleCommand::Indirect {
                schedule,
                demand,
                mode,
            } => {
                let (t, _, _) = read_demand(&demand)?;
                let text = std::fs::read_to_string(&schedule)
                    .with_context(|| format!("reading {}", schedule.display()))?;
                let s = ScheduleFile::from_json(&text)?.schedule()?;
                let mode = match mode {
                    ModeArg::Full => RoutingMode::Full,
                    ModeArg::Residual => RoutingMode::Residual,
                };
                let (g, served) = build_layered_graph(&s, mode, &t)?;
                let r = brute_force_indirect(&g, &served)?;
                println!("{}", AssignmentsFile::new(&r.witness).to_json());
                eprintln!("optimal indirect throughput: {}", r.value);
            }
        },
        Command::Sweep {
            config,
            preset: preset_name,
            out,
        } => {
            let mut cfg: ExperimentConfig = match (config, preset_name) {
                (Some(path), None) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str(&text)
                        .map_err(|e| CoreError::InvalidFormat(format!("sweep config: {e}")))?
                }
                (None, Some(name)) => preset(&name, cli.full_scale).ok_or_else(|| {
                    anyhow!(
                        "unknown preset {name:?}; available: {}",
                        PRESET_NAMES.join(", ")
                    )
                })?,
                _ => return Err(anyhow!("pass exactly one of --config or --preset")),
            };
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(trials) = cli.trials {
                cfg.trials = trials;
            }
            let rows = run_sweep(&cfg)?;
            write_out(&out, &export_csv(&rows))?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let infeasible = err
                .downcast_ref::<CoreError>()
                .map(|e| matches!(e, CoreError::InfeasibleDemand(_)))
                .unwrap_or(false);
            if infeasible {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
