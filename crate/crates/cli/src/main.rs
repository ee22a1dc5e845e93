use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ris_ddpg::experiment::{
    eval_checkpoint, run_convergence, run_sweep_point, write_complexity, write_convergence, write_eval, write_rate_sweep,
    ComplexityRow, RateRow, SweepPoint, ACTOR_FILE,
};
use ris_ddpg::ExperimentConfig;

#[derive(Parser)]
#[command(name = "ris-ddpg", version, about = "Long-term CSI beamforming for RIS-aided downlinks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment configuration; desk-scale defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Start from the full-size reference configuration.
    #[arg(long, conflicts_with = "config")]
    paper_scale: bool,
    /// Training episodes (per sweep point for the sweeps).
    #[arg(long)]
    episodes: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent and write its learning curves.
    Convergence(Common),
    /// Minimum average user rate of both schemes versus the number of RIS elements.
    RateSweep(Sweep),
    /// Solver invocations and wall-clock time of both schemes.
    Complexity(Sweep),
    /// Re-extract and score the configuration of a saved actor.
    EvalCheckpoint {
        #[command(flatten)]
        common: Common,
        /// Actor checkpoint; defaults to the one in the output directory.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Print the effective configuration as TOML.
    ShowConfig(Common),
}

#[derive(Args)]
struct Sweep {
    #[command(flatten)]
    common: Common,
    /// Comma-separated element counts; overrides the configured list.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
}

fn load(common: &Common, sweep: bool) -> Result<ExperimentConfig> {
    let mut cfg = match (&common.config, common.paper_scale) {
        (Some(path), _) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        (None, true) => ExperimentConfig::paper(),
        (None, false) => ExperimentConfig::desk(),
    };
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.run.output_dir = out.clone();
    }
    if let Some(episodes) = common.episodes {
        if sweep {
            cfg.sweep.episodes = Some(episodes);
        } else {
            cfg.agent.episodes = episodes;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sweep_rows(s: &Sweep) -> Result<(ExperimentConfig, Vec<SweepPoint>)> {
    let mut cfg = load(&s.common, true)?;
    if let Some(n) = &s.n {
        cfg.sweep.n_values = n.clone();
    }
    cfg.validate()?;
    let mut points = Vec::new();
    for &n in &cfg.sweep.n_values {
        eprintln!("N = {n}");
        points.push(run_sweep_point(&cfg, n)?);
    }
    Ok((cfg, points))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Convergence(common) => {
            let cfg = load(&common, false)?;
            let run = run_convergence(&cfg)?;
            write_convergence(&cfg.run.output_dir, &cfg, &run)?;
            println!(
                "episodes {}  updates {}  deployed ergodic min-rate {:.4}  fresh evaluation reward {:.4}",
                run.outcome.episodes.len(),
                run.outcome.updates,
                run.outcome.deployed_ergodic_min_rate,
                run.deployed_evaluation_reward
            );
        }
        Command::RateSweep(s) => {
            let (cfg, points) = sweep_rows(&s)?;
            let rows: Vec<RateRow> = points.iter().map(RateRow::from).collect();
            for r in &rows {
                if r.pilot_factor_clamped {
                    eprintln!(
                        "note: N = {} leaves no data slots (2K + N - 1 >= tau_c); instantaneous rate is 0",
                        r.n
                    );
                }
                println!(
                    "N {:>4}  factor {:.4}  long-term {:.4}  instantaneous {:.4}",
                    r.n, r.pilot_factor, r.maur_longterm, r.maur_instantaneous
                );
            }
            write_rate_sweep(&cfg.run.output_dir, &cfg, &rows)?;
        }
        Command::Complexity(s) => {
            let (cfg, points) = sweep_rows(&s)?;
            let rows: Vec<ComplexityRow> = points.iter().map(ComplexityRow::from).collect();
            for r in &rows {
                println!(
                    "N {:>4}  calls {} / {}  seconds {:.3} / {:.3}",
                    r.n,
                    r.solver_calls_longterm,
                    r.solver_calls_instantaneous,
                    r.wallclock_longterm_s,
                    r.wallclock_instantaneous_s
                );
            }
            write_complexity(&cfg.run.output_dir, &cfg, &rows)?;
        }
        Command::EvalCheckpoint { common, checkpoint } => {
            let cfg = load(&common, false)?;
            let path = checkpoint.unwrap_or_else(|| cfg.run.output_dir.join(ACTOR_FILE));
            let eval = eval_checkpoint(&cfg, &path).with_context(|| format!("evaluating {}", path.display()))?;
            write_eval(&cfg.run.output_dir, &cfg, &eval)?;
            println!(
                "ergodic min-rate {:.4}  evaluation reward {:.4}",
                eval.ergodic_min_rate, eval.evaluation_reward
            );
        }
        Command::ShowConfig(common) => {
            print!("{}", load(&common, false)?.to_toml_string()?);
        }
    }
    Ok(())
}
