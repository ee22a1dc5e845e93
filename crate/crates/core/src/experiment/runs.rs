use std::fs::{self, File};
use std::collections::BTreeMap;
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use crate::agent::{evaluate_fixed_config, extract_deployed_config, train, Environment, TrainingOutcome};
use crate::baselines::{compare_schemes, LocalSearchDesigner, LongTermDesigner, SchemeComparison};
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::experiment::config::ExperimentConfig;
use crate::experiment::scenario::{Scenario, Seeds};
use crate::nn::{read_checkpoint, write_checkpoint};
use crate::rate::{ergodic_min_rate, TxConfig};
use crate::agent::AgentConfig;

pub const TRAINING_LOG_FILE: &str = "training_log.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const RATE_SWEEP_FILE: &str = "rate_sweep.csv";
pub const COMPLEXITY_FILE: &str = "complexity.csv";
pub const EVAL_FILE: &str = "eval.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const ACTOR_FILE: &str = "actor.ckpt";
pub const CRITIC_FILE: &str = "critic.ckpt";

/// Long-term designer that trains an agent on its own offline dataset.
pub struct DdpgDesigner<'a> {
    pub env: Environment<'a>,
    pub config: AgentConfig,
    pub seed: u64,
    pub outcome: Option<TrainingOutcome>,
}

impl LongTermDesigner for DdpgDesigner<'_> {
    fn design(&mut self, _intervals: &[ChannelRealization]) -> Result<TxConfig> {
        let outcome = train(&self.env, &self.config, self.seed)?;
        let tx = outcome.deployed.clone();
        self.outcome = Some(outcome);
        Ok(tx)
    }
}

pub struct ConvergenceRun {
    pub seeds: Seeds,
    pub scenario: Scenario,
    pub outcome: TrainingOutcome,
    /// Evaluation reward of the deployed configuration on fresh intervals.
    pub deployed_evaluation_reward: f64,
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceRun> {
    cfg.validate()?;
    let seeds = Seeds::from_config(cfg);
    let scenario = Scenario::build(&cfg.scenario, seeds.scenario)?;
    let dataset = scenario.dataset(seeds.dataset)?;
    let env = Environment::new(&scenario.csi, &dataset, scenario.sigma2, cfg.scenario.max_power)?;
    let outcome = train(&env, &cfg.agent, seeds.agent)?;
    let fresh = scenario.dataset(seeds.evaluation)?;
    let deployed_evaluation_reward = evaluate_fixed_config(&fresh, &outcome.deployed, scenario.sigma2)?;
    Ok(ConvergenceRun {
        seeds,
        scenario,
        outcome,
        deployed_evaluation_reward,
    })
}

#[derive(Debug, Serialize)]
struct TrainingLogRow {
    episode: usize,
    step: usize,
    reward: f64,
    evaluation_reward: f64,
    smoothed_reward: f64,
    critic_loss: Option<f64>,
    noise_scale: f64,
}

#[derive(Debug, Serialize)]
struct ConvergenceRow {
    episode: usize,
    reward: f64,
    evaluation_reward: f64,
    smoothed: f64,
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    /// Hex strings; derived seeds exceed the TOML integer range.
    seeds: BTreeMap<&'static str, String>,
    config: &'a ExperimentConfig,
}

fn seed_table(s: &Seeds) -> BTreeMap<&'static str, String> {
    [
        ("master", s.master),
        ("scenario", s.scenario),
        ("training", s.training),
        ("dataset", s.dataset),
        ("agent", s.agent),
        ("baseline", s.baseline),
        ("evaluation", s.evaluation),
        ("monte_carlo", s.monte_carlo),
    ]
    .into_iter()
    .map(|(k, v)| (k, format!("{v:#018x}")))
    .collect()
}

pub fn write_manifest(dir: &Path, command: &str, cfg: &ExperimentConfig) -> Result<()> {
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        seeds: seed_table(&Seeds::from_config(cfg)),
        config: cfg,
    };
    fs::write(dir.join(MANIFEST_FILE), toml::to_string(&manifest)?)?;
    Ok(())
}

/// Writes the per-step log, the per-episode curve, both networks and the manifest.
pub fn write_convergence(dir: &Path, cfg: &ExperimentConfig, run: &ConvergenceRun) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(
        &dir.join(TRAINING_LOG_FILE),
        run.outcome.steps.iter().map(|r| TrainingLogRow {
            episode: r.episode,
            step: r.step,
            reward: r.reward,
            evaluation_reward: r.evaluation_reward,
            smoothed_reward: r.smoothed_reward,
            critic_loss: r.critic_loss,
            noise_scale: r.noise_scale,
        }),
    )?;
    write_csv(
        &dir.join(CONVERGENCE_FILE),
        run.outcome.episodes.iter().map(|e| ConvergenceRow {
            episode: e.episode,
            reward: e.mean_reward,
            evaluation_reward: e.evaluation_reward,
            smoothed: e.smoothed,
        }),
    )?;
    write_checkpoint(BufWriter::new(File::create(dir.join(ACTOR_FILE))?), &run.outcome.agent.actor)?;
    write_checkpoint(BufWriter::new(File::create(dir.join(CRITIC_FILE))?), &run.outcome.agent.critic)?;
    write_manifest(dir, "convergence", cfg)
}

/// Both schemes at one element count.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub n: usize,
    pub comparison: SchemeComparison,
    pub deployed_ergodic_min_rate: f64,
}

/// Trains the long-term agent at element count `n` and compares it with the
/// per-interval search on fresh intervals. Every point shares the drop.
pub fn run_sweep_point(cfg: &ExperimentConfig, n: usize) -> Result<SweepPoint> {
    let seeds = Seeds::from_config(cfg);
    let scenario_cfg = cfg.sweep.scenario_at(&cfg.scenario, n);
    let scenario = Scenario::build(&scenario_cfg, seeds.scenario)?;
    let offline = scenario.dataset(seeds.dataset)?;
    let fresh = scenario.dataset(seeds.evaluation)?;
    let env = Environment::new(&scenario.csi, &offline, scenario.sigma2, scenario_cfg.max_power)?;
    let mut longterm = DdpgDesigner {
        env,
        config: cfg.sweep.agent_at(&cfg.agent),
        seed: seeds.agent,
        outcome: None,
    };
    let mut instantaneous = LocalSearchDesigner {
        config: cfg.baseline.clone(),
        sigma2: scenario.sigma2,
        max_power: scenario_cfg.max_power,
        seed: seeds.baseline,
    };
    let comparison = compare_schemes(&fresh, scenario.sigma2, &scenario_cfg.overhead(), &mut longterm, &mut instantaneous)?;
    let deployed_ergodic_min_rate = longterm
        .outcome
        .as_ref()
        .map(|o| o.deployed_ergodic_min_rate)
        .unwrap_or(f64::NAN);
    Ok(SweepPoint {
        n,
        comparison,
        deployed_ergodic_min_rate,
    })
}

pub fn run_sweep(cfg: &ExperimentConfig, n_values: &[usize]) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    if n_values.is_empty() {
        return Err(Error::Empty("sweep needs at least one element count"));
    }
    n_values.iter().map(|&n| run_sweep_point(cfg, n)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub pilot_factor: f64,
    pub pilot_factor_clamped: bool,
    pub maur_longterm: f64,
    pub maur_instantaneous: f64,
    pub maur_instantaneous_unpenalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityRow {
    pub n: usize,
    pub solver_calls_longterm: usize,
    pub solver_calls_instantaneous: usize,
    pub wallclock_longterm_s: f64,
    pub wallclock_instantaneous_s: f64,
}

impl From<&SweepPoint> for RateRow {
    fn from(p: &SweepPoint) -> Self {
        let c = &p.comparison;
        Self {
            n: p.n,
            pilot_factor: c.pilot_factor,
            pilot_factor_clamped: c.pilot_factor_clamped,
            maur_longterm: c.maur_longterm,
            maur_instantaneous: c.maur_instantaneous,
            maur_instantaneous_unpenalized: c.maur_instantaneous_unpenalized,
        }
    }
}

impl From<&SweepPoint> for ComplexityRow {
    fn from(p: &SweepPoint) -> Self {
        let c = &p.comparison;
        Self {
            n: p.n,
            solver_calls_longterm: c.solver_calls_longterm,
            solver_calls_instantaneous: c.solver_calls_instantaneous,
            wallclock_longterm_s: c.wallclock_longterm.as_secs_f64(),
            wallclock_instantaneous_s: c.wallclock_instantaneous.as_secs_f64(),
        }
    }
}

/// Minimum average user rate of both schemes for every element count.
pub fn run_rate_vs_elements(cfg: &ExperimentConfig, n_values: &[usize]) -> Result<Vec<RateRow>> {
    Ok(run_sweep(cfg, n_values)?.iter().map(RateRow::from).collect())
}

/// Solver invocations and wall-clock time of both schemes for every element count.
pub fn run_complexity(cfg: &ExperimentConfig, n_values: &[usize]) -> Result<Vec<ComplexityRow>> {
    Ok(run_sweep(cfg, n_values)?.iter().map(ComplexityRow::from).collect())
}

pub fn write_rate_sweep(dir: &Path, cfg: &ExperimentConfig, rows: &[RateRow]) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join(RATE_SWEEP_FILE), rows)?;
    write_manifest(dir, "rate-sweep", cfg)
}

pub fn write_complexity(dir: &Path, cfg: &ExperimentConfig, rows: &[ComplexityRow]) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join(COMPLEXITY_FILE), rows)?;
    write_manifest(dir, "complexity", cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckpointEval {
    pub ergodic_min_rate: f64,
    /// Evaluation reward over fresh intervals.
    pub evaluation_reward: f64,
    #[serde(skip)]
    pub deployed: TxConfig,
}

/// Re-extracts the deployed configuration from a saved actor and scores it.
pub fn eval_checkpoint(cfg: &ExperimentConfig, actor_path: &Path) -> Result<CheckpointEval> {
    cfg.validate()?;
    let actor = read_checkpoint(std::io::BufReader::new(File::open(actor_path)?))?;
    let seeds = Seeds::from_config(cfg);
    let scenario = Scenario::build(&cfg.scenario, seeds.scenario)?;
    let dataset = scenario.dataset(seeds.dataset)?;
    let env = Environment::new(&scenario.csi, &dataset, scenario.sigma2, cfg.scenario.max_power)?;
    let layout = env.layout();
    if actor.input_dim() != layout.state_dim() || actor.output_dim() != layout.action_dim() {
        return Err(Error::ArchitectureMismatch(format!(
            "actor maps {} -> {} but the scenario needs {} -> {}",
            actor.input_dim(),
            actor.output_dim(),
            layout.state_dim(),
            layout.action_dim()
        )));
    }
    let (deployed, _) = extract_deployed_config(&actor, &env, cfg.agent.extraction_samples, seeds.agent)?;
    let ergodic_min_rate = ergodic_min_rate(&scenario.csi, &deployed, scenario.sigma2, cfg.run.n_mc, seeds.monte_carlo)?;
    let fresh = scenario.dataset(seeds.evaluation)?;
    let evaluation_reward = evaluate_fixed_config(&fresh, &deployed, scenario.sigma2)?;
    Ok(CheckpointEval {
        ergodic_min_rate,
        evaluation_reward,
        deployed,
    })
}

pub fn write_eval(dir: &Path, cfg: &ExperimentConfig, eval: &CheckpointEval) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join(EVAL_FILE), [eval])?;
    write_manifest(dir, "eval-checkpoint", cfg)
}
