use std::f64::consts::TAU;

use rand::Rng;

use crate::agent::config::AgentConfig;
use crate::agent::encoding::{apply_action, encode_state, Layout};
use crate::agent::learner::{select_action, Agent};
use crate::agent::metrics::{smooth, RunningEvaluation};
use crate::agent::replay::{Experience, ReplayBuffer};
use crate::channel::{ChannelRealization, LongTermCsi};
use crate::cmat::{CMatrix, C64};
use crate::error::{Error, Result};
use crate::nn::Mlp;
use crate::rate::{ergodic_min_rate, RateReport, TxConfig};
use crate::rng::{derive_seed, substream};

const STREAM_INIT: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_REPLAY: u64 = 3;
const STREAM_RESET: u64 = 4;
const STREAM_EXTRACT_RESET: u64 = 5;
const LABEL_EXTRACT_MC: u64 = 6;

/// The offline training environment: long-term statistics, the offline
/// realizations and the link budget.
#[derive(Debug, Clone, Copy)]
pub struct Environment<'a> {
    pub csi: &'a LongTermCsi,
    pub dataset: &'a [ChannelRealization],
    pub sigma2: f64,
    pub max_power: f64,
}

impl<'a> Environment<'a> {
    pub fn new(csi: &'a LongTermCsi, dataset: &'a [ChannelRealization], sigma2: f64, max_power: f64) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::Empty("training needs an offline dataset"));
        }
        let d = csi.dims();
        for real in dataset {
            real.check_dims(d.m, d.n, d.k)?;
        }
        if !(sigma2 > 0.0) || !(max_power > 0.0) {
            return Err(Error::Domain("noise power and power budget must be positive".into()));
        }
        Ok(Self {
            csi,
            dataset,
            sigma2,
            max_power,
        })
    }

    pub fn layout(&self) -> Layout {
        let d = self.csi.dims();
        Layout { m: d.m, n: d.n, k: d.k }
    }

    /// Realization used at 0-based step `step`, cycling over the dataset.
    pub fn realization(&self, step: usize) -> &ChannelRealization {
        &self.dataset[step % self.dataset.len()]
    }

    /// Episode start: uniform random phases and an equal-amplitude precoder
    /// at full power.
    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> TxConfig {
        let Layout { m, n, k } = self.layout();
        let amp = (self.max_power / (m * k) as f64).sqrt();
        TxConfig {
            precoder: CMatrix::from_fn(m, k, |_, _| C64::new(amp, 0.0)),
            phase_angles: (0..n).map(|_| TAU * rng.random::<f64>()).collect(),
            max_power: self.max_power,
        }
    }
}

/// One row of the per-step training log.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub episode: usize,
    /// 1-based step inside the episode.
    pub step: usize,
    pub reward: f64,
    /// Running min-of-means reward inside the episode.
    pub evaluation_reward: f64,
    /// Smoothed reward over the whole run.
    pub smoothed_reward: f64,
    pub critic_loss: Option<f64>,
    pub noise_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub episode: usize,
    pub mean_reward: f64,
    /// Evaluation reward at the last step of the episode.
    pub evaluation_reward: f64,
    /// Smoothed `mean_reward` series.
    pub smoothed: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub agent: Agent,
    pub steps: Vec<StepRecord>,
    pub episodes: Vec<EpisodeSummary>,
    /// Configuration deployed for every future coherence interval.
    pub deployed: TxConfig,
    /// Monte-Carlo ergodic minimum rate of `deployed`.
    pub deployed_ergodic_min_rate: f64,
    pub updates: usize,
}

/// Runs the full training loop and extracts the deployed configuration.
pub fn train(env: &Environment<'_>, config: &AgentConfig, seed: u64) -> Result<TrainingOutcome> {
    train_with_observer(env, config, seed, |_, _| Ok(()))
}

/// As [`train`], calling `observer` with every step's record and the
/// configuration produced by that step's action.
pub fn train_with_observer<F>(env: &Environment<'_>, config: &AgentConfig, seed: u64, mut observer: F) -> Result<TrainingOutcome>
where
    F: FnMut(&StepRecord, &TxConfig) -> Result<()>,
{
    config.validate()?;
    let layout = env.layout();
    let mut agent = Agent::new(layout, config.clone(), &mut substream(seed, STREAM_INIT))?;
    let mut noise_rng = substream(seed, STREAM_NOISE);
    let mut replay_rng = substream(seed, STREAM_REPLAY);
    let mut reset_rng = substream(seed, STREAM_RESET);
    let mut replay = ReplayBuffer::new(config.replay_capacity)?;
    let steps_per_episode = config.steps_per_episode.unwrap_or(env.dataset.len());

    let mut noise_scale = config.noise_scale;
    let mut steps = Vec::with_capacity(config.episodes * steps_per_episode);
    let mut updates = 0;
    for episode in 1..=config.episodes {
        let mut tx = env.reset(&mut reset_rng);
        let mut running = RunningEvaluation::default();
        let mut state = encode_state(&tx, env.realization(0))?;
        for step in 0..steps_per_episode {
            let action = select_action(&agent.actor, &state, noise_scale, &mut noise_rng)?;
            let next_tx = apply_action(&tx, &action)?;
            let report = RateReport::evaluate(env.realization(step), &next_tx, env.sigma2)?;
            running.push(&report.per_user_rate)?;
            let next_state = encode_state(&next_tx, env.realization(step + 1))?;
            replay.push(Experience {
                state,
                action,
                reward: report.min_rate,
                next_state: next_state.clone(),
            });

            let critic_loss = if replay.len() >= config.learning_start.max(config.batch_size) {
                let batch = replay.sample(config.batch_size, &mut replay_rng)?;
                updates += 1;
                Some(agent.learn(&batch)?)
            } else {
                None
            };

            let record = StepRecord {
                episode,
                step: step + 1,
                reward: report.min_rate,
                evaluation_reward: running.value().unwrap_or(0.0),
                smoothed_reward: f64::NAN,
                critic_loss,
                noise_scale,
            };
            observer(&record, &next_tx)?;
            steps.push(record);

            noise_scale *= config.noise_decay;
            tx = next_tx;
            state = next_state;
        }
    }

    let rewards: Vec<f64> = steps.iter().map(|r| r.reward).collect();
    for (record, s) in steps.iter_mut().zip(smooth(&rewards, config.smoothing_weight)?) {
        record.smoothed_reward = s;
    }
    let episodes = summarize_episodes(&steps, config.smoothing_weight)?;

    let (deployed, deployed_ergodic_min_rate) =
        extract_deployed_config(&agent.actor, env, config.extraction_samples, seed)?;
    Ok(TrainingOutcome {
        agent,
        steps,
        episodes,
        deployed,
        deployed_ergodic_min_rate,
        updates,
    })
}

fn summarize_episodes(steps: &[StepRecord], weight: f64) -> Result<Vec<EpisodeSummary>> {
    let mut out: Vec<EpisodeSummary> = Vec::new();
    let mut count = 0usize;
    for r in steps {
        match out.last_mut() {
            Some(last) if last.episode == r.episode => {
                last.mean_reward += r.reward;
                last.evaluation_reward = r.evaluation_reward;
                count += 1;
            }
            _ => {
                if let Some(last) = out.last_mut() {
                    last.mean_reward /= count as f64;
                }
                out.push(EpisodeSummary {
                    episode: r.episode,
                    mean_reward: r.reward,
                    evaluation_reward: r.evaluation_reward,
                    smoothed: f64::NAN,
                });
                count = 1;
            }
        }
    }
    if let Some(last) = out.last_mut() {
        last.mean_reward /= count as f64;
    }
    let means: Vec<f64> = out.iter().map(|e| e.mean_reward).collect();
    for (e, s) in out.iter_mut().zip(smooth(&means, weight)?) {
        e.smoothed = s;
    }
    Ok(out)
}

/// Runs the actor without noise for one pass over the dataset and keeps the
/// visited configuration with the best Monte-Carlo ergodic minimum rate.
pub fn extract_deployed_config(actor: &Mlp, env: &Environment<'_>, samples: usize, seed: u64) -> Result<(TxConfig, f64)> {
    let mut rng = substream(seed, STREAM_EXTRACT_RESET);
    let mc_seed = derive_seed(seed, LABEL_EXTRACT_MC);
    let mut tx = env.reset(&mut rng);
    let mut best: Option<(TxConfig, f64)> = None;
    for step in 0..env.dataset.len() {
        let state = encode_state(&tx, env.realization(step))?;
        let action = actor.predict(&state)?;
        let action: Vec<f64> = action.into_iter().map(|a| a.clamp(-1.0, 1.0)).collect();
        tx = apply_action(&tx, &action)?;
        let value = ergodic_min_rate(env.csi, &tx, env.sigma2, samples, mc_seed)?;
        if best.as_ref().is_none_or(|(_, v)| value > *v) {
            best = Some((tx.clone(), value));
        }
    }
    best.ok_or(Error::Empty("extraction over an empty dataset"))
}
