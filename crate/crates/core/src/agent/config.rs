use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters of the learner and of its training loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    /// Discount factor.
    pub gamma: f64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Target-network tracking rate.
    pub soft_update_rate: f64,
    /// Initial standard deviation of the Gaussian exploration noise.
    pub noise_scale: f64,
    /// Per-step multiplicative decay of the noise scale.
    pub noise_decay: f64,
    /// Steps per episode; `None` means one pass over the offline dataset.
    pub steps_per_episode: Option<usize>,
    /// Stored experiences required before updates begin.
    pub learning_start: usize,
    pub episodes: usize,
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub actor_learning_rate: f64,
    pub critic_learning_rate: f64,
    /// Factor applied to the initial actor output layer.
    pub actor_output_scale: f64,
    /// Weight of the exponential smoothing applied to logged rewards.
    pub smoothing_weight: f64,
    /// Monte-Carlo samples used to rank candidate configurations at the end of training.
    pub extraction_samples: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            replay_capacity: 100_000,
            batch_size: 64,
            soft_update_rate: 0.005,
            noise_scale: 0.1,
            noise_decay: 0.9995,
            steps_per_episode: None,
            learning_start: 1000,
            episodes: 300,
            actor_hidden: vec![256, 256],
            critic_hidden: vec![256, 256],
            actor_learning_rate: 1e-4,
            critic_learning_rate: 1e-3,
            actor_output_scale: 1e-3,
            smoothing_weight: 0.9,
            extraction_samples: 1000,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(0.0..=1.0).contains(&self.gamma) {
            return fail(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        if self.batch_size == 0 || self.replay_capacity == 0 {
            return fail("replay capacity and batch size must be positive".into());
        }
        if self.batch_size > self.replay_capacity {
            return fail(format!(
                "batch size {} exceeds replay capacity {}",
                self.batch_size, self.replay_capacity
            ));
        }
        if !(self.soft_update_rate > 0.0 && self.soft_update_rate <= 1.0) {
            return fail(format!("soft-update rate must lie in (0, 1], got {}", self.soft_update_rate));
        }
        if !(self.noise_scale >= 0.0) {
            return fail(format!("noise scale must be nonnegative, got {}", self.noise_scale));
        }
        if !(self.noise_decay > 0.0 && self.noise_decay <= 1.0) {
            return fail(format!("noise decay must lie in (0, 1], got {}", self.noise_decay));
        }
        if self.steps_per_episode == Some(0) || self.episodes == 0 {
            return fail("episodes and steps per episode must be positive".into());
        }
        if self.actor_hidden.contains(&0) || self.critic_hidden.contains(&0) {
            return fail("hidden layer sizes must be positive".into());
        }
        if !(self.actor_learning_rate > 0.0 && self.critic_learning_rate > 0.0) {
            return fail("learning rates must be positive".into());
        }
        if !(0.0..1.0).contains(&self.smoothing_weight) {
            return fail(format!("smoothing weight must lie in [0, 1), got {}", self.smoothing_weight));
        }
        if self.extraction_samples == 0 {
            return fail("extraction needs at least one Monte-Carlo sample".into());
        }
        Ok(())
    }
}
