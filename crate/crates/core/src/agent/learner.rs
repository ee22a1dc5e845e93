use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::agent::config::AgentConfig;
use crate::agent::encoding::Layout;
use crate::agent::replay::Experience;
use crate::error::{ensure_len, Error, Result};
use crate::nn::{soft_update, Activation, Adam, AdamConfig, Gradients, Mlp};

/// A state-action value function that can report `dQ/da`.
pub trait ActionValue {
    fn value_and_action_gradient(&self, state: &[f64], action: &[f64]) -> Result<(f64, Vec<f64>)>;
}

fn concat(state: &[f64], action: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(state.len() + action.len());
    x.extend_from_slice(state);
    x.extend_from_slice(action);
    x
}

/// A critic network takes `[state, action]` and outputs one value.
impl ActionValue for Mlp {
    fn value_and_action_gradient(&self, state: &[f64], action: &[f64]) -> Result<(f64, Vec<f64>)> {
        ensure_len("critic output", 1, self.output_dim())?;
        let (q, cache) = self.forward(&concat(state, action))?;
        let input_grad = self.backward_input_only(&cache)?;
        Ok((q[0], input_grad[state.len()..].to_vec()))
    }
}

impl Mlp {
    fn backward_input_only(&self, cache: &crate::nn::ForwardCache) -> Result<Vec<f64>> {
        let mut scratch = Gradients::zeros_like(self);
        self.backward_accumulate(cache, &[1.0], &mut scratch)
    }
}

/// Actor output plus `N(0, noise_scale^2)` noise, clipped to `[-1, 1]`.
pub fn select_action<R: Rng + ?Sized>(actor: &Mlp, state: &[f64], noise_scale: f64, rng: &mut R) -> Result<Vec<f64>> {
    let mut action = actor.predict(state)?;
    if noise_scale > 0.0 {
        let noise = Normal::new(0.0, noise_scale).map_err(|e| Error::Domain(e.to_string()))?;
        for a in &mut action {
            *a += noise.sample(rng);
        }
    }
    for a in &mut action {
        *a = a.clamp(-1.0, 1.0);
    }
    Ok(action)
}

/// One regression step of the critic towards `r + gamma Q'(s', pi'(s'))`.
/// Returns the mean squared error before the step.
pub fn critic_update(
    critic: &mut Mlp,
    optimizer: &mut Adam,
    critic_target: &Mlp,
    actor_target: &Mlp,
    batch: &[&Experience],
    gamma: f64,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Empty("critic update needs a nonempty batch"));
    }
    let v = batch.len() as f64;
    let mut grads = Gradients::zeros_like(critic);
    let mut loss = 0.0;
    for e in batch {
        let next_action = actor_target.predict(&e.next_state)?;
        let bootstrap = if gamma == 0.0 {
            0.0
        } else {
            critic_target.predict(&concat(&e.next_state, &next_action))?[0]
        };
        let target = e.reward + gamma * bootstrap;
        let (q, cache) = critic.forward(&concat(&e.state, &e.action))?;
        let diff = q[0] - target;
        loss += diff * diff;
        critic.backward_accumulate(&cache, &[2.0 * diff / v], &mut grads)?;
    }
    loss /= v;
    if !loss.is_finite() {
        return Err(Error::NonFinite("critic loss".into()));
    }
    optimizer.step(critic, &grads)?;
    Ok(loss)
}

/// Gradient of `mean_i Q(s_i, pi(s_i))` with respect to the actor parameters,
/// and that mean.
pub fn policy_gradient<C: ActionValue + ?Sized>(actor: &Mlp, critic: &C, states: &[&[f64]]) -> Result<(Gradients, f64)> {
    if states.is_empty() {
        return Err(Error::Empty("policy gradient needs a nonempty batch"));
    }
    let v = states.len() as f64;
    let mut grads = Gradients::zeros_like(actor);
    let mut mean_q = 0.0;
    for s in states {
        let (action, cache) = actor.forward(s)?;
        let (q, dq_da) = critic.value_and_action_gradient(s, &action)?;
        mean_q += q / v;
        let upstream: Vec<f64> = dq_da.iter().map(|g| g / v).collect();
        actor.backward_accumulate(&cache, &upstream, &mut grads)?;
    }
    Ok((grads, mean_q))
}

/// One deterministic-policy-gradient ascent step; returns the gradient norm.
pub fn actor_update<C: ActionValue + ?Sized>(actor: &mut Mlp, optimizer: &mut Adam, critic: &C, states: &[&[f64]]) -> Result<f64> {
    let (mut grads, _) = policy_gradient(actor, critic, states)?;
    if !grads.is_finite() {
        return Err(Error::NonFinite("policy gradient".into()));
    }
    let norm = grads.norm();
    grads.scale(-1.0);
    optimizer.step(actor, &grads)?;
    Ok(norm)
}

/// Online and target networks with their optimizers.
#[derive(Debug, Clone)]
pub struct Agent {
    pub actor: Mlp,
    pub critic: Mlp,
    pub actor_target: Mlp,
    pub critic_target: Mlp,
    actor_optimizer: Adam,
    critic_optimizer: Adam,
    layout: Layout,
    config: AgentConfig,
}

impl Agent {
    pub fn new<R: Rng + ?Sized>(layout: Layout, config: AgentConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let (state_dim, action_dim) = (layout.state_dim(), layout.action_dim());
        let actor_dims: Vec<usize> = std::iter::once(state_dim)
            .chain(config.actor_hidden.iter().copied())
            .chain(std::iter::once(action_dim))
            .collect();
        let critic_dims: Vec<usize> = std::iter::once(state_dim + action_dim)
            .chain(config.critic_hidden.iter().copied())
            .chain(std::iter::once(1))
            .collect();
        let mut actor = Mlp::new(&actor_dims, Activation::Tanh, Activation::Tanh, rng)?;
        actor.scale_output_layer(config.actor_output_scale);
        let critic = Mlp::new(&critic_dims, Activation::Tanh, Activation::Identity, rng)?;
        Ok(Self::from_networks(layout, config, actor, critic))
    }

    /// Wraps existing networks; targets start as exact copies.
    pub fn from_networks(layout: Layout, config: AgentConfig, actor: Mlp, critic: Mlp) -> Self {
        let actor_optimizer = Adam::new(&actor, AdamConfig::with_learning_rate(config.actor_learning_rate));
        let critic_optimizer = Adam::new(&critic, AdamConfig::with_learning_rate(config.critic_learning_rate));
        Self {
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            actor_optimizer,
            critic_optimizer,
            layout,
            config,
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    /// Critic step, actor step and both soft target updates on one batch.
    /// Returns the critic loss.
    pub fn learn(&mut self, batch: &[&Experience]) -> Result<f64> {
        let loss = critic_update(
            &mut self.critic,
            &mut self.critic_optimizer,
            &self.critic_target,
            &self.actor_target,
            batch,
            self.config.gamma,
        )?;
        let states: Vec<&[f64]> = batch.iter().map(|e| e.state.as_slice()).collect();
        actor_update(&mut self.actor, &mut self.actor_optimizer, &self.critic, &states)?;
        soft_update(&mut self.actor_target, &self.actor, self.config.soft_update_rate)?;
        soft_update(&mut self.critic_target, &self.critic, self.config.soft_update_rate)?;
        Ok(loss)
    }
}
