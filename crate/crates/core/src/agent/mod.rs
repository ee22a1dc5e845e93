//! DDPG learner for a single long-term precoder and RIS configuration.

mod config;
mod encoding;
mod learner;
mod metrics;
mod replay;
mod train;

pub use config::AgentConfig;
pub use encoding::{action_dim, apply_action, encode_state, state_dim, DecodedState, Layout, PRECODER_FLOOR};
pub use learner::{actor_update, critic_update, policy_gradient, select_action, ActionValue, Agent};
pub use metrics::{evaluate_fixed_config, evaluation_reward, reward, smooth, RunningEvaluation};
pub use replay::{Experience, ReplayBuffer};
pub use train::{extract_deployed_config, train, train_with_observer, Environment, EpisodeSummary, StepRecord, TrainingOutcome};
