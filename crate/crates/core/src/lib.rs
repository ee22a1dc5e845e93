//! Long-term-CSI design of the BS precoder and RIS phase shifts for a
//! RIS-aided multiuser MISO downlink.
//!
//! The crate covers the Rician channel simulator ([`channel`]), rate and
//! pilot-overhead accounting ([`rate`]), a small dense-network engine
//! ([`nn`]), the DDPG learner ([`agent`]), comparison baselines
//! ([`baselines`]) and the experiment drivers ([`experiment`]).

pub mod agent;
pub mod baselines;
pub mod channel;
pub mod cmat;
pub mod error;
pub mod experiment;
pub mod nn;
pub mod rate;
pub mod rng;

pub use agent::{AgentConfig, Environment, TrainingOutcome};
pub use baselines::{compare_schemes, LocalSearchConfig, SchemeComparison};
pub use channel::{ChannelRealization, Dims, LongTermCsi, PathLossParams, ScenarioGeometry};
pub use cmat::{CMatrix, C64};
pub use error::{Error, Result};
pub use experiment::ExperimentConfig;
pub use nn::Mlp;
pub use rate::{OverheadParams, RateReport, TxConfig};
