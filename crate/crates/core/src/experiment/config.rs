use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::baselines::LocalSearchConfig;
use crate::channel::{Dims, PathLossParams, Point3, RicianFactors};
use crate::error::{Error, Result};
use crate::rate::OverheadParams;

/// Physical scenario: geometry, array sizes, link budget and channel statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub bs_position: Point3,
    pub ris_position: Point3,
    pub user_disk_center: Point3,
    pub user_disk_radius: f64,
    /// BS antennas.
    pub m: usize,
    /// RIS elements.
    pub n: usize,
    /// Users.
    pub k: usize,
    /// BS-RIS propagation paths.
    pub paths: usize,
    /// Transmit power budget in watts.
    pub max_power: f64,
    pub rician_bs_ris: f64,
    pub rician_ris_user: f64,
    pub rician_bs_user: f64,
    /// Coherence intervals in the offline dataset.
    pub intervals: usize,
    /// Time slots per coherence interval.
    pub tau_c: usize,
    pub path_loss: PathLossParams,
}

impl ScenarioConfig {
    pub fn dims(&self) -> Dims {
        Dims {
            m: self.m,
            n: self.n,
            k: self.k,
            paths: self.paths,
        }
    }

    pub fn rician(&self) -> RicianFactors {
        RicianFactors::uniform(self.k, self.rician_bs_ris, self.rician_ris_user, self.rician_bs_user)
    }

    pub fn overhead(&self) -> OverheadParams {
        OverheadParams {
            tau_c: self.tau_c,
            k: self.k,
            n: self.n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dims().validate()?;
        self.path_loss.validate()?;
        if self.intervals == 0 {
            return Err(Error::Config("the number of coherence intervals must be positive".into()));
        }
        if self.tau_c == 0 {
            return Err(Error::Config("tau_c must be at least 1".into()));
        }
        if !(self.max_power > 0.0 && self.max_power.is_finite()) {
            return Err(Error::Config(format!("power budget must be positive, got {}", self.max_power)));
        }
        if !(self.user_disk_radius >= 0.0 && self.user_disk_radius.is_finite()) {
            return Err(Error::Config(format!("invalid user disk radius {}", self.user_disk_radius)));
        }
        let factors = [self.rician_bs_ris, self.rician_ris_user, self.rician_bs_user];
        if factors.iter().any(|f| !(*f >= 0.0)) {
            return Err(Error::Config("Rician factors must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Parameters of the element-count sweep. Unset overrides keep the scenario value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub k: Option<usize>,
    pub paths: Option<usize>,
    pub tau_c: Option<usize>,
    /// Training episodes per sweep point.
    pub episodes: Option<usize>,
}

impl SweepConfig {
    /// The scenario used at sweep point `n`.
    pub fn scenario_at(&self, base: &ScenarioConfig, n: usize) -> ScenarioConfig {
        let mut s = base.clone();
        s.n = n;
        s.k = self.k.unwrap_or(s.k);
        s.paths = self.paths.unwrap_or(s.paths);
        s.tau_c = self.tau_c.unwrap_or(s.tau_c);
        s
    }

    pub fn agent_at(&self, base: &AgentConfig) -> AgentConfig {
        let mut a = base.clone();
        a.episodes = self.episodes.unwrap_or(a.episodes);
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every random draw of a run derives from it.
    pub seed: u64,
    /// Overrides the scenario seed derived from `seed`.
    pub scenario_seed: Option<u64>,
    pub output_dir: PathBuf,
    /// Monte-Carlo samples for ergodic-rate evaluation.
    pub n_mc: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub agent: AgentConfig,
    pub baseline: LocalSearchConfig,
    pub sweep: SweepConfig,
    pub run: RunConfig,
}

/// Geometry, link budget and channel statistics of the reference deployment.
pub fn default_paper_config() -> ExperimentConfig {
    ExperimentConfig {
        scenario: ScenarioConfig {
            bs_position: [0.0, 0.0, 30.0],
            ris_position: [100.0, 20.0, 10.0],
            user_disk_center: [150.0, 0.0, 1.5],
            user_disk_radius: 20.0,
            m: 8,
            n: 80,
            k: 10,
            paths: 2,
            max_power: 1.0,
            rician_bs_ris: 2.2,
            rician_ris_user: 3.75,
            rician_bs_user: 2.2,
            intervals: 150,
            tau_c: 150,
            path_loss: PathLossParams::default(),
        },
        agent: AgentConfig {
            episodes: 1000,
            ..AgentConfig::default()
        },
        baseline: LocalSearchConfig::default(),
        sweep: SweepConfig {
            n_values: vec![10, 20, 30, 40, 50, 60, 70, 80],
            k: Some(4),
            paths: Some(1),
            tau_c: None,
            episodes: None,
        },
        run: RunConfig {
            seed: 1,
            scenario_seed: None,
            output_dir: PathBuf::from("out"),
            n_mc: 1000,
        },
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl ExperimentConfig {
    /// Reduced scenario and networks that train in minutes on one core.
    pub fn desk() -> Self {
        let mut cfg = default_paper_config();
        cfg.scenario.m = 4;
        cfg.scenario.n = 16;
        cfg.scenario.k = 4;
        cfg.agent.episodes = 300;
        cfg.agent.actor_hidden = vec![64, 64];
        cfg.agent.critic_hidden = vec![64, 64];
        cfg.sweep = SweepConfig {
            n_values: vec![4, 8, 16, 24, 32, 48],
            k: Some(4),
            paths: Some(1),
            tau_c: Some(60),
            episodes: Some(20),
        };
        cfg
    }

    pub fn paper() -> Self {
        default_paper_config()
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.agent.validate()?;
        self.baseline.validate()?;
        if self.sweep.n_values.is_empty() {
            return Err(Error::Config("the sweep needs at least one element count".into()));
        }
        for &n in &self.sweep.n_values {
            let s = self.sweep.scenario_at(&self.scenario, n);
            s.validate()?;
        }
        if self.sweep.episodes == Some(0) {
            return Err(Error::Config("sweep episodes must be positive".into()));
        }
        if self.run.n_mc == 0 {
            return Err(Error::Config("n_mc must be positive".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}
