use serde::{Deserialize, Serialize};

use crate::channel::{generate_offline_dataset, noise_power, ChannelRealization, LongTermCsi, ScenarioGeometry};
use crate::error::Result;
use crate::experiment::config::{ExperimentConfig, ScenarioConfig};
use crate::rng::{derive_seed, substream};

const LABEL_SCENARIO: u64 = 0x5ce;
const LABEL_TRAINING: u64 = 0x7a1;
const STREAM_GEOMETRY: u64 = 1;
const STREAM_ANGLES: u64 = 2;

/// Every seed of a run, derived from the master seed.
///
/// The scenario seed fixes user positions and angles. The training seed
/// and its children drive NLoS draws, network init, noise and replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub scenario: u64,
    pub training: u64,
    pub dataset: u64,
    pub agent: u64,
    pub baseline: u64,
    pub evaluation: u64,
    pub monte_carlo: u64,
}

impl Seeds {
    pub fn new(master: u64, scenario_override: Option<u64>) -> Self {
        let training = derive_seed(master, LABEL_TRAINING);
        Self {
            master,
            scenario: scenario_override.unwrap_or_else(|| derive_seed(master, LABEL_SCENARIO)),
            training,
            dataset: derive_seed(training, 1),
            agent: derive_seed(training, 2),
            baseline: derive_seed(training, 3),
            evaluation: derive_seed(training, 4),
            monte_carlo: derive_seed(training, 5),
        }
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self::new(cfg.run.seed, cfg.run.scenario_seed)
    }
}

/// A built scenario: the physical drop and its long-term statistics.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub geometry: ScenarioGeometry,
    pub csi: LongTermCsi,
    pub sigma2: f64,
}

impl Scenario {
    /// User positions and angles depend only on `scenario_seed` and `K`,
    /// never on `M` or `N`.
    pub fn build(config: &ScenarioConfig, scenario_seed: u64) -> Result<Self> {
        config.validate()?;
        let geometry = ScenarioGeometry::generate(
            config.bs_position,
            config.ris_position,
            config.user_disk_center,
            config.user_disk_radius,
            config.k,
            &mut substream(scenario_seed, STREAM_GEOMETRY),
        )?;
        let csi = LongTermCsi::from_geometry(
            config.dims(),
            &geometry,
            &config.path_loss,
            config.rician(),
            &mut substream(scenario_seed, STREAM_ANGLES),
        )?;
        Ok(Self {
            config: config.clone(),
            geometry,
            csi,
            sigma2: noise_power(&config.path_loss),
        })
    }

    /// `T` realizations drawn with `seed`.
    pub fn dataset(&self, seed: u64) -> Result<Vec<ChannelRealization>> {
        generate_offline_dataset(&self.csi, self.config.intervals, seed)
    }
}
