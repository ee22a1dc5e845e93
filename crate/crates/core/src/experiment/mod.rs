//! Configuration, seeding and the experiment runners with their CSV output.

mod config;
mod runs;
mod scenario;

pub use config::{default_paper_config, ExperimentConfig, RunConfig, ScenarioConfig, SweepConfig};
pub use runs::{
    eval_checkpoint, run_complexity, run_convergence, run_rate_vs_elements, run_sweep, run_sweep_point,
    write_complexity, write_convergence, write_eval, write_manifest, write_rate_sweep, CheckpointEval,
    ComplexityRow, ConvergenceRun, DdpgDesigner, RateRow, SweepPoint, ACTOR_FILE, COMPLEXITY_FILE,
    CONVERGENCE_FILE, CRITIC_FILE, EVAL_FILE, MANIFEST_FILE, RATE_SWEEP_FILE, TRAINING_LOG_FILE,
};
pub use scenario::{Scenario, Seeds};
