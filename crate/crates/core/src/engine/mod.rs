//! Scenario configuration, Monte Carlo orchestration and result files.

mod config;
mod output;
mod run;
mod seeding;

pub use config::{AllocationOverride, ScenarioConfig};
pub use output::{write_outputs, Summary, CDF_PERCENTILES};
pub use run::{
    run_scenario, run_scenario_with, run_sweep, ConstantGain, MsResult, MultipathGain,
    RegimeFractions, RunMeta, RunOptions, RunResult, SweepEntry,
};
pub use seeding::{child_seed, link_stream, POSITION_STREAM};
