//! Topology generation, scenarios and Monte Carlo orchestration.

mod runner;
mod scenario;
mod topology;

pub use runner::{
    count_symbol_errors, point_config, rank_relays, run_baseline, run_scenario, stream_id, substream, Arm, RunResult,
    SerArm, SerRecord, TrialRecord,
};
pub use scenario::{Scenario, ScenarioKind, DEFAULT_RADIO_RANGE, DEFAULT_SNR_DB, SCENARIO_KEYS};
pub use topology::{
    expected_degree, gen_random_topology, gen_relay_topology, gen_void_topology, side_for_degree, Placement,
    RandomTopology, MAX_RESAMPLES,
};
