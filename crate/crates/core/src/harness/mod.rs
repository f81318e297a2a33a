//! Scenario configuration, the Monte Carlo runner and CSV output.

mod config;
mod csv_out;
mod run;

pub use config::{AttackSetting, OperatingMode, ScenarioConfig};
pub use csv_out::{emit_csv, read_csv, write_csv, CSV_COLUMNS, UNDEFINED};
pub use run::{detection_thresholds, prepare_table, run_point, run_scenario, scenario_profile, SweepPoint};
