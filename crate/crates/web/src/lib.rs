//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every entry point takes a scenario in the same TOML format as the CLI
//! and returns JSON (or CSV for sweeps). Critical values are built on first
//! use and kept for the lifetime of the page.

use std::cell::RefCell;

use serde::Serialize;
use wasm_bindgen::prelude::*;

use ssdf_core::attacks::apply_attack;
use ssdf_core::defense::{screen_round_capped, Defense, Estimator};
use ssdf_core::estimators::{mlg_lower, mlg_upper, MlgOutcome};
use ssdf_core::fusion::majority;
use ssdf_core::harness::{
    detection_thresholds, prepare_table, run_scenario, scenario_profile, write_csv, ScenarioConfig,
};
use ssdf_core::outlier::{BlockTest, CriticalValueTable, Direction};
use ssdf_core::rng::{stream, Domain};
use ssdf_core::signal::{local_decision, simulate_report, ChannelParams, Hypothesis};

thread_local! {
    static TABLE: RefCell<CriticalValueTable> = RefCell::new(CriticalValueTable::new());
}

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn with_table<T>(config: &ScenarioConfig, f: impl FnOnce(&CriticalValueTable) -> T) -> Result<T, JsError> {
    TABLE.with(|cell| {
        let mut table = cell.borrow_mut();
        prepare_table(config, &mut table).map_err(js)?;
        Ok(f(&table))
    })
}

#[derive(Serialize)]
pub struct RoundView {
    pub busy: bool,
    pub energies: Vec<f64>,
    pub malicious: Vec<usize>,
    pub excluded: Vec<usize>,
    pub estimated_t: usize,
    pub threshold: f64,
    pub decision_busy: bool,
}

#[derive(Serialize)]
pub struct TraceStep {
    pub sensors_left: usize,
    pub t: usize,
    pub statistic: f64,
    pub critical_value: f64,
    pub suspects: Vec<usize>,
    pub rejected: bool,
}

fn parse(config: &str) -> Result<ScenarioConfig, JsError> {
    ScenarioConfig::parse(config).map_err(js)
}

fn round_energies(config: &ScenarioConfig, round: u64, busy: bool) -> Result<(Vec<f64>, Vec<usize>), JsError> {
    let params = ChannelParams::with_snr_db(config.noise_variance, config.snr_db[0], config.samples).map_err(js)?;
    let truth = if busy { Hypothesis::Present } else { Hypothesis::Absent };
    let mut rng = stream(config.seed, Domain::Trial, round);
    let honest = simulate_report(&params, truth, config.sensors, round, &mut rng);
    match scenario_profile(config).map_err(js)? {
        Some(profile) => {
            let attacked = apply_attack(&honest, &profile, &mut rng).map_err(js)?;
            Ok((attacked.energies, profile.malicious_indices().to_vec()))
        }
        None => Ok((honest.energies, Vec::new())),
    }
}

/// One screening round: reports, true attackers, exclusions and the fused
/// decision at the target detection operating point.
#[wasm_bindgen]
pub fn screen_round_view(config: &str, round: u32, busy: bool) -> Result<String, JsError> {
    let config = parse(config)?;
    let (energies, malicious) = round_energies(&config, round as u64, busy)?;
    let outcome = with_table(&config, |table| {
        screen_round_capped(&energies, &config.defense(), &table.at(config.alpha), malicious.len())
    })?
    .map_err(js)?;
    let retained: Vec<f64> = (0..energies.len())
        .filter(|i| !outcome.excluded.contains(i))
        .map(|i| energies[i])
        .collect();
    let params = ChannelParams::with_snr_db(config.noise_variance, config.snr_db[0], config.samples).map_err(js)?;
    let threshold = detection_thresholds(&params, retained.len(), config.target_qd).map_err(js)?[retained.len()];
    let votes: Vec<Hypothesis> = retained.iter().map(|&e| local_decision(e, threshold)).collect();
    let view = RoundView {
        busy,
        energies,
        malicious,
        excluded: outcome.excluded,
        estimated_t: outcome.estimated_t,
        threshold,
        decision_busy: majority(&votes).map_err(js)?.is_present(),
    };
    serde_json::to_string(&view).map_err(js)
}

fn steps(outcome: &MlgOutcome) -> Vec<TraceStep> {
    outcome
        .rounds
        .iter()
        .map(|r| TraceStep {
            sensors_left: r.partition.sorted_data.len(),
            t: r.verdict.t,
            statistic: r.verdict.statistic,
            critical_value: r.verdict.critical_value,
            suspects: r.verdict.suspected_indices.clone(),
            rejected: r.verdict.is_outlier_block,
        })
        .collect()
}

/// Round-by-round trace of the modified largest-gap search on one round.
#[wasm_bindgen]
pub fn mlg_trace(config: &str, round: u32, busy: bool) -> Result<String, JsError> {
    let mut config = parse(config)?;
    config.estimator = Estimator::Mlg;
    let test = match config.test.block_test() {
        Some(test) => test,
        None => {
            config.test = Defense::Tm;
            BlockTest::Tm
        }
    };
    config.validate().map_err(js)?;
    let (energies, _) = round_energies(&config, round as u64, busy)?;
    let direction = config.direction;
    let out = with_table(&config, |table| {
        let critical = table.at(config.alpha);
        match direction {
            Direction::Lower => mlg_lower(&energies, test, &critical),
            _ => mlg_upper(&energies, test, &critical),
        }
    })?
    .map_err(js)?;
    serde_json::to_string(&steps(&out)).map_err(js)
}

/// Runs the scenario's sweep and returns it as CSV.
#[wasm_bindgen]
pub fn sweep_csv(config: &str) -> Result<String, JsError> {
    let config = parse(config)?;
    let points = with_table(&config, |table| run_scenario(&config, table, 1))?.map_err(js)?;
    let mut buf = Vec::new();
    write_csv(&points, config.seed, &mut buf).map_err(js)?;
    String::from_utf8(buf).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = "sensors = 20\nmalicious = 4\nattack = \"cooperative_masking\"\nestimator = \"mlg\"\ntrials = 200\ntable_replications = 20000\n";

    #[test]
    fn round_view_marks_attackers() {
        let json = screen_round_view(DEMO, 3, true).unwrap_or_else(|_| panic!("round view"));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["energies"].as_array().unwrap().len(), 20);
        assert_eq!(v["malicious"].as_array().unwrap().len(), 4);
        let mut excluded: Vec<u64> = v["excluded"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap())
            .collect();
        let mut malicious: Vec<u64> = v["malicious"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap())
            .collect();
        excluded.sort_unstable();
        malicious.sort_unstable();
        assert_eq!(excluded, malicious);
    }

    #[test]
    fn trace_has_two_rejections_under_masking() {
        let json = mlg_trace(DEMO, 0, false).unwrap_or_else(|_| panic!("trace"));
        let steps: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
        let rejected = steps.iter().filter(|s| s["rejected"].as_bool().unwrap()).count();
        assert_eq!(rejected, 2);
        assert_eq!(steps[0]["sensors_left"], 20);
    }

    #[test]
    fn sweep_returns_csv() {
        let csv = sweep_csv(&format!("{DEMO}snr_db = [-22.0, -20.0]\n")).unwrap_or_else(|_| panic!("sweep"));
        assert_eq!(csv.lines().count(), 3);
    }
}
