//! Monte Carlo scenario runner.
//!
//! Trial `i` draws everything from stream `(seed, i)` and simulates one
//! idle and one busy round, so every trial contributes to both `Q_FA` and
//! `Q_D`. Tallies are integers, so results do not depend on worker count.

use crate::attacks::{apply_attack, AttackProfile};
use crate::defense::{screen_round_capped, DefenseConfig};
use crate::error::Result;
use crate::fusion::{majority, per_sensor_probability_for_majority, MetricsTally, RoundOutcome, TrialMetrics};
use crate::outlier::{Critical, CriticalValueTable};
use crate::rng::{stream, Domain};
use crate::signal::{local_decision, simulate_report, threshold_for_pd, ChannelParams, Hypothesis};

use super::config::{OperatingMode, ScenarioConfig};

const CHUNK: u64 = 256;

/// One row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    /// SNR in dB for `target_qd` runs, threshold for threshold sweeps.
    pub value: f64,
    pub metrics: TrialMetrics,
}

#[derive(Debug, Clone, Copy)]
enum Threshold<'a> {
    Fixed(f64),
    /// Indexed by the number of retained sensors.
    ByRetained(&'a [f64]),
}

struct PointSetup<'a> {
    config: &'a ScenarioConfig,
    params: ChannelParams,
    profile: Option<AttackProfile>,
    defense: DefenseConfig,
    critical: Critical<'a>,
    threshold: Threshold<'a>,
}

impl PointSetup<'_> {
    fn trial(&self, i: u64) -> Result<MetricsTally> {
        let mut rng = stream(self.config.seed, Domain::Trial, i);
        let mut tally = MetricsTally::default();
        let n = self.config.sensors;
        let malicious = self.profile.as_ref().map_or(&[][..], |p| p.malicious_indices());
        for (k, truth) in [Hypothesis::Absent, Hypothesis::Present].into_iter().enumerate() {
            let honest = simulate_report(&self.params, truth, n, 2 * i + k as u64, &mut rng);
            let report = match &self.profile {
                Some(p) => apply_attack(&honest, p, &mut rng)?,
                None => honest,
            };
            let outcome = screen_round_capped(&report.energies, &self.defense, &self.critical, malicious.len())?;
            let mut excluded = vec![false; n];
            for &s in &outcome.excluded {
                excluded[s] = true;
            }
            let mut retained: Vec<f64> = (0..n).filter(|&s| !excluded[s]).map(|s| report.energies[s]).collect();
            let mut dropped = &outcome.excluded[..];
            if retained.is_empty() {
                retained = report.energies.clone();
                dropped = &[];
            }
            let lambda = match self.threshold {
                Threshold::Fixed(l) => l,
                Threshold::ByRetained(table) => table[retained.len()],
            };
            let decisions: Vec<Hypothesis> = retained.iter().map(|&e| local_decision(e, lambda)).collect();
            tally.record(RoundOutcome {
                decision: majority(&decisions)?,
                truth,
                excluded: dropped,
                malicious,
                sensors: n,
                estimated_t: outcome.estimated_t,
            });
        }
        Ok(tally)
    }

    fn run(&self, workers: usize) -> Result<MetricsTally> {
        let trials = self.config.trials;
        let chunks: Vec<(u64, u64)> = (0..trials.div_ceil(CHUNK))
            .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(trials)))
            .collect();
        let chunk = |&(lo, hi): &(u64, u64)| -> Result<MetricsTally> {
            (lo..hi).try_fold(MetricsTally::default(), |acc, i| Ok(acc.merge(self.trial(i)?)))
        };
        let partials: Vec<Result<MetricsTally>> = run_chunks(&chunks, workers, chunk)?;
        partials
            .into_iter()
            .try_fold(MetricsTally::default(), |acc, p| Ok(acc.merge(p?)))
    }
}

#[cfg(feature = "parallel")]
fn run_chunks<F>(chunks: &[(u64, u64)], workers: usize, f: F) -> Result<Vec<Result<MetricsTally>>>
where
    F: Fn(&(u64, u64)) -> Result<MetricsTally> + Sync + Send,
{
    use rayon::prelude::*;
    if workers <= 1 {
        return Ok(chunks.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::error::Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| chunks.par_iter().map(f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn run_chunks<F>(chunks: &[(u64, u64)], _workers: usize, f: F) -> Result<Vec<Result<MetricsTally>>>
where
    F: Fn(&(u64, u64)) -> Result<MetricsTally>,
{
    Ok(chunks.iter().map(f).collect())
}

/// Fixed coalition for the whole scenario, drawn from the scenario stream.
pub fn scenario_profile(config: &ScenarioConfig) -> Result<Option<AttackProfile>> {
    let Some(kind) = config.attack.kind() else {
        return Ok(None);
    };
    let mut rng = stream(config.seed, Domain::Scenario, 0);
    let profile = AttackProfile::random_coalition(kind, config.sensors, config.malicious, &mut rng)?
        .with_offset_db(config.offset_db)?
        .with_extreme_offset_db(config.extreme_offset_db)?
        .with_attack_probability(config.attack_probability)?;
    Ok(Some(profile))
}

/// Thresholds reaching `target` global detection with `k` honest sensors,
/// for `k = 0..=n` (entry 0 unused).
pub fn detection_thresholds(params: &ChannelParams, n: usize, target: f64) -> Result<Vec<f64>> {
    let mut out = vec![f64::NAN];
    for k in 1..=n {
        let p = per_sensor_probability_for_majority(k, target)?;
        out.push(threshold_for_pd(p, params)?);
    }
    Ok(out)
}

/// Runs a single sweep point.
pub fn run_point(
    config: &ScenarioConfig,
    snr_db: f64,
    threshold: Option<f64>,
    table: &CriticalValueTable,
    workers: usize,
) -> Result<TrialMetrics> {
    config.validate()?;
    let params = ChannelParams::with_snr_db(config.noise_variance, snr_db, config.samples)?;
    let by_retained;
    let threshold = match threshold {
        Some(l) => Threshold::Fixed(l),
        None => {
            by_retained = detection_thresholds(&params, config.sensors, config.target_qd)?;
            Threshold::ByRetained(&by_retained)
        }
    };
    let setup = PointSetup {
        config,
        params,
        profile: scenario_profile(config)?,
        defense: config.defense(),
        critical: table.at(config.alpha),
        threshold,
    };
    Ok(setup.run(workers)?.metrics(config.trials))
}

/// Runs every sweep point of `config`: SNRs for `target_qd`, thresholds
/// (at the first SNR) for `threshold_sweep`.
pub fn run_scenario(config: &ScenarioConfig, table: &CriticalValueTable, workers: usize) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    match config.operating_point {
        OperatingMode::TargetQd => config
            .snr_db
            .iter()
            .map(|&snr| {
                Ok(SweepPoint {
                    value: snr,
                    metrics: run_point(config, snr, None, table, workers)?,
                })
            })
            .collect(),
        OperatingMode::ThresholdSweep => config
            .thresholds
            .iter()
            .map(|&l| {
                Ok(SweepPoint {
                    value: l,
                    metrics: run_point(config, config.snr_db[0], Some(l), table, workers)?,
                })
            })
            .collect(),
    }
}

/// Loads nothing, builds whatever `config` needs into `table`.
pub fn prepare_table(config: &ScenarioConfig, table: &mut CriticalValueTable) -> Result<bool> {
    let mut built = false;
    for spec in config.table_specs() {
        built |= table.ensure(&spec)?;
    }
    Ok(built)
}
