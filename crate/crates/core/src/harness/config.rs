//! Scenario description, read from a TOML key-value file.
//!
//! ```toml
//! sensors = 20              # N (alias `n`)
//! malicious = 4             # L (alias `l`)
//! samples = 10000           # M (alias `m`)
//! noise_variance = 1.0
//! snr_db = -20.0            # or a list to sweep
//! attack = "always_yes"     # none | always_yes | always_no | random | statistical | cooperative_masking
//! offset_db = 0.5
//! extreme_offset_db = 6.5
//! attack_probability = 0.5
//! test = "tm"               # none | tm | sw | box_plot | mad
//! direction = "upper"       # upper | lower | bidirectional
//! estimator = "kmeans"      # kmeans | largest_gap | mlg | known
//! alpha = 0.05
//! trials = 10000
//! seed = 1
//! operating_point = "target_qd"   # or "threshold_sweep" with `thresholds = [...]`
//! target_qd = 0.99
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attacks::{AttackKind, DEFAULT_EXTREME_OFFSET_DB, DEFAULT_OFFSET_DB};
use crate::defense::{Defense, DefenseConfig, Estimator};
use crate::error::{Error, Result};
use crate::outlier::{Direction, TableSpec, TestKind, DEFAULT_FENCE, DEFAULT_MAD_CUTOFF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackSetting {
    None,
    AlwaysYes,
    AlwaysNo,
    Random,
    Statistical,
    CooperativeMasking,
}

impl AttackSetting {
    pub fn kind(self) -> Option<AttackKind> {
        match self {
            AttackSetting::None => None,
            AttackSetting::AlwaysYes => Some(AttackKind::AlwaysYes),
            AttackSetting::AlwaysNo => Some(AttackKind::AlwaysNo),
            AttackSetting::Random => Some(AttackKind::Random),
            AttackSetting::Statistical => Some(AttackKind::Statistical),
            AttackSetting::CooperativeMasking => Some(AttackKind::CooperativeMasking),
        }
    }
}

/// Which fusion threshold each sweep point uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatingMode {
    /// Sweep SNR; the threshold is set so honest majority fusion over the
    /// retained sensors reaches `target_qd`.
    TargetQd,
    /// Sweep the energy threshold at the first SNR (ROC trace).
    ThresholdSweep,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl From<OneOrMany> for Vec<f64> {
    fn from(v: OneOrMany) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

fn one_or_many<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    OneOrMany::deserialize(d).map(Into::into)
}

fn d_sensors() -> usize {
    20
}
fn d_malicious() -> usize {
    4
}
fn d_samples() -> usize {
    10_000
}
fn d_noise() -> f64 {
    1.0
}
fn d_snr() -> Vec<f64> {
    vec![-20.0]
}
fn d_offset() -> f64 {
    DEFAULT_OFFSET_DB
}
fn d_extreme() -> f64 {
    DEFAULT_EXTREME_OFFSET_DB
}
fn d_attack_p() -> f64 {
    0.5
}
fn d_alpha() -> f64 {
    0.05
}
fn d_trials() -> u64 {
    10_000
}
fn d_seed() -> u64 {
    1
}
fn d_target() -> f64 {
    0.99
}
fn d_fence() -> f64 {
    DEFAULT_FENCE
}
fn d_mad() -> f64 {
    DEFAULT_MAD_CUTOFF
}
fn d_table_reps() -> u64 {
    100_000
}
fn d_table_seed() -> u64 {
    20_140_601
}
fn d_attack() -> AttackSetting {
    AttackSetting::AlwaysYes
}
fn d_test() -> Defense {
    Defense::Tm
}
fn d_direction() -> Direction {
    Direction::Upper
}
fn d_estimator() -> Estimator {
    Estimator::KMeans
}
fn d_mode() -> OperatingMode {
    OperatingMode::TargetQd
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "d_sensors", alias = "n")]
    pub sensors: usize,
    #[serde(default = "d_malicious", alias = "l")]
    pub malicious: usize,
    #[serde(default = "d_samples", alias = "m")]
    pub samples: usize,
    #[serde(default = "d_noise")]
    pub noise_variance: f64,
    #[serde(default = "d_snr", deserialize_with = "one_or_many")]
    pub snr_db: Vec<f64>,
    #[serde(default = "d_attack")]
    pub attack: AttackSetting,
    #[serde(default = "d_offset")]
    pub offset_db: f64,
    #[serde(default = "d_extreme")]
    pub extreme_offset_db: f64,
    #[serde(default = "d_attack_p")]
    pub attack_probability: f64,
    #[serde(default = "d_test")]
    pub test: Defense,
    #[serde(default = "d_direction")]
    pub direction: Direction,
    #[serde(default = "d_estimator")]
    pub estimator: Estimator,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_trials")]
    pub trials: u64,
    #[serde(default = "d_seed")]
    pub seed: u64,
    #[serde(default = "d_mode")]
    pub operating_point: OperatingMode,
    #[serde(default = "d_target")]
    pub target_qd: f64,
    #[serde(default)]
    pub thresholds: Vec<f64>,
    #[serde(default = "d_fence")]
    pub fence: f64,
    #[serde(default = "d_mad")]
    pub mad_cutoff: f64,
    #[serde(default = "d_table_reps")]
    pub table_replications: u64,
    #[serde(default = "d_table_seed")]
    pub table_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.sensors < 4 {
            return bad(format!("need at least 4 sensors, got {}", self.sensors));
        }
        if self.attack != AttackSetting::None && 2 * self.malicious >= self.sensors {
            return bad(format!(
                "malicious count {} must be below the honest count {}",
                self.malicious,
                self.sensors - self.malicious
            ));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.snr_db.is_empty() {
            return bad("snr_db must list at least one value".into());
        }
        if !(0.0..=1.0).contains(&self.attack_probability) {
            return bad(format!(
                "attack_probability must lie in [0, 1], got {}",
                self.attack_probability
            ));
        }
        match self.operating_point {
            OperatingMode::TargetQd if !(self.target_qd > 0.0 && self.target_qd < 1.0) => {
                return bad(format!("target_qd must lie in (0, 1), got {}", self.target_qd));
            }
            OperatingMode::ThresholdSweep if self.thresholds.is_empty() => {
                return bad("threshold_sweep needs a non-empty `thresholds` list".into());
            }
            _ => {}
        }
        if self.test == Defense::Sw && self.sensors > crate::outlier::SW_MAX_N {
            return bad(format!(
                "Shapiro-Wilk supports at most {} sensors",
                crate::outlier::SW_MAX_N
            ));
        }
        let half_gap = self.estimator == Estimator::Mlg
            || (self.estimator == Estimator::LargestGap && self.direction == Direction::Bidirectional);
        if let (true, Some(test)) = (half_gap, self.test.block_test()) {
            let need = TestKind::half_gap(test).min_n();
            if self.sensors < need {
                return bad(format!("{:?} needs at least {need} sensors", self.estimator));
            }
        }
        Ok(())
    }

    pub fn defense(&self) -> DefenseConfig {
        DefenseConfig {
            defense: self.test,
            direction: self.direction,
            estimator: self.estimator,
            fence: self.fence,
            mad_cutoff: self.mad_cutoff,
        }
    }

    /// Malicious sensors actually present.
    pub fn coalition_size(&self) -> usize {
        if self.attack == AttackSetting::None {
            0
        } else {
            self.malicious
        }
    }

    /// Critical-value cells this scenario can touch.
    pub fn table_specs(&self) -> Vec<TableSpec> {
        if self.test.block_test().is_none() {
            return Vec::new();
        }
        vec![
            TableSpec {
                kinds: TestKind::FIXED.to_vec(),
                n_min: self.sensors,
                n_max: self.sensors,
                alpha: self.alpha,
                replications: self.table_replications,
                seed: self.table_seed,
            },
            TableSpec {
                kinds: TestKind::HALF_GAP.to_vec(),
                n_min: TestKind::TmHalfGap.min_n(),
                n_max: self.sensors,
                alpha: self.alpha,
                replications: self.table_replications,
                seed: self.table_seed,
            },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_setup() {
        let c = ScenarioConfig::default();
        assert_eq!((c.sensors, c.malicious, c.samples), (20, 4, 10_000));
        assert_eq!(c.noise_variance, 1.0);
        assert_eq!(c.offset_db, 0.5);
        assert_eq!(c.extreme_offset_db, 6.5);
        assert_eq!(c.alpha, 0.05);
        assert_eq!(c.trials, 10_000);
        c.validate().unwrap();
    }

    #[test]
    fn parses_aliases_and_lists() {
        let c = ScenarioConfig::parse(
            r#"
            n = 12
            l = 2
            snr_db = [-20.0, -15.0]
            attack = "cooperative_masking"
            test = "sw"
            estimator = "clustering"
            operating_point = "threshold_sweep"
            thresholds = [0.99, 1.0, 1.01]
            "#,
        )
        .unwrap();
        assert_eq!(c.sensors, 12);
        assert_eq!(c.malicious, 2);
        assert_eq!(c.snr_db, vec![-20.0, -15.0]);
        assert_eq!(c.estimator, Estimator::KMeans);
        assert_eq!(c.attack.kind(), Some(AttackKind::CooperativeMasking));
        let single = ScenarioConfig::parse("snr_db = -10.0").unwrap();
        assert_eq!(single.snr_db, vec![-10.0]);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ScenarioConfig::parse("n = 8\nl = 4").is_err());
        assert!(ScenarioConfig::parse("trials = 0").is_err());
        assert!(ScenarioConfig::parse("operating_point = \"threshold_sweep\"").is_err());
        assert!(ScenarioConfig::parse("bogus_key = 1").is_err());
        assert!(ScenarioConfig::parse("alpha = 1.5").is_err());
        // L is irrelevant without an attack
        assert!(ScenarioConfig::parse("n = 8\nl = 4\nattack = \"none\"").is_ok());
    }
}
