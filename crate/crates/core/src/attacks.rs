//! Spectrum sensing data falsification.
//!
//! Malicious sensors report their actually sensed energy scaled by a dB
//! offset. Offsets act multiplicatively on linear power.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{db_to_linear, EnergyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    /// Always push the report up.
    AlwaysYes,
    /// Always push the report down.
    AlwaysNo,
    /// Up or down with equal probability, each round.
    Random,
    /// Act as `Random` with some probability, otherwise stay honest.
    Statistical,
    /// Masking: part of the coalition reports extreme values so the rest,
    /// reporting mildly raised values, hide behind them.
    CooperativeMasking,
}

pub const DEFAULT_OFFSET_DB: f64 = 0.5;
pub const DEFAULT_EXTREME_OFFSET_DB: f64 = 6.5;

#[derive(Debug, Clone, PartialEq)]
pub struct AttackProfile {
    kind: AttackKind,
    sensors: usize,
    malicious: Vec<usize>,
    offset_db: f64,
    extreme_offset_db: f64,
    attack_probability: f64,
}

impl AttackProfile {
    /// `malicious` lists sensor indices; for masking, the first
    /// `ceil(L/2)` of them form the extreme subset.
    pub fn new(kind: AttackKind, sensors: usize, malicious: Vec<usize>) -> Result<Self> {
        let l = malicious.len();
        if 2 * l >= sensors && l > 0 {
            return Err(Error::InvalidParameter(format!(
                "malicious count {l} must be below the honest count {}",
                sensors - l
            )));
        }
        let distinct: BTreeSet<_> = malicious.iter().copied().collect();
        if distinct.len() != l {
            return Err(Error::InvalidParameter("duplicate malicious index".into()));
        }
        if let Some(&bad) = malicious.iter().find(|&&i| i >= sensors) {
            return Err(Error::InvalidParameter(format!(
                "malicious index {bad} out of range for {sensors} sensors"
            )));
        }
        Ok(Self {
            kind,
            sensors,
            malicious,
            offset_db: DEFAULT_OFFSET_DB,
            extreme_offset_db: DEFAULT_EXTREME_OFFSET_DB,
            attack_probability: 1.0,
        })
    }

    /// Picks `count` malicious sensors uniformly at random.
    pub fn random_coalition<R: Rng + ?Sized>(
        kind: AttackKind,
        sensors: usize,
        count: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if count > sensors {
            return Err(Error::InvalidParameter(format!(
                "cannot choose {count} of {sensors} sensors"
            )));
        }
        Self::new(kind, sensors, index::sample(rng, sensors, count).into_vec())
    }

    pub fn with_offset_db(mut self, db: f64) -> Result<Self> {
        if !db.is_finite() {
            return Err(Error::InvalidParameter("offset must be finite".into()));
        }
        self.offset_db = db;
        Ok(self)
    }

    pub fn with_extreme_offset_db(mut self, db: f64) -> Result<Self> {
        if !db.is_finite() {
            return Err(Error::InvalidParameter("extreme offset must be finite".into()));
        }
        self.extreme_offset_db = db;
        Ok(self)
    }

    pub fn with_attack_probability(mut self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "attack probability must lie in [0, 1], got {p}"
            )));
        }
        self.attack_probability = p;
        Ok(self)
    }

    pub fn kind(&self) -> AttackKind {
        self.kind
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    pub fn malicious_count(&self) -> usize {
        self.malicious.len()
    }

    pub fn honest_count(&self) -> usize {
        self.sensors - self.malicious.len()
    }

    pub fn malicious_indices(&self) -> &[usize] {
        &self.malicious
    }

    pub fn offset_db(&self) -> f64 {
        self.offset_db
    }

    pub fn extreme_offset_db(&self) -> f64 {
        self.extreme_offset_db
    }

    pub fn attack_probability(&self) -> f64 {
        self.attack_probability
    }

    pub fn is_malicious(&self, sensor: usize) -> bool {
        self.malicious.contains(&sensor)
    }

    /// Extreme subset of a masking coalition; odd `L` puts the spare attacker here.
    pub fn extreme_indices(&self) -> &[usize] {
        &self.malicious[..self.malicious.len().div_ceil(2)]
    }

    pub fn mild_indices(&self) -> &[usize] {
        &self.malicious[self.malicious.len().div_ceil(2)..]
    }
}

/// Returns the falsified report; honest entries are copied untouched.
pub fn apply_attack<R: Rng + ?Sized>(
    honest: &EnergyReport,
    profile: &AttackProfile,
    rng: &mut R,
) -> Result<EnergyReport> {
    if honest.len() != profile.sensors {
        return Err(Error::LengthMismatch {
            expected: profile.sensors,
            actual: honest.len(),
        });
    }
    let up = db_to_linear(profile.offset_db);
    let down = db_to_linear(-profile.offset_db);
    let mut out = honest.clone();
    let extremes = profile.extreme_indices().len();

    for (k, &i) in profile.malicious.iter().enumerate() {
        let factor = match profile.kind {
            AttackKind::AlwaysYes => up,
            AttackKind::AlwaysNo => down,
            AttackKind::Random => random_direction(rng, up, down),
            AttackKind::Statistical => {
                if rng.random_bool(profile.attack_probability) {
                    random_direction(rng, up, down)
                } else {
                    1.0
                }
            }
            AttackKind::CooperativeMasking if k < extremes => db_to_linear(profile.extreme_offset_db),
            AttackKind::CooperativeMasking => up,
        };
        out.energies[i] *= factor;
    }
    Ok(out)
}

fn random_direction<R: Rng + ?Sized>(rng: &mut R, up: f64, down: f64) -> f64 {
    if rng.random_bool(0.5) {
        up
    } else {
        down
    }
}
