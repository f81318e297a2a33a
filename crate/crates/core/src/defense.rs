//! One round of malicious-sensor screening: estimate the suspect count,
//! run the block test (or a per-point screen) and report who to exclude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    check_majority, kmeans_estimate, largest_gap_bidirectional, largest_gap_lower, largest_gap_upper,
    mlg_bidirectional, mlg_lower, mlg_upper,
};
use crate::outlier::{
    block_test, box_plot_screen, mad_screen, tm_residuals, BlockTest, Critical, Direction, DEFAULT_FENCE,
    DEFAULT_MAD_CUTOFF,
};

/// Screening method applied before fusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Defense {
    None,
    Tm,
    Sw,
    BoxPlot,
    Mad,
}

impl Defense {
    pub fn block_test(self) -> Option<BlockTest> {
        match self {
            Defense::Tm => Some(BlockTest::Tm),
            Defense::Sw => Some(BlockTest::Sw),
            _ => None,
        }
    }
}

/// How the block size is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[serde(rename = "kmeans", alias = "clustering", alias = "k_means")]
    KMeans,
    LargestGap,
    Mlg,
    /// Oracle: the true coalition size.
    Known,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefenseConfig {
    pub defense: Defense,
    pub direction: Direction,
    pub estimator: Estimator,
    pub fence: f64,
    pub mad_cutoff: f64,
}

impl DefenseConfig {
    pub fn new(defense: Defense, direction: Direction, estimator: Estimator) -> Self {
        Self {
            defense,
            direction,
            estimator,
            fence: DEFAULT_FENCE,
            mad_cutoff: DEFAULT_MAD_CUTOFF,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DefenseOutcome {
    pub excluded: Vec<usize>,
    /// Estimated number of outliers (per-point screens: number flagged).
    pub estimated_t: usize,
}

/// Screens one round of reported energies. `known_count` feeds
/// [`Estimator::Known`].
///
/// Block sizes above the honest-majority cap are reported as
/// [`Error::ExceedsMajority`].
pub fn screen_round(
    energies: &[f64],
    config: &DefenseConfig,
    critical: &Critical<'_>,
    known_count: usize,
) -> Result<DefenseOutcome> {
    let n = energies.len();
    let flagged = |excluded: Vec<usize>| DefenseOutcome {
        estimated_t: excluded.len(),
        excluded,
    };
    let test = match config.defense {
        Defense::None => return Ok(DefenseOutcome::default()),
        Defense::BoxPlot => return box_plot_screen(energies, config.fence).map(flagged),
        Defense::Mad => return mad_screen(energies, config.mad_cutoff).map(flagged),
        Defense::Tm => BlockTest::Tm,
        Defense::Sw => BlockTest::Sw,
    };

    let t = match (config.estimator, config.direction) {
        (Estimator::Mlg, Direction::Upper) => return mlg_upper(energies, test, critical).map(|o| flagged(o.rejected)),
        (Estimator::Mlg, Direction::Lower) => return mlg_lower(energies, test, critical).map(|o| flagged(o.rejected)),
        (Estimator::Mlg, Direction::Bidirectional) => {
            return mlg_bidirectional(energies, test, critical).map(|o| flagged(o.rejected()))
        }
        (Estimator::LargestGap, Direction::Bidirectional) => {
            let o = largest_gap_bidirectional(energies, test, critical)?;
            return Ok(DefenseOutcome {
                estimated_t: o.t_upper() + o.t_lower(),
                excluded: o.rejected(),
            });
        }
        (Estimator::LargestGap, Direction::Upper) => largest_gap_upper(energies)?,
        (Estimator::LargestGap, Direction::Lower) => largest_gap_lower(energies)?,
        (Estimator::KMeans, Direction::Bidirectional) => {
            let (_, residuals) = tm_residuals(energies);
            kmeans_estimate(&residuals)?.t
        }
        (Estimator::KMeans, _) => kmeans_estimate(energies)?.t,
        (Estimator::Known, _) => known_count,
    };
    check_majority(t, n)?;
    let verdict = block_test(test, energies, t, config.direction, critical)?;
    Ok(DefenseOutcome {
        excluded: verdict.excluded().to_vec(),
        estimated_t: t,
    })
}

/// [`screen_round`], but a block size over the majority cap excludes nobody.
pub fn screen_round_capped(
    energies: &[f64],
    config: &DefenseConfig,
    critical: &Critical<'_>,
    known_count: usize,
) -> Result<DefenseOutcome> {
    match screen_round(energies, config, critical, known_count) {
        Err(Error::ExceedsMajority { t, .. }) => Ok(DefenseOutcome {
            excluded: Vec::new(),
            estimated_t: t,
        }),
        other => other,
    }
}
