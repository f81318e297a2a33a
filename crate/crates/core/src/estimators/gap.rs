//! Largest-gap outlier counting and its recursive refinement.
//!
//! The plain largest-gap rule counts the points beyond the widest spacing
//! of the sorted data. Under masking the widest spacing sits between the
//! mild and the extreme attackers, so only the extremes are counted. The
//! modified rule (MLG) keeps stripping: it searches the largest gap inside
//! the upper half only, block-tests the points above it, and on rejection
//! removes them and searches again.
//!
//! Lower-tail variants run the upper-tail code on negated data, so the
//! median of an odd-sized sample always stays out of the searched half.

use super::check_majority;
use crate::error::{Error, Result};
use crate::outlier::{
    argsort, check_finite, sorted_copy, sw_coefficients, sw_statistic, tm_upper_statistic, BlockTest, Critical,
    Direction, OutlierVerdict, TestKind,
};

/// Number of points above the widest spacing of ascending `sorted`.
///
/// Among equally wide spacings the one nearest the top wins, giving the
/// smallest count. `None` when there is no positive spacing.
pub fn largest_gap_count(sorted: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, w) in sorted.windows(2).enumerate() {
        let gap = w[1] - w[0];
        if gap > 0.0 && best.is_none_or(|(_, g)| gap >= g) {
            best = Some((i, gap));
        }
    }
    best.map(|(i, _)| sorted.len() - 1 - i)
}

/// Upper half of ascending data; the median of an odd sample is left out.
pub fn upper_half(sorted: &[f64]) -> &[f64] {
    &sorted[sorted.len().div_ceil(2)..]
}

/// Lower half of ascending data, median included for odd sizes.
pub fn lower_half(sorted: &[f64]) -> &[f64] {
    &sorted[..sorted.len().div_ceil(2)]
}

/// Largest-gap estimate of the number of upper outliers.
pub fn largest_gap_upper(data: &[f64]) -> Result<usize> {
    check_finite(data)?;
    if data.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            available: data.len(),
        });
    }
    Ok(largest_gap_count(&sorted_copy(data)).unwrap_or(0))
}

/// Largest-gap estimate of the number of lower outliers.
pub fn largest_gap_lower(data: &[f64]) -> Result<usize> {
    largest_gap_upper(&negated(data))
}

fn negated(data: &[f64]) -> Vec<f64> {
    data.iter().map(|x| -x).collect()
}

/// Block statistic of an ascending half-sample with its top `t` suspected.
pub fn half_block_statistic(test: BlockTest, half: &[f64], t: usize) -> Result<f64> {
    match test {
        BlockTest::Tm => tm_upper_statistic(half, t),
        BlockTest::Sw => sw_statistic(half, sw_coefficients(half.len())?),
    }
}

/// One split of the current data around its median and its upper-half gap.
#[derive(Debug, Clone, PartialEq)]
pub struct GapPartition {
    pub sorted_data: Vec<f64>,
    pub lower_half: Vec<f64>,
    pub upper_half: Vec<f64>,
    /// Index into `upper_half` of the point just below the widest gap.
    pub gap_position: usize,
    pub left_of_gap: Vec<f64>,
    pub right_of_gap: Vec<f64>,
    /// Lower half together with the points below the gap.
    pub retained: Vec<f64>,
}

impl GapPartition {
    /// `None` when the upper half has no positive spacing.
    pub fn new(sorted: &[f64]) -> Option<Self> {
        let upper = upper_half(sorted);
        let t = largest_gap_count(upper)?;
        let split = upper.len() - t;
        let lower = &sorted[..sorted.len() - upper.len()];
        let mut retained = lower.to_vec();
        retained.extend_from_slice(&upper[..split]);
        Some(Self {
            sorted_data: sorted.to_vec(),
            lower_half: lower.to_vec(),
            upper_half: upper.to_vec(),
            gap_position: split - 1,
            left_of_gap: upper[..split].to_vec(),
            right_of_gap: upper[split..].to_vec(),
            retained,
        })
    }

    pub fn suspected_count(&self) -> usize {
        self.right_of_gap.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlgRound {
    /// Values in this round's orientation (negated for the lower tail).
    pub partition: GapPartition,
    pub verdict: OutlierVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlgOutcome {
    /// Every rejected sensor, in order of removal.
    pub rejected: Vec<usize>,
    pub rounds: Vec<MlgRound>,
}

impl MlgOutcome {
    pub fn rejection_rounds(&self) -> usize {
        self.rounds.iter().filter(|r| r.verdict.is_outlier_block).count()
    }
}

/// Half-sample block test of the suspects above the widest gap of the
/// current upper half. `Ok(None)` when no test is possible.
fn half_round(
    current: &[usize],
    values: &[f64],
    test: BlockTest,
    critical: &Critical<'_>,
    direction: Direction,
) -> Result<Option<MlgRound>> {
    let sorted: Vec<f64> = current.iter().map(|&i| values[i]).collect();
    let n = sorted.len();
    let kind = TestKind::half_gap(test);
    if n < kind.min_n() {
        return Ok(None);
    }
    let Some(partition) = GapPartition::new(&sorted) else {
        return Ok(None);
    };
    let t = partition.suspected_count();
    // a table without this n at all is a setup error, a single absent t is not
    critical.value(kind, n, 1)?;
    let Ok(cv) = critical.value(kind, n, t) else {
        return Ok(None);
    };
    let statistic = match half_block_statistic(test, &partition.upper_half, t) {
        Ok(s) => s,
        Err(Error::Degenerate(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let suspects: Vec<usize> = current[n - t..].iter().rev().copied().collect();
    Ok(Some(MlgRound {
        verdict: OutlierVerdict {
            is_outlier_block: statistic < cv,
            statistic,
            critical_value: cv,
            t,
            suspected_indices: suspects,
            direction,
        },
        partition,
    }))
}

fn mlg_oriented(values: &[f64], test: BlockTest, critical: &Critical<'_>, direction: Direction) -> Result<MlgOutcome> {
    check_finite(values)?;
    if values.len() < 4 {
        return Err(Error::InsufficientData {
            required: 4,
            available: values.len(),
        });
    }
    let cap = super::majority_cap(values.len());
    let mut current = argsort(values);
    let mut outcome = MlgOutcome {
        rejected: Vec::new(),
        rounds: Vec::new(),
    };
    while let Some(round) = half_round(&current, values, test, critical, direction)? {
        let t = round.verdict.t;
        if outcome.rejected.len() + t > cap {
            break;
        }
        let reject = round.verdict.is_outlier_block;
        if reject {
            outcome.rejected.extend_from_slice(&round.verdict.suspected_indices);
            current.truncate(current.len() - t);
        }
        outcome.rounds.push(round);
        if !reject {
            break;
        }
    }
    Ok(outcome)
}

/// Modified largest gap for upper outliers.
pub fn mlg_upper(data: &[f64], test: BlockTest, critical: &Critical<'_>) -> Result<MlgOutcome> {
    mlg_oriented(data, test, critical, Direction::Upper)
}

/// Modified largest gap for lower outliers (upper rule on reflected data).
pub fn mlg_lower(data: &[f64], test: BlockTest, critical: &Critical<'_>) -> Result<MlgOutcome> {
    mlg_oriented(&negated(data), test, critical, Direction::Lower)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BidirectionalOutcome {
    pub upper: MlgOutcome,
    pub lower: MlgOutcome,
}

impl BidirectionalOutcome {
    pub fn t_upper(&self) -> usize {
        self.upper.rounds.first().map_or(0, |r| r.verdict.t)
    }

    pub fn t_lower(&self) -> usize {
        self.lower.rounds.first().map_or(0, |r| r.verdict.t)
    }

    /// Union of rejected sensors from both tails.
    pub fn rejected(&self) -> Vec<usize> {
        let mut all = self.upper.rejected.clone();
        all.extend_from_slice(&self.lower.rejected);
        all
    }
}

fn single_round(values: &[f64], test: BlockTest, critical: &Critical<'_>, direction: Direction) -> Result<MlgOutcome> {
    let current = argsort(values);
    let mut outcome = MlgOutcome {
        rejected: Vec::new(),
        rounds: Vec::new(),
    };
    if let Some(round) = half_round(&current, values, test, critical, direction)? {
        if round.verdict.is_outlier_block {
            outcome.rejected = round.verdict.suspected_indices.clone();
        }
        outcome.rounds.push(round);
    }
    Ok(outcome)
}

/// Largest gap for two-sided contamination: each half of the sorted data
/// gets its own gap estimate and its own half-sample block test.
pub fn largest_gap_bidirectional(
    data: &[f64],
    test: BlockTest,
    critical: &Critical<'_>,
) -> Result<BidirectionalOutcome> {
    check_finite(data)?;
    let need = TestKind::half_gap(test).min_n();
    if data.len() < need {
        return Err(Error::InsufficientData {
            required: need,
            available: data.len(),
        });
    }
    let out = BidirectionalOutcome {
        upper: single_round(data, test, critical, Direction::Upper)?,
        lower: single_round(&negated(data), test, critical, Direction::Lower)?,
    };
    check_majority(out.upper.rejected.len() + out.lower.rejected.len(), data.len())?;
    Ok(out)
}

/// MLG on both tails.
pub fn mlg_bidirectional(data: &[f64], test: BlockTest, critical: &Critical<'_>) -> Result<BidirectionalOutcome> {
    let out = BidirectionalOutcome {
        upper: mlg_upper(data, test, critical)?,
        lower: mlg_lower(data, test, critical)?,
    };
    check_majority(out.upper.rejected.len() + out.lower.rejected.len(), data.len())?;
    Ok(out)
}
