//! Per-point screening baselines: box-plot fences and the MAD rule.

use super::{check_finite, sorted_copy};
use crate::error::{Error, Result};

pub const DEFAULT_FENCE: f64 = 1.5;
pub const DEFAULT_MAD_CUTOFF: f64 = 3.0;
/// Makes the MAD a consistent estimator of σ under normality.
pub const MAD_CONSISTENCY: f64 = 1.4826;

/// Linearly interpolated sample quantile of ascending data (Hyndman-Fan type 7).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn median(sorted: &[f64]) -> f64 {
    quantile(sorted, 0.5)
}

/// Indices lying outside `[Q1 − k·IQR, Q3 + k·IQR]`.
pub fn box_plot_screen(data: &[f64], fence: f64) -> Result<Vec<usize>> {
    check_finite(data)?;
    if data.len() < 4 {
        return Err(Error::InsufficientData {
            required: 4,
            available: data.len(),
        });
    }
    let sorted = sorted_copy(data);
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - fence * iqr, q3 + fence * iqr);
    Ok(data
        .iter()
        .enumerate()
        .filter(|(_, &x)| x < lo || x > hi)
        .map(|(i, _)| i)
        .collect())
}

/// Indices with `|x − median| / (1.4826·MAD) > k`.
///
/// Constant data has no scale at all and is rejected.
pub fn mad_screen(data: &[f64], k: f64) -> Result<Vec<usize>> {
    check_finite(data)?;
    if data.is_empty() {
        return Err(Error::InsufficientData {
            required: 1,
            available: 0,
        });
    }
    let sorted = sorted_copy(data);
    let med = median(&sorted);
    let deviations = sorted_copy(&data.iter().map(|x| (x - med).abs()).collect::<Vec<_>>());
    if deviations.last() == Some(&0.0) {
        return Err(Error::Degenerate("all values identical"));
    }
    // With MAD = 0 every point off the median has an infinite score.
    let scale = MAD_CONSISTENCY * median(&deviations);
    Ok(data
        .iter()
        .enumerate()
        .filter(|(_, &x)| {
            let d = (x - med).abs();
            if scale > 0.0 {
                d / scale > k
            } else {
                d > 0.0
            }
        })
        .map(|(i, _)| i)
        .collect())
}
