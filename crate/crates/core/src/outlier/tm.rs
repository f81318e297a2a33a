//! Tietjen-Moore block statistics.

use super::{argsort, check_block, check_sorted};
use crate::error::{Error, Result};

fn sum_sq_dev(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum()
}

fn ratio(kept: &[f64], all: &[f64]) -> Result<f64> {
    let total = sum_sq_dev(all);
    if total <= 0.0 {
        return Err(Error::Degenerate("zero spread"));
    }
    Ok(sum_sq_dev(kept) / total)
}

/// Spread of the `N − t` smallest values relative to the spread of all `N`.
pub fn tm_upper_statistic(sorted: &[f64], t: usize) -> Result<f64> {
    check_sorted(sorted)?;
    check_block(sorted.len(), t)?;
    if t == 0 {
        return Ok(1.0);
    }
    ratio(&sorted[..sorted.len() - t], sorted)
}

/// Spread of the `N − t` largest values relative to the spread of all `N`.
pub fn tm_lower_statistic(sorted: &[f64], t: usize) -> Result<f64> {
    check_sorted(sorted)?;
    check_block(sorted.len(), t)?;
    if t == 0 {
        return Ok(1.0);
    }
    ratio(&sorted[t..], sorted)
}

/// Absolute residuals about the sample mean, ascending, with the sensor
/// index behind each one.
pub fn tm_residuals(data: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let mean = data.iter().sum::<f64>() / data.len() as f64;
    let abs: Vec<f64> = data.iter().map(|y| (y - mean).abs()).collect();
    let order = argsort(&abs);
    let sorted = order.iter().map(|&i| abs[i]).collect();
    (order, sorted)
}
