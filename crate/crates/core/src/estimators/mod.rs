//! Estimating how many reports are outliers before a block test.

mod gap;
mod kmeans;

pub use gap::{
    half_block_statistic, largest_gap_bidirectional, largest_gap_count, largest_gap_lower, largest_gap_upper,
    lower_half, mlg_bidirectional, mlg_lower, mlg_upper, upper_half, BidirectionalOutcome, GapPartition, MlgOutcome,
    MlgRound,
};
pub use kmeans::{kmeans_estimate, two_means_split, ClusterEstimate};

use crate::error::{Error, Result};

/// Honest-majority cap on the number of suspects among `n` reports.
pub fn majority_cap(n: usize) -> usize {
    n / 2
}

pub fn check_majority(t: usize, n: usize) -> Result<()> {
    let cap = majority_cap(n);
    if t > cap {
        Err(Error::ExceedsMajority { t, cap })
    } else {
        Ok(())
    }
}
