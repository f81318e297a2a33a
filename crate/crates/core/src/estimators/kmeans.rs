//! Two-cluster k-means on scalar energies.
//!
//! In one dimension the clusters of an optimal 2-means solution are
//! contiguous in sorted order, so the optimum is found exactly by scanning
//! the `n − 1` split points. The smaller cluster is the suspected block.

use crate::error::{Error, Result};
use crate::outlier::argsort;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterEstimate {
    pub t: usize,
    /// Members of the smaller cluster, ascending by value.
    pub suspected: Vec<usize>,
    /// Whether the suspected cluster is the high-valued one.
    pub upper: bool,
}

/// Optimal split of ascending `sorted`: returns `k` such that
/// `sorted[..k]` and `sorted[k..]` minimise the within-cluster sum of
/// squares, or `None` if all values coincide.
pub fn two_means_split(sorted: &[f64]) -> Option<usize> {
    let n = sorted.len();
    if n < 2 || sorted[0] == sorted[n - 1] {
        return None;
    }
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let total: f64 = sorted.iter().map(|x| x - mean).sum();
    // Minimising within-SS is maximising k(n−k)/n · (μ_R − μ_L)².
    let mut best = (0, f64::NEG_INFINITY);
    let mut left = 0.0;
    for k in 1..n {
        left += sorted[k - 1] - mean;
        let (kl, kr) = (k as f64, (n - k) as f64);
        let diff = (total - left) / kr - left / kl;
        let score = kl * kr * diff * diff;
        if score > best.1 {
            best = (k, score);
        }
    }
    Some(best.0)
}

/// Size and membership of the smaller 2-means cluster. Equal sizes resolve
/// to the higher cluster.
pub fn kmeans_estimate(data: &[f64]) -> Result<ClusterEstimate> {
    if data.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            available: data.len(),
        });
    }
    let order = argsort(data);
    let sorted: Vec<f64> = order.iter().map(|&i| data[i]).collect();
    let Some(k) = two_means_split(&sorted) else {
        return Ok(ClusterEstimate {
            t: 0,
            suspected: Vec::new(),
            upper: true,
        });
    };
    let n = data.len();
    let upper = n - k <= k;
    let suspected = if upper {
        order[k..].to_vec()
    } else {
        order[..k].to_vec()
    };
    Ok(ClusterEstimate {
        t: suspected.len(),
        suspected,
        upper,
    })
}
