//! Shapiro-Wilk statistic with coefficients regenerated from expected
//! normal order statistics.
//!
//! The coefficient vector is `m / |m|`, with `m_i = E[Z_(i:n)]` obtained by
//! numerical integration of the order-statistic density. This is the
//! large-sample form of the best linear unbiased weights; exact agreement
//! with the original tabulated weights is not expected, and critical values
//! are calibrated by Monte Carlo against these coefficients.

use std::sync::OnceLock;

use super::{check_sorted, sorted_copy};
use crate::error::{Error, Result};
use crate::gaussian::{normal_cdf, normal_pdf, q_function};

pub const SW_MIN_N: usize = 3;
pub const SW_MAX_N: usize = 50;

const GRID_HALF_WIDTH: f64 = 12.0;
const GRID_STEP: f64 = 0.005;

/// `E[Z_(i:n)]` for `i = 1..=n`, ascending.
pub fn expected_normal_order_statistics(n: usize) -> Vec<f64> {
    let steps = (2.0 * GRID_HALF_WIDTH / GRID_STEP) as usize;
    let grid: Vec<(f64, f64, f64, f64)> = (0..=steps)
        .map(|k| {
            let x = -GRID_HALF_WIDTH + k as f64 * GRID_STEP;
            // log Φ and log(1 − Φ), each from the side that keeps precision
            (x, normal_pdf(x).ln(), normal_cdf(x).ln(), q_function(x).ln())
        })
        .collect();
    let ln_n_fact = libm::lgamma(n as f64 + 1.0);

    let mut m = vec![0.0; n];
    for i in 1..=n.div_ceil(2) {
        let ln_coef = ln_n_fact - libm::lgamma(i as f64) - libm::lgamma((n - i + 1) as f64);
        let (below, above) = ((i - 1) as f64, (n - i) as f64);
        let mut acc = 0.0;
        for (k, &(x, lpdf, lcdf, lsf)) in grid.iter().enumerate() {
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            acc += w * x * (ln_coef + lpdf + below * lcdf + above * lsf).exp();
        }
        m[i - 1] = acc * GRID_STEP;
        m[n - i] = -m[i - 1];
    }
    if n % 2 == 1 {
        m[n / 2] = 0.0;
    }
    m
}

fn compute_coefficients(n: usize) -> Vec<f64> {
    let m = expected_normal_order_statistics(n);
    let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    (0..n / 2).map(|j| m[n - 1 - j] / norm).collect()
}

/// Weights `a_j`, `j = 1..=⌊n/2⌋`, applied to `x_(n−j+1) − x_(j)`.
pub fn sw_coefficients(n: usize) -> Result<&'static [f64]> {
    static CACHE: [OnceLock<Vec<f64>>; SW_MAX_N + 1] = [const { OnceLock::new() }; SW_MAX_N + 1];
    if !(SW_MIN_N..=SW_MAX_N).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "Shapiro-Wilk supports {SW_MIN_N} <= n <= {SW_MAX_N}, got {n}"
        )));
    }
    Ok(CACHE[n].get_or_init(|| compute_coefficients(n)))
}

/// `W = (Σ_j a_j (x_(n−j+1) − x_(j)))² / Σ (x_i − x̄)²`.
pub fn sw_statistic(sorted: &[f64], coeffs: &[f64]) -> Result<f64> {
    check_sorted(sorted)?;
    let n = sorted.len();
    if n < SW_MIN_N {
        return Err(Error::InsufficientData {
            required: SW_MIN_N,
            available: n,
        });
    }
    if coeffs.len() != n / 2 {
        return Err(Error::InvalidParameter(format!(
            "expected {} coefficients for n={n}, got {}",
            n / 2,
            coeffs.len()
        )));
    }
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let s2: f64 = sorted.iter().map(|x| (x - mean) * (x - mean)).sum();
    if s2 <= 0.0 {
        return Err(Error::Degenerate("zero variance"));
    }
    let b: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(j, a)| a * (sorted[n - 1 - j] - sorted[j]))
        .sum();
    Ok(b * b / s2)
}

/// Sorts a copy of `data` and evaluates `W` with the cached coefficients.
pub fn sw_statistic_unsorted(data: &[f64]) -> Result<f64> {
    let sorted = sorted_copy(data);
    sw_statistic(&sorted, sw_coefficients(data.len())?)
}
