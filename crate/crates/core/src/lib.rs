//! Cooperative spectrum sensing with screening of falsified reports.
//!
//! Sensors run energy detectors and report their energies to a fusion
//! centre. Some sensors lie. Before majority-logic fusion the centre treats
//! the reports as a sample, estimates how many of them are outliers and
//! removes them with a block outlier test (Tietjen-Moore or Shapiro-Wilk),
//! or with a per-point box-plot / MAD screen for comparison.
//!
//! Modules, bottom up:
//! - [`signal`]: AWGN energy detector, closed-form `P_FA` / `P_D`.
//! - [`attacks`]: data-falsification models, including masking coalitions.
//! - [`outlier`]: block statistics, screens and Monte Carlo critical values.
//! - [`estimators`]: k-means, largest-gap and modified largest-gap counts.
//! - [`defense`]: one round of estimate, test and exclude.
//! - [`fusion`]: majority logic and metric tallies.
//! - [`harness`]: scenario files, the parallel runner and CSV output.

pub mod attacks;
pub mod defense;
pub mod error;
pub mod estimators;
pub mod fusion;
pub mod gaussian;
pub mod harness;
pub mod outlier;
pub mod rng;
pub mod signal;

pub use error::{Error, Result};
