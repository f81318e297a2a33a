//! Energy detection over an AWGN channel.
//!
//! Each sensor averages `M` complex samples `y(m)`, circularly-symmetric
//! Gaussian with variance `σ_u²` when the primary user is absent and
//! `σ_u²(1 + α)` when present. The averaged energy `T = (1/M) Σ |y(m)|²` is
//! then Gamma distributed with shape `M` and scale `σ_y²/M`, which is what
//! [`simulate_energy`] draws directly. [`simulate_energy_from_samples`] builds
//! the same statistic sample by sample.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::gaussian::{q_function, q_inverse};

/// Primary-user state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// H0, channel idle.
    Absent,
    /// H1, primary user transmitting.
    Present,
}

impl Hypothesis {
    pub fn is_present(self) -> bool {
        matches!(self, Hypothesis::Present)
    }
}

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Per-sensor channel: noise power, received SNR and samples per sensing round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    noise_variance: f64,
    snr: f64,
    samples_per_round: usize,
}

impl ChannelParams {
    /// Smallest `M` for which the Gaussian closed forms are accepted.
    pub const MIN_SAMPLES: usize = 11;

    pub fn new(noise_variance: f64, snr: f64, samples_per_round: usize) -> Result<Self> {
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive, got {noise_variance}"
            )));
        }
        if !(snr >= 0.0 && snr.is_finite()) {
            return Err(Error::InvalidParameter(format!("snr must be non-negative, got {snr}")));
        }
        if samples_per_round < Self::MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "samples per round must exceed 10 for the Gaussian approximation, got {samples_per_round}"
            )));
        }
        Ok(Self {
            noise_variance,
            snr,
            samples_per_round,
        })
    }

    pub fn with_snr_db(noise_variance: f64, snr_db: f64, samples_per_round: usize) -> Result<Self> {
        Self::new(noise_variance, db_to_linear(snr_db), samples_per_round)
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn samples_per_round(&self) -> usize {
        self.samples_per_round
    }

    /// Per-sample received power under `truth`.
    pub fn received_variance(&self, truth: Hypothesis) -> f64 {
        match truth {
            Hypothesis::Absent => self.noise_variance,
            Hypothesis::Present => self.noise_variance * (1.0 + self.snr),
        }
    }

    fn sqrt_m(&self) -> f64 {
        (self.samples_per_round as f64).sqrt()
    }
}

/// One sensing round: the energy every sensor reports, plus the true state.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub energies: Vec<f64>,
    pub truth: Hypothesis,
    pub round_id: u64,
}

impl EnergyReport {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

/// Draws one sensor's averaged energy from its exact Gamma law.
pub fn simulate_energy<R: Rng + ?Sized>(params: &ChannelParams, truth: Hypothesis, rng: &mut R) -> f64 {
    let m = params.samples_per_round as f64;
    let scale = params.received_variance(truth) / m;
    // shape and scale are validated positive by ChannelParams
    Gamma::new(m, scale).expect("valid gamma parameters").sample(rng)
}

/// Same statistic as [`simulate_energy`], summed over `M` explicit complex samples.
pub fn simulate_energy_from_samples<R: Rng + ?Sized>(params: &ChannelParams, truth: Hypothesis, rng: &mut R) -> f64 {
    let component_sd = (params.received_variance(truth) / 2.0).sqrt();
    let mut acc = 0.0;
    for _ in 0..params.samples_per_round {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        acc += (re * component_sd).powi(2) + (im * component_sd).powi(2);
    }
    acc / params.samples_per_round as f64
}

/// Honest energies of `sensors` independent sensors sharing one channel state.
pub fn simulate_report<R: Rng + ?Sized>(
    params: &ChannelParams,
    truth: Hypothesis,
    sensors: usize,
    round_id: u64,
    rng: &mut R,
) -> EnergyReport {
    let energies = (0..sensors).map(|_| simulate_energy(params, truth, rng)).collect();
    EnergyReport {
        energies,
        truth,
        round_id,
    }
}

/// Single-sensor false-alarm probability `Q((λ/σ_u² − 1)·√M)`.
pub fn analytic_pfa(threshold: f64, params: &ChannelParams) -> f64 {
    q_function((threshold / params.noise_variance - 1.0) * params.sqrt_m())
}

/// Single-sensor detection probability `Q((λ/σ_u² − α − 1)·√M/(α + 1))`.
pub fn analytic_pd(threshold: f64, params: &ChannelParams) -> f64 {
    let a = params.snr;
    q_function((threshold / params.noise_variance - a - 1.0) * params.sqrt_m() / (a + 1.0))
}

fn check_probability(target: f64) -> Result<()> {
    if target > 0.0 && target < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "target probability must lie in (0, 1), got {target}"
        )))
    }
}

/// Threshold giving single-sensor false-alarm probability `target`.
pub fn threshold_for_pfa(target: f64, params: &ChannelParams) -> Result<f64> {
    check_probability(target)?;
    Ok(params.noise_variance * (1.0 + q_inverse(target) / params.sqrt_m()))
}

/// Threshold giving single-sensor detection probability `target`.
pub fn threshold_for_pd(target: f64, params: &ChannelParams) -> Result<f64> {
    check_probability(target)?;
    let a = params.snr;
    Ok(params.noise_variance * (1.0 + a) * (1.0 + q_inverse(target) / params.sqrt_m()))
}

/// Local hard decision; energy exactly at the threshold counts as idle.
pub fn local_decision(energy: f64, threshold: f64) -> Hypothesis {
    if energy > threshold {
        Hypothesis::Present
    } else {
        Hypothesis::Absent
    }
}
