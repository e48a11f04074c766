//! Degraded AWGN broadcast channel model.
//!
//! The channel has one transmitter and `L` receivers. Receiver `i` observes
//! `y_i = x + z_i` where `z_i` is i.i.d. zero-mean Gaussian with variance
//! `N_i`, the variances are ordered `N_1 <= N_2 <= ... <= N_L` (receiver 1 is
//! the strongest), and the input satisfies an average power constraint of `P`
//! per symbol.
//!
//! Two samplers are provided. The independent sampler draws each receiver's
//! noise directly from its marginal, which is all the per-receiver error
//! probabilities depend on. The chain sampler realizes the equivalent
//! physically degraded channel, `z_i = z_{i-1} + inc_i` with
//! `inc_i ~ N(0, N_i - N_{i-1})`, so the two can be checked against each
//! other distributionally.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::seeding::{derive_rng, purpose};
use crate::{Error, Result};

/// Shannon capacity of a real AWGN channel in bits per use: `½·log2(1+snr)`.
///
/// Errors on negative SNR.
pub fn capacity(snr: f64) -> Result<f64> {
    if !snr.is_finite() || snr < 0.0 {
        return Err(Error::invalid(format!(
            "snr must be finite and >= 0, got {snr}"
        )));
    }
    Ok(capacity_raw(snr))
}

/// `½·log2(1+x)` without the domain check; callers guarantee `x >= 0`.
pub(crate) fn capacity_raw(x: f64) -> f64 {
    0.5 * (1.0 + x).log2()
}

/// Power budget and ordered per-receiver noise variances.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    power: f64,
    noise_variances: Vec<f64>,
}

impl ChannelConfig {
    /// Builds a config, enforcing `P >= 0`, all `N_i > 0`, and the degraded
    /// ordering `N_1 <= N_2 <= ... <= N_L`.
    pub fn new(power: f64, noise_variances: Vec<f64>) -> Result<Self> {
        if !power.is_finite() || power < 0.0 {
            return Err(Error::invalid(format!(
                "power must be finite and >= 0, got {power}"
            )));
        }
        if noise_variances.is_empty() {
            return Err(Error::invalid("at least one receiver is required"));
        }
        for (i, &v) in noise_variances.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(format!(
                    "noise variance of receiver {} must be finite and > 0, got {v}",
                    i + 1
                )));
            }
        }
        if noise_variances.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid(
                "noise variances must be non-decreasing (receiver 1 is the strongest)",
            ));
        }
        Ok(ChannelConfig {
            power,
            noise_variances,
        })
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// Number of receivers `L`.
    pub fn receivers(&self) -> usize {
        self.noise_variances.len()
    }

    /// Noise variance of a 1-based receiver index.
    pub fn noise(&self, receiver: usize) -> f64 {
        self.noise_variances[receiver - 1]
    }

    pub fn noise_variances(&self) -> &[f64] {
        &self.noise_variances
    }
}

/// One realization of the per-receiver noise sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    per_receiver: Vec<Vec<f64>>,
}

impl NoiseRealization {
    /// Noise sequence seen by a 1-based receiver index.
    pub fn sequence(&self, receiver: usize) -> &[f64] {
        &self.per_receiver[receiver - 1]
    }

    pub fn receivers(&self) -> usize {
        self.per_receiver.len()
    }

    pub fn blocklength(&self) -> usize {
        self.per_receiver[0].len()
    }
}

fn check_blocklength(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("blocklength n must be >= 1"));
    }
    Ok(())
}

/// Draws each receiver's noise i.i.d. from its marginal `N(0, N_i)`,
/// mutually independent across receivers, deterministic in `seed`.
pub fn sample_noise_independent(
    cfg: &ChannelConfig,
    n: usize,
    seed: u64,
) -> Result<NoiseRealization> {
    check_blocklength(n)?;
    let per_receiver = cfg
        .noise_variances
        .iter()
        .enumerate()
        .map(|(i, &var)| {
            let mut rng = derive_rng(seed, purpose::NOISE_INDEPENDENT, i as u64 + 1, 0);
            let sigma = var.sqrt();
            (0..n)
                .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    Ok(NoiseRealization { per_receiver })
}

/// Draws noise through the physically degraded chain: `z_1 ~ N(0, N_1)` and
/// `z_i = z_{i-1} + inc_i` with `inc_i ~ N(0, N_i - N_{i-1})`. The marginal
/// law of each `z_i` matches [`sample_noise_independent`].
pub fn sample_noise_degraded_chain(
    cfg: &ChannelConfig,
    n: usize,
    seed: u64,
) -> Result<NoiseRealization> {
    check_blocklength(n)?;
    let mut per_receiver: Vec<Vec<f64>> = Vec::with_capacity(cfg.receivers());
    let mut previous_var = 0.0;
    for (i, &var) in cfg.noise_variances.iter().enumerate() {
        let increment_var = var - previous_var;
        let sigma = increment_var.sqrt();
        let mut rng = derive_rng(seed, purpose::NOISE_CHAIN, i as u64 + 1, 0);
        let row: Vec<f64> = (0..n)
            .map(|l| {
                let base = if i == 0 { 0.0 } else { per_receiver[i - 1][l] };
                base + sigma * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        per_receiver.push(row);
        previous_var = var;
    }
    Ok(NoiseRealization { per_receiver })
}

/// Received signal of one receiver: `y_i = x + z_i` elementwise.
pub fn transmit(x: &[f64], noise: &NoiseRealization, receiver: usize) -> Result<Vec<f64>> {
    if receiver == 0 || receiver > noise.receivers() {
        return Err(Error::invalid(format!(
            "receiver index {receiver} out of range (1..={})",
            noise.receivers()
        )));
    }
    let z = noise.sequence(receiver);
    if z.len() != x.len() {
        return Err(Error::invalid(format!(
            "length mismatch: codeword has {} symbols, noise has {}",
            x.len(),
            z.len()
        )));
    }
    Ok(x.iter().zip(z).map(|(a, b)| a + b).collect())
}
