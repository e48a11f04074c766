//! Monte Carlo estimation of per-receiver block-error rates.
//!
//! A [`Scenario`] fixes the channel, scheme, message sizes, power split,
//! decoding strategy, trial count and master seed. [`run_trials`] then plays
//! independent trials — draw uniform messages, encode, add sampled noise,
//! decode every receiver with its side information — and tallies block
//! errors per receiver, with a per-layer breakdown for receiver 1. Every
//! random quantity is derived from `(seed, purpose, trial, ...)` streams, so
//! results are bit-identical across runs and thread counts.
//!
//! By default each trial draws fresh layer codebooks, so the estimate is an
//! average over the random-coding ensemble; a fixed-codebook mode reuses one
//! book for speed and is flagged in the output.
//!
//! Decoding stages are executed by one of two engines:
//!
//! * **enumerated** — literal nearest-codeword search via [`ml_decode`],
//!   used whenever the candidate set is within the enumeration threshold;
//! * **ensemble** — used in fresh-codebook mode when a stage's candidate set
//!   is too large to enumerate. Conditioned on the transmitted codewords and
//!   the noise, the `J - 1` competing candidates of a nearest-codeword stage
//!   are i.i.d. Gaussian codewords, so each competitor independently beats
//!   the true one with probability `q = F(D*/v)`, where `F` is the
//!   noncentral chi-square CDF with `n` degrees of freedom and noncentrality
//!   `|y|^2/v`, and `D*` is the true codeword's squared distance. The stage
//!   therefore succeeds with probability exactly `(1-q)^(J-1)`, and the
//!   engine draws the outcome from that law. This reproduces the enumerated
//!   engine's per-receiver statistics exactly (ties are measure zero); it is
//!   an evaluation shortcut, not an approximation.
//!
//! Joint (simultaneous) decoding admits no such factorization — competitor
//! pairs share codewords — so it always enumerates and errors out above the
//! candidate cap.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_noise_independent, transmit, ChannelConfig};
use crate::codec::{
    encode_with_sources, v_composite_index, v_index_bits, CodewordSource, Codewords, LayerSources,
    MessageConfig, SchemeId, LAYER_U, LAYER_V,
};
use crate::decode::{candidate_set, decode_receiver, ml_decode, CandidateSet, DecodeStrategy};
use crate::regions::PowerSplit;
use crate::seeding::{derive_rng, derive_seed, purpose};
use crate::stats::{noncentral_chi2_cdf, pooled_se, wilson_interval};
use crate::{Caps, Error, Result};
use rand::Rng;

/// Largest candidate set the harness enumerates before preferring the
/// ensemble engine (fresh-codebook mode only).
pub const DEFAULT_ENUM_THRESHOLD: u64 = 1 << 14;

/// Whether layer codebooks are redrawn each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookMode {
    /// Independent books per trial: the random-coding ensemble average.
    Fresh,
    /// One book for all trials (faster, conditional on that book).
    Fixed,
}

/// A complete simulation configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub channel: ChannelConfig,
    pub scheme: SchemeId,
    pub messages: MessageConfig,
    pub split: PowerSplit,
    pub strategy: DecodeStrategy,
    pub trials: u64,
    pub seed: u64,
    pub codebook_mode: CodebookMode,
    /// Test-fixture mode: receivers observe the codeword with no noise.
    pub zero_noise: bool,
    pub caps: Caps,
    /// Stage sizes up to this are enumerated; beyond it fresh-codebook
    /// stages switch to the ensemble engine. `0` forces ensemble wherever
    /// it is available.
    pub enum_threshold: u64,
    /// Per-message target rates; realized rates are reported alongside.
    pub target_rates: Vec<f64>,
}

impl Scenario {
    /// Builds a scenario with default caps, threshold, fresh codebooks and
    /// targets equal to the realized rates.
    pub fn new(
        channel: ChannelConfig,
        scheme: SchemeId,
        messages: MessageConfig,
        split: PowerSplit,
        strategy: DecodeStrategy,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        let target_rates = (1..=messages.message_count())
            .map(|j| messages.rate(j))
            .collect();
        let s = Scenario {
            channel,
            scheme,
            messages,
            split,
            strategy,
            trials,
            seed,
            codebook_mode: CodebookMode::Fresh,
            zero_noise: false,
            caps: Caps::default(),
            enum_threshold: DEFAULT_ENUM_THRESHOLD,
            target_rates,
        };
        s.validate()?;
        Ok(s)
    }

    /// Checks structural invariants and that every decoding stage has a
    /// workable engine under the configured caps.
    pub fn validate(&self) -> Result<()> {
        if self.channel.receivers() != self.scheme.receivers() {
            return Err(Error::invalid(format!(
                "{} expects {} receivers, channel has {}",
                self.scheme.name(),
                self.scheme.receivers(),
                self.channel.receivers()
            )));
        }
        self.messages.matches_scheme(self.scheme)?;
        if self.trials == 0 {
            return Err(Error::invalid("trial count must be >= 1"));
        }
        if self.target_rates.len() != self.messages.message_count() {
            return Err(Error::invalid("one target rate per message is required"));
        }
        if self.scheme.receivers() == 2 && self.strategy != DecodeStrategy::SuccessiveCancel {
            return Err(Error::invalid(
                "two-receiver schemes decode by successive cancellation only",
            ));
        }
        // Dry-run engine selection with zero-valued side information; stage
        // sizes do not depend on the known values.
        let msg = &self.messages;
        let u_count = 1u64 << msg.bits(1);
        let u_var = self.split.alpha() * self.channel.power();
        let v_var = (1.0 - self.split.alpha()) * self.channel.power();
        for rx in 1..=self.scheme.receivers() {
            let known: Vec<(usize, u64)> =
                self.scheme.knows(rx).iter().map(|&id| (id, 0)).collect();
            let fiber = candidate_set(self.scheme, rx, msg, &known)?;
            if rx >= 2 {
                self.pick_engine(fiber.len(), v_var)?;
                continue;
            }
            match self.strategy {
                DecodeStrategy::SuccessiveCancel => {
                    self.pick_engine(fiber.len(), v_var)?;
                    self.pick_engine(u_count, u_var)?;
                }
                DecodeStrategy::TreatAsNoise => {
                    self.pick_engine(u_count, u_var)?;
                }
                DecodeStrategy::Simultaneous => {
                    let pairs = u_count as u128 * fiber.len() as u128;
                    if pairs > self.caps.candidates as u128 {
                        return Err(Error::ResourceCap {
                            what: "joint decoding candidate pairs".to_string(),
                            needed: pairs,
                            cap: self.caps.candidates,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn pick_engine(&self, count: u64, variance: f64) -> Result<Engine> {
        if count <= self.enum_threshold.min(self.caps.candidates) {
            return Ok(Engine::Enumerate);
        }
        if self.codebook_mode == CodebookMode::Fresh && variance > 0.0 {
            return Ok(Engine::Ensemble);
        }
        if count <= self.caps.candidates {
            return Ok(Engine::Enumerate);
        }
        Err(Error::ResourceCap {
            what: "decoding candidates".to_string(),
            needed: count as u128,
            cap: self.caps.candidates,
        })
    }

    fn layer_sources_for_trial(&self, trial: u64) -> Result<LayerSources> {
        let book_trial = match self.codebook_mode {
            CodebookMode::Fresh => trial,
            CodebookMode::Fixed => u64::MAX,
        };
        let msg = &self.messages;
        let n = msg.blocklength();
        let a = self.split.alpha();
        let p = self.channel.power();
        let u_seed = derive_seed(
            self.seed,
            purpose::CODEBOOK,
            (self.scheme.tag() << 8) | LAYER_U,
            book_trial,
        );
        let v_seed = derive_seed(
            self.seed,
            purpose::CODEBOOK,
            (self.scheme.tag() << 8) | LAYER_V,
            book_trial,
        );
        Ok(LayerSources {
            u: CodewordSource::new(msg.bits(1), n, a * p, u_seed)?,
            v: CodewordSource::new(v_index_bits(self.scheme, msg), n, (1.0 - a) * p, v_seed)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Engine {
    Enumerate,
    Ensemble,
}

/// Ensemble-stream tags for receiver 1's two stages.
const STAGE_V: u64 = 0;
const STAGE_U: u64 = 1;

// ---------------------------------------------------------------------------
// Statistics containers
// ---------------------------------------------------------------------------

/// Block-error statistics of one receiver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReceiverStats {
    pub receiver: u8,
    /// Sum of the target rates of the messages this receiver wants.
    pub target_rate: f64,
    /// Sum of the realized rates `k_j / n` of those messages.
    pub realized_rate: f64,
    pub errors: u64,
    pub trials: u64,
    pub err_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Stage-level breakdown for receiver 1. `v_*` counts second-layer
/// decisions; `u_*` counts first-layer decisions, which under successive
/// cancellation are only taken after a correct second-layer stage.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LayerStats {
    pub v_errors: u64,
    pub v_trials: u64,
    pub u_errors: u64,
    pub u_trials: u64,
}

/// Output of [`run_trials`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialStats {
    pub scheme: SchemeId,
    pub strategy: DecodeStrategy,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub codebook_mode: CodebookMode,
    pub zero_noise: bool,
    pub receivers: Vec<ReceiverStats>,
    pub rx1_layers: LayerStats,
}

impl TrialStats {
    pub fn receiver(&self, rx: usize) -> &ReceiverStats {
        &self.receivers[rx - 1]
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    rx_errors: [u64; 3],
    layers: LayerStats,
}

impl Counts {
    fn add(mut self, other: Counts) -> Counts {
        for (a, b) in self.rx_errors.iter_mut().zip(other.rx_errors) {
            *a += b;
        }
        self.layers.v_errors += other.layers.v_errors;
        self.layers.v_trials += other.layers.v_trials;
        self.layers.u_errors += other.layers.u_errors;
        self.layers.u_trials += other.layers.u_trials;
        self
    }
}

// ---------------------------------------------------------------------------
// Trial execution
// ---------------------------------------------------------------------------

fn squared_distance(y: &[f64], c: &[f64]) -> f64 {
    y.iter()
        .zip(c)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// Runs one nearest-codeword stage and reports whether it picked the true
/// index, using the engine chosen by the scenario's thresholds.
#[allow(clippy::too_many_arguments)]
fn stage_correct(
    s: &Scenario,
    trial: u64,
    receiver: usize,
    stage: u64,
    y: &[f64],
    book: &CodewordSource,
    candidates: &CandidateSet,
    true_index: u64,
) -> Result<bool> {
    match s.pick_engine(candidates.len(), book.variance())? {
        Engine::Enumerate => Ok(ml_decode(y, book, candidates, s.caps.candidates)? == true_index),
        Engine::Ensemble => {
            let n = book.blocklength() as f64;
            let var = book.variance();
            let mut cw = vec![0.0; book.blocklength()];
            book.codeword_into(true_index, &mut cw);
            let true_dist = squared_distance(y, &cw);
            let y_sq: f64 = y.iter().map(|v| v * v).sum();
            let q = noncentral_chi2_cdf(true_dist / var, n, y_sq / var);
            let p_correct = if q >= 1.0 {
                0.0
            } else {
                ((candidates.len() - 1) as f64 * (-q).ln_1p()).exp()
            };
            let u: f64 = derive_rng(
                s.seed,
                purpose::ENSEMBLE,
                trial,
                ((receiver as u64) << 8) | stage,
            )
            .random();
            Ok(u < p_correct)
        }
    }
}

fn run_one_trial(s: &Scenario, trial: u64) -> Result<Counts> {
    let msg = &s.messages;
    let n = msg.blocklength();
    let scheme = s.scheme;

    let mut message_rng = derive_rng(s.seed, purpose::MESSAGES, trial, 0);
    let values: Vec<u64> = (1..=msg.message_count())
        .map(|j| {
            let k = msg.bits(j);
            if k == 0 {
                0
            } else {
                message_rng.random_range(0..(1u64 << k))
            }
        })
        .collect();

    let sources = s.layer_sources_for_trial(trial)?;
    let x = encode_with_sources(scheme, msg, &sources, &values)?;
    let true_v = v_composite_index(scheme, msg, &values)?;
    let true_u = values[0];

    let noise = if s.zero_noise {
        None
    } else {
        let noise_seed = derive_seed(s.seed, purpose::TRIAL_NOISE, trial, 0);
        Some(sample_noise_independent(&s.channel, n, noise_seed)?)
    };

    let mut counts = Counts::default();
    for rx in 1..=scheme.receivers() {
        let y = match &noise {
            Some(z) => transmit(&x, z, rx)?,
            None => x.clone(),
        };
        let known: Vec<(usize, u64)> = scheme
            .knows(rx)
            .iter()
            .map(|&id| (id, values[id - 1]))
            .collect();

        if rx >= 2 {
            let fiber = candidate_set(scheme, rx, msg, &known)?;
            let ok = stage_correct(s, trial, rx, STAGE_V, &y, &sources.v, &fiber, true_v)?;
            if !ok {
                counts.rx_errors[rx - 1] += 1;
            }
            continue;
        }

        match s.strategy {
            DecodeStrategy::SuccessiveCancel => {
                let fiber = candidate_set(scheme, 1, msg, &known)?;
                let v_ok = stage_correct(s, trial, 1, STAGE_V, &y, &sources.v, &fiber, true_v)?;
                counts.layers.v_trials += 1;
                let mut block_err = !v_ok;
                if v_ok {
                    let mut v_cw = vec![0.0; n];
                    sources.v.codeword_into(true_v, &mut v_cw);
                    let residual: Vec<f64> = y.iter().zip(&v_cw).map(|(a, b)| a - b).collect();
                    let u_all = CandidateSet::all(msg.bits(1));
                    let u_ok = stage_correct(
                        s, trial, 1, STAGE_U, &residual, &sources.u, &u_all, true_u,
                    )?;
                    counts.layers.u_trials += 1;
                    if !u_ok {
                        counts.layers.u_errors += 1;
                        block_err = true;
                    }
                } else {
                    counts.layers.v_errors += 1;
                }
                if block_err {
                    counts.rx_errors[0] += 1;
                }
            }
            DecodeStrategy::TreatAsNoise => {
                let u_all = CandidateSet::all(msg.bits(1));
                let u_ok = stage_correct(s, trial, 1, STAGE_U, &y, &sources.u, &u_all, true_u)?;
                counts.layers.u_trials += 1;
                if !u_ok {
                    counts.layers.u_errors += 1;
                    counts.rx_errors[0] += 1;
                }
            }
            DecodeStrategy::Simultaneous => {
                let outcome = decode_receiver(
                    scheme,
                    1,
                    &y,
                    &sources.u,
                    &sources.v,
                    msg,
                    &known,
                    DecodeStrategy::Simultaneous,
                    &s.caps,
                )?;
                counts.layers.v_trials += 1;
                counts.layers.u_trials += 1;
                if outcome.v_composite != Some(true_v) {
                    counts.layers.v_errors += 1;
                }
                if outcome.u_index != Some(true_u) {
                    counts.layers.u_errors += 1;
                    counts.rx_errors[0] += 1;
                }
            }
        }
    }
    Ok(counts)
}

/// Runs `s.trials` independent trials and returns per-receiver block-error
/// statistics with 95% Wilson intervals. Deterministic in the scenario.
pub fn run_trials(s: &Scenario) -> Result<TrialStats> {
    s.validate()?;
    let counts = (0..s.trials)
        .into_par_iter()
        .map(|t| run_one_trial(s, t))
        .try_reduce(Counts::default, |a, b| Ok(a.add(b)))?;

    let receivers = (1..=s.scheme.receivers())
        .map(|rx| {
            let errors = counts.rx_errors[rx - 1];
            let (ci_lo, ci_hi) = wilson_interval(errors, s.trials);
            let wants = s.scheme.wants(rx);
            ReceiverStats {
                receiver: rx as u8,
                target_rate: wants.iter().map(|&id| s.target_rates[id - 1]).sum(),
                realized_rate: wants.iter().map(|&id| s.messages.rate(id)).sum(),
                errors,
                trials: s.trials,
                err_rate: errors as f64 / s.trials as f64,
                ci_lo,
                ci_hi,
            }
        })
        .collect();

    Ok(TrialStats {
        scheme: s.scheme,
        strategy: s.strategy,
        n: s.messages.blocklength(),
        trials: s.trials,
        seed: s.seed,
        codebook_mode: s.codebook_mode,
        zero_noise: s.zero_noise,
        receivers,
        rx1_layers: counts.layers,
    })
}

// ---------------------------------------------------------------------------
// Blocklength sweeps
// ---------------------------------------------------------------------------

/// Tolerated gap between a target rate and its realization `round(n*R)/n`.
pub const SWEEP_RATE_TOLERANCE: f64 = 0.02;

/// Re-runs a scenario at each blocklength, realizing the target rates as
/// `k_j = round(n * R_j)` and rejecting blocklengths whose realization is
/// off by more than [`SWEEP_RATE_TOLERANCE`] bits.
pub fn sweep_blocklength(base: &Scenario, n_list: &[usize]) -> Result<Vec<(usize, TrialStats)>> {
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let bits: Vec<u32> = base
            .target_rates
            .iter()
            .map(|&r| (r * n as f64).round() as u32)
            .collect();
        for (j, &k) in bits.iter().enumerate() {
            let realized = k as f64 / n as f64;
            if (realized - base.target_rates[j]).abs() > SWEEP_RATE_TOLERANCE + 1e-12 {
                return Err(Error::invalid(format!(
                    "blocklength {n} cannot realize rate {} for message {} within {} bits",
                    base.target_rates[j],
                    j + 1,
                    SWEEP_RATE_TOLERANCE
                )));
            }
        }
        let scenario = Scenario {
            messages: MessageConfig::new(n, bits)?,
            ..base.clone()
        };
        out.push((n, run_trials(&scenario)?));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Paired-scheme comparison
// ---------------------------------------------------------------------------

/// Per-receiver outcome of a two-proportion comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReceiverComparison {
    pub receiver: u8,
    pub err_rate_a: f64,
    pub err_rate_b: f64,
    pub errors_a: u64,
    pub errors_b: u64,
    pub diff: f64,
    pub pooled_se: f64,
    /// `|p_a - p_b| < 3 * pooled standard error` (exact equality when the
    /// pooled error degenerates to zero).
    pub indistinguishable: bool,
    /// Error counts agree exactly.
    pub identical: bool,
}

/// Verdict of [`compare_schemes`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareVerdict {
    pub scheme_a: SchemeId,
    pub scheme_b: SchemeId,
    pub trials: u64,
    pub receivers: Vec<ReceiverComparison>,
    /// `"indistinguishable"` or `"distinguishable: receiver i[, ...]"`.
    pub verdict: String,
}

impl CompareVerdict {
    pub fn indistinguishable(&self) -> bool {
        self.receivers.iter().all(|r| r.indistinguishable)
    }
}

/// Runs two scenarios that differ only in the coding scheme and tests, per
/// receiver, whether the block-error rates are statistically
/// indistinguishable at three pooled standard errors.
pub fn compare_schemes(a: &Scenario, b: &Scenario) -> Result<CompareVerdict> {
    if a.channel != b.channel
        || a.messages != b.messages
        || a.split != b.split
        || a.strategy != b.strategy
        || a.trials != b.trials
        || a.codebook_mode != b.codebook_mode
        || a.zero_noise != b.zero_noise
        || a.scheme.receivers() != b.scheme.receivers()
    {
        return Err(Error::invalid(
            "compared scenarios must differ only in the coding scheme",
        ));
    }
    let stats_a = run_trials(a)?;
    let stats_b = run_trials(b)?;
    let mut distinguishable = Vec::new();
    let receivers = stats_a
        .receivers
        .iter()
        .zip(&stats_b.receivers)
        .map(|(ra, rb)| {
            let diff = ra.err_rate - rb.err_rate;
            let se = pooled_se(ra.errors, ra.trials, rb.errors, rb.trials);
            let indistinguishable = if se == 0.0 {
                ra.errors == rb.errors
            } else {
                diff.abs() < 3.0 * se
            };
            if !indistinguishable {
                distinguishable.push(format!("receiver {}", ra.receiver));
            }
            ReceiverComparison {
                receiver: ra.receiver,
                err_rate_a: ra.err_rate,
                err_rate_b: rb.err_rate,
                errors_a: ra.errors,
                errors_b: rb.errors,
                diff,
                pooled_se: se,
                indistinguishable,
                identical: ra.errors == rb.errors,
            }
        })
        .collect();
    let verdict = if distinguishable.is_empty() {
        "indistinguishable".to_string()
    } else {
        format!("distinguishable: {}", distinguishable.join(", "))
    };
    Ok(CompareVerdict {
        scheme_a: a.scheme,
        scheme_b: b.scheme,
        trials: a.trials,
        receivers,
        verdict,
    })
}
