//! Rate regions and finite-blocklength Monte Carlo for AWGN broadcast
//! channels with receiver message side information.
//!
//! The library models a degraded `L`-receiver AWGN broadcast channel in which
//! some receivers already hold a subset of the transmitted messages. It
//! provides:
//!
//! * [`channel`] — the channel model, power constraint and seeded noise
//!   samplers (independent and physically-degraded chain forms);
//! * [`regions`] — the three-receiver rate region achieved with an XOR
//!   (index-coded) second layer, the regions achieved without it, and
//!   membership / witness / gap queries over them;
//! * [`codec`] — Gaussian random codebooks plus the XOR, multiplexing and
//!   superposition encoders for the two- and three-receiver schemes;
//! * [`decode`] — side-information-aware maximum-likelihood decoding with
//!   successive-cancellation, treat-as-noise and simultaneous variants;
//! * [`montecarlo`] — a deterministic, parallel trial harness estimating
//!   per-receiver block-error rates, with paired-scheme comparison;
//! * [`cli`] — the `bcsidelab` command-line surface and its file formats.
//!
//! All randomized operations are pure functions of an explicit `u64` seed,
//! so every result in the crate is reproducible bit-for-bit.

pub mod channel;
pub mod cli;
pub mod codec;
pub mod decode;
mod error;
pub mod montecarlo;
pub mod numfmt;
pub mod regions;
pub mod seeding;
pub mod stats;

pub use channel::{capacity, ChannelConfig, NoiseRealization};
pub use codec::{Codebook, CodewordSource, Codewords, MessageConfig, SchemeId};
pub use decode::{CandidateSet, DecodeStrategy};
pub use error::Error;
pub use montecarlo::{CodebookMode, Scenario, TrialStats};
pub use regions::{PowerSplit, RateTriple, StrategyRegion};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Resource limits for codebook materialization and candidate enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Caps {
    /// Largest codebook that may be materialized as a table (entries).
    pub codebook_entries: u64,
    /// Largest candidate set a decoder may enumerate.
    pub candidates: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            codebook_entries: 1 << 24,
            candidates: 1 << 20,
        }
    }
}
