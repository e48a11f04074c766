//! Side-information-aware maximum-likelihood decoding.
//!
//! Decoding is nearest-codeword in Euclidean distance, which is the ML rule
//! for Gaussian noise and equiprobable candidates. What varies per receiver
//! is the *candidate set*: the composite indices of the second layer that
//! are consistent with the receiver's side information. Receivers 2 and 3
//! only ever search their own fiber while treating the first layer as noise;
//! receiver 1 resolves the whole second layer and can do so by successive
//! cancellation, by treating it as noise, or by decoding both layers
//! simultaneously.
//!
//! Candidate enumeration is brute force, guarded by a configurable cap.

use crate::codec::{self, Codewords, MessageConfig, SchemeId};
use crate::{Caps, Error, Result};
use serde::{Deserialize, Serialize};

/// How receiver 1 handles the second layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeStrategy {
    /// Decode the second layer, subtract it, then decode the first.
    SuccessiveCancel,
    /// Decode the first layer, modeling the second as extra noise.
    TreatAsNoise,
    /// Jointly search the product of both layers' candidates.
    Simultaneous,
}

impl DecodeStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            DecodeStrategy::SuccessiveCancel => "successive_cancel",
            DecodeStrategy::TreatAsNoise => "treat_as_noise",
            DecodeStrategy::Simultaneous => "simultaneous",
        }
    }
}

/// Known message values as `(1-based id, value)` pairs.
pub type Known<'a> = &'a [(usize, u64)];

fn known_value(known: Known, id: usize) -> Option<u64> {
    known.iter().find(|(k, _)| *k == id).map(|(_, v)| *v)
}

// ---------------------------------------------------------------------------
// Candidate sets
// ---------------------------------------------------------------------------

/// One field of a composite index restricted by side information. The field
/// ranges over `{zext(x) ^ offset : 0 <= x < 2^var_bits}`; a fixed field has
/// `var_bits = 0` and a free one has `var_bits = width`, `offset = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldCandidates {
    pub width: u32,
    pub var_bits: u32,
    pub offset: u64,
}

impl FieldCandidates {
    fn free(width: u32) -> Self {
        FieldCandidates {
            width,
            var_bits: width,
            offset: 0,
        }
    }

    fn fixed(width: u32, value: u64) -> Self {
        FieldCandidates {
            width,
            var_bits: 0,
            offset: value,
        }
    }

    fn coset(width: u32, var_bits: u32, offset: u64) -> Self {
        FieldCandidates {
            width,
            var_bits,
            offset,
        }
    }
}

/// The admissible second-layer composite indices for one receiver: exactly
/// the fiber consistent with its side information.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    fields: Vec<FieldCandidates>,
}

impl CandidateSet {
    /// The unrestricted set over a `width`-bit index space.
    pub fn all(width: u32) -> Self {
        CandidateSet {
            fields: vec![FieldCandidates::free(width)],
        }
    }

    fn from_fields(fields: Vec<FieldCandidates>) -> Self {
        CandidateSet { fields }
    }

    /// Number of admissible composite indices.
    pub fn len(&self) -> u64 {
        1u64 << self.free_bits()
    }

    pub fn is_empty(&self) -> bool {
        false // a candidate set always contains at least one index
    }

    /// Total width of the composite index in bits.
    pub fn index_bits(&self) -> u32 {
        self.fields.iter().map(|f| f.width).sum()
    }

    /// Bits of genuine uncertainty: `len() == 2^free_bits()`.
    pub fn free_bits(&self) -> u32 {
        self.fields.iter().map(|f| f.var_bits).sum()
    }

    /// The `rank`-th admissible composite index (`rank < len()`).
    pub fn index_at(&self, mut rank: u64) -> u64 {
        debug_assert!(rank < self.len());
        let mut composite = 0u64;
        // Consume rank bits from the least-significant (last) field upward,
        // then assemble fields big-endian.
        let mut values = vec![0u64; self.fields.len()];
        for (slot, f) in values.iter_mut().zip(&self.fields).rev() {
            let x = rank & ((1u64 << f.var_bits) - 1);
            rank >>= f.var_bits;
            *slot = x ^ f.offset;
        }
        for (v, f) in values.iter().zip(&self.fields) {
            composite = (composite << f.width) | v;
        }
        composite
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len()).map(move |r| self.index_at(r))
    }

    pub fn contains(&self, composite: u64) -> bool {
        let mut rest = composite;
        let mut ok = true;
        for f in self.fields.iter().rev() {
            let value = rest & ((1u64 << f.width) - 1);
            rest >>= f.width;
            // value must be offset ^ x with x < 2^var_bits
            ok &= (value ^ f.offset) >> f.var_bits == 0;
        }
        ok && rest == 0
    }
}

fn validate_known(scheme: SchemeId, receiver: usize, msg: &MessageConfig, known: Known) -> Result<()> {
    let expected = scheme.knows(receiver);
    if known.len() != expected.len()
        || expected.iter().any(|id| known_value(known, *id).is_none())
    {
        return Err(Error::invalid(format!(
            "receiver {receiver} of {} knows exactly {expected:?}, got {:?}",
            scheme.name(),
            known.iter().map(|(id, _)| *id).collect::<Vec<_>>()
        )));
    }
    for &(id, value) in known {
        let width = msg.bits(id);
        if width >= 64 || value >> width != 0 {
            return Err(Error::invalid(format!(
                "known message {id} value {value} does not fit in {width} bits"
            )));
        }
    }
    Ok(())
}

/// Builds the second-layer candidate set of one receiver given its side
/// information.
pub fn candidate_set(
    scheme: SchemeId,
    receiver: usize,
    msg: &MessageConfig,
    known: Known,
) -> Result<CandidateSet> {
    msg.matches_scheme(scheme)?;
    if receiver == 0 || receiver > scheme.receivers() {
        return Err(Error::invalid(format!(
            "{} has receivers 1..={}, got {receiver}",
            scheme.name(),
            scheme.receivers()
        )));
    }
    validate_known(scheme, receiver, msg, known)?;
    let fields = match (scheme, receiver) {
        (SchemeId::ThreeRxIndex, 1) => {
            vec![FieldCandidates::free(msg.bits(2).max(msg.bits(3)))]
        }
        (SchemeId::ThreeRxIndex, 2) => {
            let w = msg.bits(2).max(msg.bits(3));
            vec![FieldCandidates::coset(
                w,
                msg.bits(2),
                known_value(known, 3).unwrap(),
            )]
        }
        (SchemeId::ThreeRxIndex, 3) => {
            let w = msg.bits(2).max(msg.bits(3));
            vec![FieldCandidates::coset(
                w,
                msg.bits(3),
                known_value(known, 2).unwrap(),
            )]
        }
        (SchemeId::ThreeRxMultiplex, 1) => vec![
            FieldCandidates::free(msg.bits(2)),
            FieldCandidates::free(msg.bits(3)),
        ],
        (SchemeId::ThreeRxMultiplex, 2) => vec![
            FieldCandidates::free(msg.bits(2)),
            FieldCandidates::fixed(msg.bits(3), known_value(known, 3).unwrap()),
        ],
        (SchemeId::ThreeRxMultiplex, 3) => vec![
            FieldCandidates::fixed(msg.bits(2), known_value(known, 2).unwrap()),
            FieldCandidates::free(msg.bits(3)),
        ],
        (SchemeId::TwoRxXor, rx) => {
            let w45 = msg.bits(4).max(msg.bits(5));
            let xor_field = if rx == 1 {
                // knows M4, uncertain in M5
                FieldCandidates::coset(w45, msg.bits(5), known_value(known, 4).unwrap())
            } else {
                FieldCandidates::coset(w45, msg.bits(4), known_value(known, 5).unwrap())
            };
            vec![
                FieldCandidates::free(msg.bits(2)),
                FieldCandidates::free(msg.bits(3)),
                xor_field,
            ]
        }
        (SchemeId::TwoRxMultiplex, rx) => {
            let (m4, m5) = if rx == 1 {
                (
                    FieldCandidates::fixed(msg.bits(4), known_value(known, 4).unwrap()),
                    FieldCandidates::free(msg.bits(5)),
                )
            } else {
                (
                    FieldCandidates::free(msg.bits(4)),
                    FieldCandidates::fixed(msg.bits(5), known_value(known, 5).unwrap()),
                )
            };
            vec![
                FieldCandidates::free(msg.bits(2)),
                FieldCandidates::free(msg.bits(3)),
                m4,
                m5,
            ]
        }
        _ => unreachable!("receiver index validated above"),
    };
    Ok(CandidateSet::from_fields(fields))
}

// ---------------------------------------------------------------------------
// Maximum-likelihood decoding
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

/// Nearest-codeword decoding over a candidate set. Ties break to the lowest
/// composite index.
pub fn ml_decode(
    y: &[f64],
    book: &impl Codewords,
    candidates: &CandidateSet,
    candidate_cap: u64,
) -> Result<u64> {
    if candidates.is_empty() {
        return Err(Error::invalid("empty candidate set"));
    }
    if candidates.len() > candidate_cap {
        return Err(Error::ResourceCap {
            what: "decoding candidates".to_string(),
            needed: candidates.len() as u128,
            cap: candidate_cap,
        });
    }
    if y.len() != book.blocklength() {
        return Err(Error::invalid(format!(
            "received block has {} symbols, codebook expects {}",
            y.len(),
            book.blocklength()
        )));
    }
    let mut buf = vec![0.0; y.len()];
    let mut best_index = u64::MAX;
    let mut best_dist = f64::INFINITY;
    for index in candidates.iter() {
        book.codeword_into(index, &mut buf);
        let d = squared_distance(y, &buf);
        if d < best_dist || (d == best_dist && index < best_index) {
            best_dist = d;
            best_index = index;
        }
    }
    Ok(best_index)
}

// ---------------------------------------------------------------------------
// Full per-receiver decoding
// ---------------------------------------------------------------------------

/// Result of decoding one receiver's observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// Decoded wanted messages as `(1-based id, value)`, in wants order.
    pub wanted: Vec<(usize, u64)>,
    /// Second-layer composite decision, when that layer was decoded.
    pub v_composite: Option<u64>,
    /// First-layer index decision, when that layer was decoded.
    pub u_index: Option<u64>,
}

/// Recovers the wanted messages carried by the second layer from a decoded
/// composite, using the receiver's side information to invert any XOR.
pub fn recover_from_composite(
    scheme: SchemeId,
    receiver: usize,
    msg: &MessageConfig,
    known: Known,
    composite: u64,
) -> Vec<(usize, u64)> {
    match (scheme, receiver) {
        (SchemeId::ThreeRxIndex, 2) => vec![(2, composite ^ known_value(known, 3).unwrap())],
        (SchemeId::ThreeRxIndex, 3) => vec![(3, composite ^ known_value(known, 2).unwrap())],
        (SchemeId::ThreeRxMultiplex, 2) | (SchemeId::ThreeRxMultiplex, 3) => {
            let parts = codec::demultiplex(composite, &codec::v_field_widths(scheme, msg));
            vec![(receiver, parts[receiver - 2])]
        }
        (SchemeId::TwoRxXor, 1) => {
            let parts = codec::demultiplex(composite, &codec::v_field_widths(scheme, msg));
            vec![(3, parts[1]), (5, parts[2] ^ known_value(known, 4).unwrap())]
        }
        (SchemeId::TwoRxXor, 2) => {
            let parts = codec::demultiplex(composite, &codec::v_field_widths(scheme, msg));
            vec![
                (2, parts[0]),
                (3, parts[1]),
                (4, parts[2] ^ known_value(known, 5).unwrap()),
            ]
        }
        (SchemeId::TwoRxMultiplex, 1) => {
            let parts = codec::demultiplex(composite, &codec::v_field_widths(scheme, msg));
            vec![(3, parts[1]), (5, parts[3])]
        }
        (SchemeId::TwoRxMultiplex, 2) => {
            let parts = codec::demultiplex(composite, &codec::v_field_widths(scheme, msg));
            vec![(2, parts[0]), (3, parts[1]), (4, parts[2])]
        }
        _ => vec![],
    }
}

fn subtract_codeword(y: &[f64], book: &impl Codewords, index: u64) -> Vec<f64> {
    let mut cw = vec![0.0; y.len()];
    book.codeword_into(index, &mut cw);
    y.iter().zip(&cw).map(|(a, b)| a - b).collect()
}

/// Decodes everything a receiver wants from its observation `y`.
///
/// `strategy` selects receiver 1's handling of the second layer in the
/// three-receiver schemes; the two-receiver schemes are defined by
/// successive cancellation and reject other strategies. Receivers 2 and 3
/// always decode their second-layer fiber treating the first layer as noise.
#[allow(clippy::too_many_arguments)]
pub fn decode_receiver(
    scheme: SchemeId,
    receiver: usize,
    y: &[f64],
    u_book: &impl Codewords,
    v_book: &impl Codewords,
    msg: &MessageConfig,
    known: Known,
    strategy: DecodeStrategy,
    caps: &Caps,
) -> Result<DecodeOutcome> {
    msg.matches_scheme(scheme)?;
    validate_known(scheme, receiver, msg, known)?;
    let cap = caps.candidates;

    if receiver >= 2 {
        let fiber = candidate_set(scheme, receiver, msg, known)?;
        let composite = ml_decode(y, v_book, &fiber, cap)?;
        return Ok(DecodeOutcome {
            wanted: recover_from_composite(scheme, receiver, msg, known, composite),
            v_composite: Some(composite),
            u_index: None,
        });
    }

    // Receiver 1.
    let two_rx = scheme.receivers() == 2;
    if two_rx && strategy != DecodeStrategy::SuccessiveCancel {
        return Err(Error::invalid(
            "two-receiver schemes decode by successive cancellation only",
        ));
    }
    let u_all = CandidateSet::all(msg.bits(1));
    match strategy {
        DecodeStrategy::SuccessiveCancel => {
            let fiber = candidate_set(scheme, 1, msg, known)?;
            let v_hat = ml_decode(y, v_book, &fiber, cap)?;
            let residual = subtract_codeword(y, v_book, v_hat);
            let u_hat = ml_decode(&residual, u_book, &u_all, cap)?;
            let mut wanted = vec![(1, u_hat)];
            wanted.extend(recover_from_composite(scheme, 1, msg, known, v_hat));
            Ok(DecodeOutcome {
                wanted,
                v_composite: Some(v_hat),
                u_index: Some(u_hat),
            })
        }
        DecodeStrategy::TreatAsNoise => {
            let u_hat = ml_decode(y, u_book, &u_all, cap)?;
            Ok(DecodeOutcome {
                wanted: vec![(1, u_hat)],
                v_composite: None,
                u_index: Some(u_hat),
            })
        }
        DecodeStrategy::Simultaneous => {
            let fiber = candidate_set(scheme, 1, msg, known)?;
            let pairs = u_all.len() as u128 * fiber.len() as u128;
            if pairs > cap as u128 {
                return Err(Error::ResourceCap {
                    what: "joint decoding candidate pairs".to_string(),
                    needed: pairs,
                    cap,
                });
            }
            let n = y.len();
            let mut u_cw = vec![0.0; n];
            let mut v_cw = vec![0.0; n];
            let mut best = (f64::INFINITY, u64::MAX, u64::MAX);
            for u_idx in u_all.iter() {
                u_book.codeword_into(u_idx, &mut u_cw);
                let residual: Vec<f64> = y.iter().zip(&u_cw).map(|(a, b)| a - b).collect();
                for v_idx in fiber.iter() {
                    v_book.codeword_into(v_idx, &mut v_cw);
                    let d = squared_distance(&residual, &v_cw);
                    if d < best.0 || (d == best.0 && (u_idx, v_idx) < (best.1, best.2)) {
                        best = (d, u_idx, v_idx);
                    }
                }
            }
            Ok(DecodeOutcome {
                wanted: vec![(1, best.1)],
                v_composite: Some(best.2),
                u_index: Some(best.1),
            })
        }
    }
}
