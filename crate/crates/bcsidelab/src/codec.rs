//! Gaussian random codebooks and the layered encoders.
//!
//! A transmitted block is the elementwise sum of two layer codewords,
//! `x = u(M1) + v(composite)`, where `u` carries receiver 1's private message
//! at power `a*P` and `v` carries the remaining messages at power `(1-a)*P`.
//! The composite index of the second layer is what distinguishes the
//! schemes:
//!
//! * [`SchemeId::ThreeRxIndex`] — `v(M2 xor M3)`, a book of
//!   `2^max(k2,k3)` codewords;
//! * [`SchemeId::ThreeRxMultiplex`] — `v([M2, M3])`, a book of `2^(k2+k3)`
//!   codewords;
//! * [`SchemeId::TwoRxXor`] — `v([M2, M3, M4 xor M5])` for the two-receiver
//!   configuration in which receiver 1 wants `{M1, M3, M5}` and knows `M4`
//!   while receiver 2 wants `{M2, M3, M4}` and knows `M5`;
//! * [`SchemeId::TwoRxMultiplex`] — `v([M2, M3, M4, M5])`, the same
//!   configuration without the XOR.
//!
//! Message values are zero-based: message `j` with `k_j` assigned bits takes
//! values in `{0, ..., 2^k_j - 1}` and its rate is `k_j / n` bits per use.
//! XOR zero-extends the shorter operand, so the XOR of two messages occupies
//! `max` of their widths. Codewords are i.i.d. `N(0, v)` symbols drawn from
//! a per-index stream, so a codebook never has to be materialized to read
//! one entry.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelConfig;
use crate::regions::PowerSplit;
use crate::seeding::{derive_rng, purpose};
use crate::{Caps, Error, Result};

/// Widest composite index the crate will form, in bits.
pub const MAX_COMPOSITE_BITS: u32 = 60;

// ---------------------------------------------------------------------------
// Schemes and message configuration
// ---------------------------------------------------------------------------

/// The four layered transmission schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeId {
    /// Two receivers, XOR of `M4` and `M5` inside the multiplexed layer.
    TwoRxXor,
    /// Two receivers, all four shared messages multiplexed.
    TwoRxMultiplex,
    /// Three receivers, XOR of `M2` and `M3` as the second layer.
    ThreeRxIndex,
    /// Three receivers, `M2` and `M3` multiplexed as the second layer.
    ThreeRxMultiplex,
}

impl SchemeId {
    pub fn receivers(&self) -> usize {
        match self {
            SchemeId::TwoRxXor | SchemeId::TwoRxMultiplex => 2,
            SchemeId::ThreeRxIndex | SchemeId::ThreeRxMultiplex => 3,
        }
    }

    pub fn message_count(&self) -> usize {
        match self {
            SchemeId::TwoRxXor | SchemeId::TwoRxMultiplex => 5,
            SchemeId::ThreeRxIndex | SchemeId::ThreeRxMultiplex => 3,
        }
    }

    /// 1-based ids of the messages a receiver must decode.
    pub fn wants(&self, receiver: usize) -> &'static [usize] {
        match (self, receiver) {
            (SchemeId::TwoRxXor | SchemeId::TwoRxMultiplex, 1) => &[1, 3, 5],
            (SchemeId::TwoRxXor | SchemeId::TwoRxMultiplex, 2) => &[2, 3, 4],
            (SchemeId::ThreeRxIndex | SchemeId::ThreeRxMultiplex, 1) => &[1],
            (SchemeId::ThreeRxIndex | SchemeId::ThreeRxMultiplex, 2) => &[2],
            (SchemeId::ThreeRxIndex | SchemeId::ThreeRxMultiplex, 3) => &[3],
            _ => &[],
        }
    }

    /// 1-based ids of the messages a receiver holds a priori.
    pub fn knows(&self, receiver: usize) -> &'static [usize] {
        match (self, receiver) {
            (SchemeId::TwoRxXor | SchemeId::TwoRxMultiplex, 1) => &[4],
            (SchemeId::TwoRxXor | SchemeId::TwoRxMultiplex, 2) => &[5],
            (SchemeId::ThreeRxIndex | SchemeId::ThreeRxMultiplex, 2) => &[3],
            (SchemeId::ThreeRxIndex | SchemeId::ThreeRxMultiplex, 3) => &[2],
            _ => &[],
        }
    }

    /// Stable small integer used in stream derivation.
    pub(crate) fn tag(&self) -> u64 {
        match self {
            SchemeId::TwoRxXor => 0,
            SchemeId::TwoRxMultiplex => 1,
            SchemeId::ThreeRxIndex => 2,
            SchemeId::ThreeRxMultiplex => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeId::TwoRxXor => "two_rx_xor",
            SchemeId::TwoRxMultiplex => "two_rx_multiplex",
            SchemeId::ThreeRxIndex => "three_rx_index",
            SchemeId::ThreeRxMultiplex => "three_rx_multiplex",
        }
    }
}

/// Blocklength and per-message bit widths; message `j` has rate `k_j / n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageConfig {
    n: usize,
    bits: Vec<u32>,
}

impl MessageConfig {
    pub fn new(n: usize, bits: Vec<u32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("blocklength n must be >= 1"));
        }
        if bits.is_empty() {
            return Err(Error::invalid("at least one message is required"));
        }
        if bits.iter().any(|&k| k > MAX_COMPOSITE_BITS) {
            return Err(Error::invalid(format!(
                "per-message bit lengths are limited to {MAX_COMPOSITE_BITS}"
            )));
        }
        Ok(MessageConfig { n, bits })
    }

    /// Realizes target rates as bit lengths: `k_j = round(n * R_j)`.
    pub fn from_rates(n: usize, rates: &[f64]) -> Result<Self> {
        let bits = rates
            .iter()
            .map(|&r| {
                if !r.is_finite() || r < 0.0 {
                    return Err(Error::invalid(format!("rates must be >= 0, got {r}")));
                }
                Ok((r * n as f64).round() as u32)
            })
            .collect::<Result<Vec<u32>>>()?;
        MessageConfig::new(n, bits)
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    /// Bit width of a 1-based message id.
    pub fn bits(&self, message: usize) -> u32 {
        self.bits[message - 1]
    }

    pub fn bit_lengths(&self) -> &[u32] {
        &self.bits
    }

    pub fn message_count(&self) -> usize {
        self.bits.len()
    }

    /// Realized rate of a 1-based message id in bits per use.
    pub fn rate(&self, message: usize) -> f64 {
        self.bits(message) as f64 / self.n as f64
    }

    pub fn matches_scheme(&self, scheme: SchemeId) -> Result<()> {
        if self.bits.len() != scheme.message_count() {
            return Err(Error::invalid(format!(
                "{} expects {} messages, config has {}",
                scheme.name(),
                scheme.message_count(),
                self.bits.len()
            )));
        }
        let composite: u32 = v_field_widths(scheme, self).iter().sum();
        if composite > MAX_COMPOSITE_BITS {
            return Err(Error::invalid(format!(
                "second-layer composite of {composite} bits exceeds the \
                 {MAX_COMPOSITE_BITS}-bit limit"
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Index arithmetic
// ---------------------------------------------------------------------------

fn check_in_range(value: u64, width: u32, what: &str) -> Result<()> {
    if width >= 64 {
        return Err(Error::invalid("widths above 63 bits are not supported"));
    }
    if value >> width != 0 {
        return Err(Error::invalid(format!(
            "{what} {value} does not fit in {width} bits"
        )));
    }
    Ok(())
}

/// Bitwise XOR of two message values after zero-extending the shorter one;
/// the result occupies `max(k_a, k_b)` bits.
pub fn index_xor(a: u64, b: u64, widths: (u32, u32)) -> Result<u64> {
    check_in_range(a, widths.0, "message")?;
    check_in_range(b, widths.1, "message")?;
    Ok(a ^ b)
}

/// Bijectively concatenates message values, big-endian in declared order.
pub fn multiplex(indices: &[u64], widths: &[u32]) -> Result<u64> {
    if indices.len() != widths.len() {
        return Err(Error::invalid("one width per message index is required"));
    }
    let total: u64 = widths.iter().map(|&w| w as u64).sum();
    if total > MAX_COMPOSITE_BITS as u64 {
        return Err(Error::invalid(format!(
            "composite of {total} bits exceeds the {MAX_COMPOSITE_BITS}-bit limit"
        )));
    }
    let mut composite = 0u64;
    for (&idx, &w) in indices.iter().zip(widths) {
        check_in_range(idx, w, "message")?;
        composite = (composite << w) | idx;
    }
    Ok(composite)
}

/// Inverse of [`multiplex`].
pub fn demultiplex(composite: u64, widths: &[u32]) -> Vec<u64> {
    let mut out = vec![0u64; widths.len()];
    let mut rest = composite;
    for (slot, &w) in out.iter_mut().zip(widths).rev() {
        *slot = rest & ((1u64 << w) - 1);
        rest >>= w;
    }
    out
}

// ---------------------------------------------------------------------------
// Second-layer composite layout
// ---------------------------------------------------------------------------

/// Field widths of the second-layer composite, most significant first.
pub fn v_field_widths(scheme: SchemeId, msg: &MessageConfig) -> Vec<u32> {
    match scheme {
        SchemeId::TwoRxXor => vec![msg.bits(2), msg.bits(3), msg.bits(4).max(msg.bits(5))],
        SchemeId::TwoRxMultiplex => vec![msg.bits(2), msg.bits(3), msg.bits(4), msg.bits(5)],
        SchemeId::ThreeRxIndex => vec![msg.bits(2).max(msg.bits(3))],
        SchemeId::ThreeRxMultiplex => vec![msg.bits(2), msg.bits(3)],
    }
}

/// Total width of the second-layer composite in bits; the second-layer book
/// has `2^this` entries.
pub fn v_index_bits(scheme: SchemeId, msg: &MessageConfig) -> u32 {
    v_field_widths(scheme, msg).iter().sum()
}

/// Second-layer composite index for a full message assignment
/// (`messages[j-1]` is the value of message `j`).
pub fn v_composite_index(scheme: SchemeId, msg: &MessageConfig, messages: &[u64]) -> Result<u64> {
    msg.matches_scheme(scheme)?;
    if messages.len() != msg.message_count() {
        return Err(Error::invalid(format!(
            "{} expects {} message values, got {}",
            scheme.name(),
            msg.message_count(),
            messages.len()
        )));
    }
    for (j, &m) in messages.iter().enumerate() {
        check_in_range(m, msg.bits(j + 1), "message")?;
    }
    let widths = v_field_widths(scheme, msg);
    let fields: Vec<u64> = match scheme {
        SchemeId::TwoRxXor => vec![
            messages[1],
            messages[2],
            index_xor(messages[3], messages[4], (msg.bits(4), msg.bits(5)))?,
        ],
        SchemeId::TwoRxMultiplex => vec![messages[1], messages[2], messages[3], messages[4]],
        SchemeId::ThreeRxIndex => vec![index_xor(
            messages[1],
            messages[2],
            (msg.bits(2), msg.bits(3)),
        )?],
        SchemeId::ThreeRxMultiplex => vec![messages[1], messages[2]],
    };
    multiplex(&fields, &widths)
}

// ---------------------------------------------------------------------------
// Codebooks
// ---------------------------------------------------------------------------

/// Read access to the codewords of one layer book.
pub trait Codewords {
    /// Symbols per codeword.
    fn blocklength(&self) -> usize;

    /// Writes codeword `index` into `out` (`out.len() == blocklength()`).
    fn codeword_into(&self, index: u64, out: &mut [f64]);
}

/// Lazily evaluated codebook: entry `j` is a pure function of `(seed, j)`,
/// i.i.d. `N(0, variance)` across symbols and entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodewordSource {
    index_bits: u32,
    n: usize,
    variance: f64,
    seed: u64,
    normalize: bool,
}

impl CodewordSource {
    pub fn new(index_bits: u32, n: usize, variance: f64, seed: u64) -> Result<Self> {
        Self::with_normalization(index_bits, n, variance, seed, false)
    }

    /// As [`CodewordSource::new`], but rescales every codeword to energy
    /// exactly `n * variance` (per-codeword power constraint instead of the
    /// default in-expectation one).
    pub fn with_normalization(
        index_bits: u32,
        n: usize,
        variance: f64,
        seed: u64,
        normalize: bool,
    ) -> Result<Self> {
        if index_bits > MAX_COMPOSITE_BITS {
            return Err(Error::invalid(format!(
                "codebooks wider than {MAX_COMPOSITE_BITS} index bits are not supported"
            )));
        }
        if n == 0 {
            return Err(Error::invalid("blocklength n must be >= 1"));
        }
        if !variance.is_finite() || variance < 0.0 {
            return Err(Error::invalid(format!(
                "symbol variance must be finite and >= 0, got {variance}"
            )));
        }
        Ok(CodewordSource {
            index_bits,
            n,
            variance,
            seed,
            normalize,
        })
    }

    pub fn entries(&self) -> u64 {
        1u64 << self.index_bits
    }

    pub fn index_bits(&self) -> u32 {
        self.index_bits
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn codeword(&self, index: u64) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.codeword_into(index, &mut out);
        out
    }
}

impl Codewords for CodewordSource {
    fn blocklength(&self) -> usize {
        self.n
    }

    fn codeword_into(&self, index: u64, out: &mut [f64]) {
        debug_assert!(index < self.entries());
        debug_assert_eq!(out.len(), self.n);
        let mut rng = derive_rng(self.seed, purpose::CODEWORD, index, 0);
        let sigma = self.variance.sqrt();
        for slot in out.iter_mut() {
            *slot = sigma * rng.sample::<f64, _>(StandardNormal);
        }
        if self.normalize {
            let energy: f64 = out.iter().map(|x| x * x).sum();
            if energy > 0.0 {
                let scale = (self.n as f64 * self.variance / energy).sqrt();
                for slot in out.iter_mut() {
                    *slot *= scale;
                }
            }
        }
    }
}

/// A materialized table of `2^k` codewords with a declared symbol variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    source: CodewordSource,
    entries: Vec<f64>,
}

impl Codebook {
    /// Materializes a lazy source, subject to the codebook entry cap.
    pub fn materialize(source: CodewordSource, caps: &Caps) -> Result<Self> {
        if source.entries() > caps.codebook_entries {
            return Err(Error::ResourceCap {
                what: "codebook entries".to_string(),
                needed: source.entries() as u128,
                cap: caps.codebook_entries,
            });
        }
        let n = source.blocklength();
        let mut entries = vec![0.0; source.entries() as usize * n];
        for j in 0..source.entries() {
            source.codeword_into(j, &mut entries[j as usize * n..(j as usize + 1) * n]);
        }
        Ok(Codebook { source, entries })
    }

    pub fn entries(&self) -> u64 {
        self.source.entries()
    }

    pub fn variance(&self) -> f64 {
        self.source.variance()
    }

    pub fn codeword(&self, index: u64) -> &[f64] {
        let n = self.source.blocklength();
        &self.entries[index as usize * n..(index as usize + 1) * n]
    }
}

impl Codewords for Codebook {
    fn blocklength(&self) -> usize {
        self.source.blocklength()
    }

    fn codeword_into(&self, index: u64, out: &mut [f64]) {
        out.copy_from_slice(self.codeword(index));
    }
}

/// Generates a materialized book of `2^k` i.i.d. `N(0, variance)` codewords,
/// deterministic in `seed`, under the default entry cap.
pub fn gen_codebook(k: u32, n: usize, variance: f64, seed: u64) -> Result<Codebook> {
    Codebook::materialize(CodewordSource::new(k, n, variance, seed)?, &Caps::default())
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

/// Per-layer codeword sources for one scheme instance.
#[derive(Debug, Clone)]
pub struct LayerSources {
    pub u: CodewordSource,
    pub v: CodewordSource,
}

/// Layer tags used in codebook seed derivation.
pub(crate) const LAYER_U: u64 = 0;
pub(crate) const LAYER_V: u64 = 1;

/// Derives independent per-layer books for `(scheme, seed)` with variances
/// `a*P` and `(1-a)*P`.
pub fn layer_sources(
    scheme: SchemeId,
    cfg: &ChannelConfig,
    msg: &MessageConfig,
    split: PowerSplit,
    seed: u64,
) -> Result<LayerSources> {
    msg.matches_scheme(scheme)?;
    if cfg.receivers() != scheme.receivers() {
        return Err(Error::invalid(format!(
            "{} expects {} receivers, channel has {}",
            scheme.name(),
            scheme.receivers(),
            cfg.receivers()
        )));
    }
    let n = msg.blocklength();
    let a = split.alpha();
    let u_seed = crate::seeding::derive_seed(seed, purpose::CODEBOOK, scheme.tag(), LAYER_U);
    let v_seed = crate::seeding::derive_seed(seed, purpose::CODEBOOK, scheme.tag(), LAYER_V);
    Ok(LayerSources {
        u: CodewordSource::new(msg.bits(1), n, a * cfg.power(), u_seed)?,
        v: CodewordSource::new(v_index_bits(scheme, msg), n, (1.0 - a) * cfg.power(), v_seed)?,
    })
}

/// Superposes the two layer codewords selected by a message assignment.
pub fn encode_with_sources(
    scheme: SchemeId,
    msg: &MessageConfig,
    sources: &LayerSources,
    messages: &[u64],
) -> Result<Vec<f64>> {
    let v_index = v_composite_index(scheme, msg, messages)?;
    let mut x = sources.u.codeword(messages[0]);
    let mut v = vec![0.0; msg.blocklength()];
    sources.v.codeword_into(v_index, &mut v);
    for (a, b) in x.iter_mut().zip(&v) {
        *a += b;
    }
    Ok(x)
}

/// Encodes one block: builds the layer books for `(scheme, seed)` and
/// transmits `u(M1) + v(composite)`.
pub fn encode(
    scheme: SchemeId,
    cfg: &ChannelConfig,
    msg: &MessageConfig,
    split: PowerSplit,
    messages: &[u64],
    seed: u64,
) -> Result<Vec<f64>> {
    let sources = layer_sources(scheme, cfg, msg, split, seed)?;
    encode_with_sources(scheme, msg, &sources, messages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn xor_with_zero_padding() {
        assert_eq!(index_xor(5, 3, (4, 4)).unwrap(), 6);
        assert_eq!(index_xor(5, 3, (3, 2)).unwrap(), 6);
        assert_eq!(index_xor(9, 9, (4, 4)).unwrap(), 0);
        assert!(index_xor(8, 0, (3, 3)).is_err());
    }

    #[test]
    fn xor_fiber_is_bijective() {
        // Fixing one operand, the map over the other is a permutation.
        for k in 1..=10u32 {
            let fixed = 0b1011u64 & ((1 << k.min(4)) - 1);
            let mut seen = vec![false; 1 << k];
            for m in 0..(1u64 << k) {
                let x = index_xor(m, fixed, (k, k.min(4))).unwrap();
                assert!(!seen[x as usize]);
                seen[x as usize] = true;
            }
        }
    }

    #[test]
    fn multiplex_known_values() {
        assert_eq!(multiplex(&[1], &[3]).unwrap(), 1);
        assert_eq!(multiplex(&[1, 2], &[2, 2]).unwrap(), 6);
        assert!(multiplex(&[4], &[2]).is_err());
    }

    proptest! {
        #[test]
        fn multiplex_round_trips(values in proptest::collection::vec(0u64..16, 1..5)) {
            let widths = vec![4u32; values.len()];
            let c = multiplex(&values, &widths).unwrap();
            prop_assert_eq!(demultiplex(c, &widths), values);
        }

        #[test]
        fn xor_is_involutive(a in 0u64..1024, b in 0u64..1024) {
            let x = index_xor(a, b, (10, 10)).unwrap();
            prop_assert_eq!(index_xor(x, b, (10, 10)).unwrap(), a);
        }
    }

    #[test]
    fn codebook_trivial_cases() {
        let single = gen_codebook(0, 8, 1.0, 3).unwrap();
        assert_eq!(single.entries(), 1);
        let silent = gen_codebook(3, 8, 0.0, 3).unwrap();
        for j in 0..8 {
            assert!(silent.codeword(j).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn codebook_moments() {
        let book = gen_codebook(10, 20, 1.0, 42).unwrap();
        let total = book.entries() as usize * 20;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for j in 0..book.entries() {
            for &x in book.codeword(j) {
                sum += x;
                sumsq += x * x;
            }
        }
        let mean = sum / total as f64;
        let second = sumsq / total as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((second - 1.0).abs() < 0.05, "second moment {second}");
    }

    #[test]
    fn codebook_cap_enforced() {
        let src = CodewordSource::new(10, 4, 1.0, 1).unwrap();
        let caps = Caps {
            codebook_entries: 512,
            candidates: 1 << 20,
        };
        match Codebook::materialize(src, &caps) {
            Err(Error::ResourceCap { needed, cap, .. }) => {
                assert_eq!(needed, 1024);
                assert_eq!(cap, 512);
            }
            other => panic!("expected resource cap, got {other:?}"),
        }
    }

    #[test]
    fn materialized_matches_lazy() {
        let src = CodewordSource::new(4, 6, 2.5, 99).unwrap();
        let book = Codebook::materialize(src, &Caps::default()).unwrap();
        for j in 0..16 {
            assert_eq!(book.codeword(j), src.codeword(j).as_slice());
        }
    }

    #[test]
    fn normalized_codewords_have_exact_energy() {
        let src = CodewordSource::with_normalization(3, 16, 1.5, 7, true).unwrap();
        for j in 0..8 {
            let e: f64 = src.codeword(j).iter().map(|x| x * x).sum();
            assert!((e - 16.0 * 1.5).abs() < 1e-9);
        }
    }

    #[test]
    fn distinct_seeds_give_distinct_books() {
        let a = CodewordSource::new(2, 8, 1.0, 1).unwrap();
        let b = CodewordSource::new(2, 8, 1.0, 2).unwrap();
        assert_ne!(a.codeword(0), b.codeword(0));
        assert_eq!(
            a.codeword(0),
            CodewordSource::new(2, 8, 1.0, 1).unwrap().codeword(0)
        );
    }

    fn three_rx_msg(n: usize, k: [u32; 3]) -> MessageConfig {
        MessageConfig::new(n, k.to_vec()).unwrap()
    }

    #[test]
    fn composite_layouts() {
        let msg = three_rx_msg(8, [2, 4, 4]);
        assert_eq!(v_index_bits(SchemeId::ThreeRxIndex, &msg), 4);
        assert_eq!(v_index_bits(SchemeId::ThreeRxMultiplex, &msg), 8);
        // 2^max vs 2^sum second-layer book sizes.
        assert_eq!(1u64 << v_index_bits(SchemeId::ThreeRxIndex, &msg), 16);
        assert_eq!(1u64 << v_index_bits(SchemeId::ThreeRxMultiplex, &msg), 256);

        let xor = v_composite_index(SchemeId::ThreeRxIndex, &msg, &[0, 0b1010, 0b0110]).unwrap();
        assert_eq!(xor, 0b1100);
        let mux =
            v_composite_index(SchemeId::ThreeRxMultiplex, &msg, &[0, 0b1010, 0b0110]).unwrap();
        assert_eq!(mux, 0b1010_0110);
    }

    #[test]
    fn xor_self_cancels_in_index_layer() {
        let msg = three_rx_msg(8, [2, 3, 3]);
        let c = v_composite_index(SchemeId::ThreeRxIndex, &msg, &[1, 5, 5]).unwrap();
        assert_eq!(c, 0);
    }

    #[test]
    fn two_receiver_composites() {
        let msg = MessageConfig::new(16, vec![3, 2, 2, 1, 2]).unwrap();
        // XOR scheme: [m2, m3, m4 xor m5] with the xor field 2 bits wide.
        let xor_composite = v_composite_index(SchemeId::TwoRxXor, &msg, &[0, 1, 2, 1, 2]).unwrap();
        assert_eq!(xor_composite, (1 << 4) | (2 << 2) | (1 ^ 2));
        let mux = v_composite_index(SchemeId::TwoRxMultiplex, &msg, &[0, 1, 2, 1, 2]).unwrap();
        assert_eq!(mux, (((((1 << 2) | 2) << 1) | 1) << 2) | 2);
    }

    #[test]
    fn encode_degenerate_split_is_first_layer_only() {
        let cfg = ChannelConfig::new(2.0, vec![1.0, 1.0, 1.0]).unwrap();
        let msg = three_rx_msg(12, [3, 2, 2]);
        let split = PowerSplit::new(1.0).unwrap();
        let x = encode(SchemeId::ThreeRxIndex, &cfg, &msg, split, &[0, 0, 0], 5).unwrap();
        let sources = layer_sources(SchemeId::ThreeRxIndex, &cfg, &msg, split, 5).unwrap();
        assert_eq!(x, sources.u.codeword(0));
    }

    #[test]
    fn encode_rejects_roster_mismatch() {
        let cfg = ChannelConfig::new(2.0, vec![1.0, 1.0, 1.0]).unwrap();
        let msg = three_rx_msg(12, [3, 2, 2]);
        let split = PowerSplit::new(0.5).unwrap();
        assert!(encode(SchemeId::ThreeRxIndex, &cfg, &msg, split, &[0, 0], 5).is_err());
        assert!(encode(SchemeId::TwoRxXor, &cfg, &msg, split, &[0, 0, 0], 5).is_err());
        assert!(encode(SchemeId::ThreeRxIndex, &cfg, &msg, split, &[0, 0, 4], 5).is_err());
    }

    #[test]
    fn average_transmit_power_meets_the_budget() {
        let p = 3.0;
        let cfg = ChannelConfig::new(p, vec![1.0, 1.0, 1.0]).unwrap();
        let msg = three_rx_msg(24, [4, 3, 3]);
        let split = PowerSplit::new(1.0 / 3.0).unwrap();
        let mut rng = rand::rng();
        let mut sumsq = 0.0;
        let mut count = 0usize;
        for seed in 0..200u64 {
            let messages = [
                rng.random_range(0..16),
                rng.random_range(0..8),
                rng.random_range(0..8),
            ];
            let x = encode(SchemeId::ThreeRxIndex, &cfg, &msg, split, &messages, seed).unwrap();
            sumsq += x.iter().map(|v| v * v).sum::<f64>();
            count += x.len();
        }
        let per_symbol = sumsq / count as f64;
        assert!(
            (per_symbol - p).abs() / p < 0.05,
            "per-symbol power {per_symbol} vs budget {p}"
        );
    }

    #[test]
    fn two_receiver_uncertainty_counts_match() {
        // Candidate counts consistent with each receiver's side information
        // are identical for the XOR and plain multiplexed layers.
        for k2 in 0..=3u32 {
            for k3 in 0..=3u32 {
                for k4 in 0..=3u32 {
                    for k5 in 0..=3u32 {
                        let rx1 = 1u64 << (k2 + k3 + k5);
                        let rx2 = 1u64 << (k2 + k3 + k4);
                        let msg = MessageConfig::new(8, vec![1, k2, k3, k4, k5]).unwrap();
                        for scheme in [SchemeId::TwoRxXor, SchemeId::TwoRxMultiplex] {
                            let set1 =
                                crate::decode::candidate_set(scheme, 1, &msg, &[(4, 0)]).unwrap();
                            let set2 =
                                crate::decode::candidate_set(scheme, 2, &msg, &[(5, 0)]).unwrap();
                            assert_eq!(set1.len(), rx1);
                            assert_eq!(set2.len(), rx2);
                        }
                    }
                }
            }
        }
    }
}
