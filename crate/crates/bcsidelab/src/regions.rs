//! Three-receiver rate regions and membership queries.
//!
//! For a three-receiver degraded AWGN broadcast channel where receiver 1
//! wants `M1` with no side information, receiver 2 wants `M2` and knows `M3`,
//! and receiver 3 wants `M3` and knows `M2`, the full region of achievable
//! rate triples is parameterized by a power split `a` between two
//! superposed layers:
//!
//! ```text
//! R1 < C(aP / N1)
//! R2 < C((1-a)P / (aP + N2))
//! R3 < C((1-a)P / (aP + N3))        for some 0 <= a <= 1,
//! ```
//!
//! with `C(x) = ½·log2(1+x)`. This is achieved by XOR-combining `M2` and
//! `M3` into the second layer. If the two messages are instead multiplexed
//! (concatenated) into the second layer, receiver 1 must resolve a larger
//! candidate set and one of three extra constraints appears, depending on how
//! it handles that layer:
//!
//! * successive cancellation: `R2 + R3 < C((1-a)P / (aP + N1))`;
//! * treating the layer as noise: `R1 < C(aP / ((1-a)P + N1))`;
//! * simultaneous decoding:      `R1 + R2 + R3 < C(P / N1)`.
//!
//! Membership tests exploit monotonicity in `a`: the `R1` bound increases
//! with `a` while every other bound decreases, so a rate tuple is feasible
//! iff it is feasible at the smallest `a` admitted by the `R1`-type bound.
//! All tests use an explicit margin `eps`, so "inside" means every
//! constraint holds with slack at least `eps`.

use serde::{Deserialize, Serialize};

use crate::channel::{capacity_raw, ChannelConfig};
use crate::{Error, Result};

/// Default membership margin; boundary points are excluded.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Power-split grid step used by the deterministic gap-witness search.
pub const WITNESS_ALPHA_STEP: f64 = 1e-4;

/// A rate point in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTriple {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl RateTriple {
    pub fn new(r1: f64, r2: f64, r3: f64) -> Result<Self> {
        for (name, v) in [("R1", r1), ("R2", r2), ("R3", r3)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(RateTriple { r1, r2, r3 })
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2 + self.r3
    }
}

/// Fraction `a` of the power budget assigned to the first layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSplit {
    alpha: f64,
}

impl PowerSplit {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        Ok(PowerSplit { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Which achievable region a membership query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyRegion {
    /// XOR second layer; no extra constraint.
    Capacity,
    /// Multiplexed second layer, receiver 1 cancels it first.
    MultiplexSc,
    /// Multiplexed second layer, receiver 1 treats it as noise.
    MultiplexTin,
    /// Multiplexed second layer, receiver 1 decodes both layers jointly.
    MultiplexSd,
    /// Union of the three multiplexed variants over all power splits.
    MultiplexUnion,
}

impl StrategyRegion {
    pub const MULTIPLEX_VARIANTS: [StrategyRegion; 3] = [
        StrategyRegion::MultiplexSc,
        StrategyRegion::MultiplexTin,
        StrategyRegion::MultiplexSd,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StrategyRegion::Capacity => "capacity",
            StrategyRegion::MultiplexSc => "multiplex_sc",
            StrategyRegion::MultiplexTin => "multiplex_tin",
            StrategyRegion::MultiplexSd => "multiplex_sd",
            StrategyRegion::MultiplexUnion => "multiplex_union",
        }
    }
}

fn require_three_receivers(cfg: &ChannelConfig) -> Result<()> {
    if cfg.receivers() != 3 {
        return Err(Error::invalid(format!(
            "region queries need exactly 3 receivers, got {}",
            cfg.receivers()
        )));
    }
    Ok(())
}

/// Bound on `R1` at a given split: `C(aP/N1)`. Non-decreasing in `a`.
pub fn layer1_bound(cfg: &ChannelConfig, alpha: f64) -> f64 {
    capacity_raw(alpha * cfg.power() / cfg.noise(1))
}

/// Bound on `R2`/`R3` at a given split: `C((1-a)P/(aP+N_i))`.
/// Non-increasing in `a`.
pub fn layer2_bound(cfg: &ChannelConfig, alpha: f64, receiver: usize) -> f64 {
    let p = cfg.power();
    capacity_raw((1.0 - alpha) * p / (alpha * p + cfg.noise(receiver)))
}

/// Receiver 1's budget for resolving the second layer while treating the
/// first as noise: `C((1-a)P/(aP+N1))`. Non-increasing in `a`.
pub fn layer2_budget_rx1(cfg: &ChannelConfig, alpha: f64) -> f64 {
    let p = cfg.power();
    capacity_raw((1.0 - alpha) * p / (alpha * p + cfg.noise(1)))
}

/// Receiver 1's rate when the second layer is treated as noise:
/// `C(aP/((1-a)P+N1))`. Non-decreasing in `a`.
pub fn treat_as_noise_bound(cfg: &ChannelConfig, alpha: f64) -> f64 {
    let p = cfg.power();
    capacity_raw(alpha * p / ((1.0 - alpha) * p + cfg.noise(1)))
}

/// Supremum rates at one power split:
/// `(C(aP/N1), C((1-a)P/(aP+N2)), C((1-a)P/(aP+N3)))`.
pub fn boundary_point(cfg: &ChannelConfig, split: PowerSplit) -> Result<RateTriple> {
    require_three_receivers(cfg)?;
    let a = split.alpha();
    Ok(RateTriple {
        r1: layer1_bound(cfg, a),
        r2: layer2_bound(cfg, a, 2),
        r3: layer2_bound(cfg, a, 3),
    })
}

/// Tabulates [`boundary_point`] over a sorted grid of splits.
pub fn boundary_sweep(
    cfg: &ChannelConfig,
    alpha_grid: &[PowerSplit],
) -> Result<Vec<(PowerSplit, RateTriple)>> {
    require_three_receivers(cfg)?;
    if alpha_grid.is_empty() {
        return Err(Error::invalid("alpha grid must be nonempty"));
    }
    if alpha_grid.windows(2).any(|w| w[0].alpha() > w[1].alpha()) {
        return Err(Error::invalid("alpha grid must be sorted ascending"));
    }
    alpha_grid
        .iter()
        .map(|&a| Ok((a, boundary_point(cfg, a)?)))
        .collect()
}

/// Smallest split satisfying an increasing bound `f(a) >= target`, given the
/// closed form of `f`, or `None` when even `a = 1` falls short.
///
/// `eps` may be negative here; that is how "outside with margin" queries are
/// phrased internally.
fn min_alpha_for_layer1(cfg: &ChannelConfig, target: f64) -> Option<f64> {
    if target <= 0.0 {
        return Some(0.0);
    }
    let p = cfg.power();
    if p == 0.0 {
        return None;
    }
    let snr_needed = (2f64).powf(2.0 * target) - 1.0;
    let alpha = snr_needed * cfg.noise(1) / p;
    (alpha <= 1.0).then_some(alpha)
}

fn min_alpha_for_treat_as_noise(cfg: &ChannelConfig, target: f64) -> Option<f64> {
    if target <= 0.0 {
        return Some(0.0);
    }
    let p = cfg.power();
    if p == 0.0 {
        return None;
    }
    let s = (2f64).powf(2.0 * target) - 1.0;
    let alpha = s * (p + cfg.noise(1)) / (p * (1.0 + s));
    (alpha <= 1.0).then_some(alpha)
}

/// Signed-margin membership: is there a split at which every constraint of
/// `strategy` holds with slack >= `eps`? Monotonicity reduces the search to
/// the smallest split allowed by the increasing constraint.
fn membership_witness(
    cfg: &ChannelConfig,
    rates: &RateTriple,
    strategy: StrategyRegion,
    eps: f64,
) -> Option<PowerSplit> {
    if let StrategyRegion::MultiplexUnion = strategy {
        return StrategyRegion::MULTIPLEX_VARIANTS
            .iter()
            .find_map(|&s| membership_witness(cfg, rates, s, eps));
    }

    let alpha = match strategy {
        StrategyRegion::MultiplexTin => min_alpha_for_treat_as_noise(cfg, rates.r1 + eps)?,
        _ => min_alpha_for_layer1(cfg, rates.r1 + eps)?,
    };

    let feasible = layer2_bound(cfg, alpha, 2) - rates.r2 >= eps
        && layer2_bound(cfg, alpha, 3) - rates.r3 >= eps
        && match strategy {
            StrategyRegion::Capacity | StrategyRegion::MultiplexTin => true,
            StrategyRegion::MultiplexSc => {
                layer2_budget_rx1(cfg, alpha) - (rates.r2 + rates.r3) >= eps
            }
            StrategyRegion::MultiplexSd => {
                capacity_raw(cfg.power() / cfg.noise(1)) - rates.sum() >= eps
            }
            StrategyRegion::MultiplexUnion => unreachable!(),
        };
    feasible.then_some(PowerSplit { alpha })
}

/// Tests membership of `rates` in the full region with margin `eps`,
/// returning a witnessing power split when inside.
pub fn in_capacity_region(
    cfg: &ChannelConfig,
    rates: &RateTriple,
    eps: f64,
) -> Result<Option<PowerSplit>> {
    in_multiplex_region(cfg, rates, StrategyRegion::Capacity, eps)
}

/// Tests membership of `rates` in the region of a given strategy with margin
/// `eps`, returning a witnessing power split when inside.
pub fn in_multiplex_region(
    cfg: &ChannelConfig,
    rates: &RateTriple,
    strategy: StrategyRegion,
    eps: f64,
) -> Result<Option<PowerSplit>> {
    require_three_receivers(cfg)?;
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::invalid(format!(
            "eps must be finite and >= 0, got {eps}"
        )));
    }
    Ok(membership_witness(cfg, rates, strategy, eps))
}

/// True when every split violates some constraint of `strategy` by at least
/// `eps`.
pub(crate) fn outside_with_margin(
    cfg: &ChannelConfig,
    rates: &RateTriple,
    strategy: StrategyRegion,
    eps: f64,
) -> bool {
    membership_witness(cfg, rates, strategy, -eps).is_none()
}

/// The constraint a rates triple violates in a strategy's region, evaluated
/// at the most favorable split, for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintViolation {
    /// Human-readable name of the violated constraint.
    pub constraint: String,
    /// Rate expression on the left of the constraint.
    pub value: f64,
    /// Bound on the right of the constraint.
    pub bound: f64,
    /// Split at which the diagnosis was made.
    pub alpha: f64,
}

/// Diagnoses why `rates` is outside `strategy`'s region, or `None` if it is
/// inside (with margin `eps`). For the union, reports the first variant.
pub fn strategy_violation(
    cfg: &ChannelConfig,
    rates: &RateTriple,
    strategy: StrategyRegion,
    eps: f64,
) -> Result<Option<ConstraintViolation>> {
    require_three_receivers(cfg)?;
    if membership_witness(cfg, rates, strategy, eps).is_some() {
        return Ok(None);
    }
    if let StrategyRegion::MultiplexUnion = strategy {
        return strategy_violation(cfg, rates, StrategyRegion::MultiplexSc, eps);
    }

    let target = rates.r1 + eps;
    let alpha_min = match strategy {
        StrategyRegion::MultiplexTin => min_alpha_for_treat_as_noise(cfg, target),
        _ => min_alpha_for_layer1(cfg, target),
    };
    let alpha = match alpha_min {
        Some(a) => a,
        None => {
            // Even the full power budget cannot carry R1.
            let (constraint, bound) = match strategy {
                StrategyRegion::MultiplexTin => {
                    ("R1 < C(aP/((1-a)P+N1))", treat_as_noise_bound(cfg, 1.0))
                }
                _ => ("R1 < C(aP/N1)", layer1_bound(cfg, 1.0)),
            };
            return Ok(Some(ConstraintViolation {
                constraint: constraint.to_string(),
                value: rates.r1,
                bound,
                alpha: 1.0,
            }));
        }
    };

    // Rank the remaining constraints by margin at the diagnostic split.
    let mut worst: Option<ConstraintViolation> = None;
    let mut consider = |constraint: &str, value: f64, bound: f64| {
        let margin = bound - value;
        if worst.as_ref().is_none_or(|w| margin < w.bound - w.value) {
            worst = Some(ConstraintViolation {
                constraint: constraint.to_string(),
                value,
                bound,
                alpha,
            });
        }
    };
    consider(
        "R2 < C((1-a)P/(aP+N2))",
        rates.r2,
        layer2_bound(cfg, alpha, 2),
    );
    consider(
        "R3 < C((1-a)P/(aP+N3))",
        rates.r3,
        layer2_bound(cfg, alpha, 3),
    );
    match strategy {
        StrategyRegion::MultiplexSc => consider(
            "R2+R3 < C((1-a)P/(aP+N1))",
            rates.r2 + rates.r3,
            layer2_budget_rx1(cfg, alpha),
        ),
        StrategyRegion::MultiplexSd => consider(
            "R1+R2+R3 < C(P/N1)",
            rates.sum(),
            capacity_raw(cfg.power() / cfg.noise(1)),
        ),
        _ => {}
    }
    Ok(worst)
}

/// Searches a deterministic grid for a rate triple that is inside the full
/// region with margin `eps` yet outside every multiplexed variant with margin
/// `eps`. Returns `None` when the grid is exhausted.
pub fn gap_witness(cfg: &ChannelConfig, eps: f64) -> Result<Option<RateTriple>> {
    require_three_receivers(cfg)?;
    if cfg.power() <= 0.0 {
        return Ok(None);
    }
    const SHRINK: [f64; 10] = [
        0.99,
        0.98,
        0.95,
        0.9,
        0.85,
        0.8,
        0.75,
        2.0 / 3.0,
        0.6,
        0.5,
    ];
    let steps = (1.0 / WITNESS_ALPHA_STEP) as usize;
    for i in 1..steps {
        let alpha = i as f64 * WITNESS_ALPHA_STEP;
        let b1 = layer1_bound(cfg, alpha);
        let b2 = layer2_bound(cfg, alpha, 2);
        let b3 = layer2_bound(cfg, alpha, 3);
        // A candidate near this boundary point can escape both the
        // cancellation and joint-decoding constraints only where the
        // second-layer sum exceeds receiver 1's second-layer budget.
        if b2 + b3 <= layer2_budget_rx1(cfg, alpha) {
            continue;
        }
        for gamma in SHRINK {
            let cand = RateTriple {
                r1: b1,
                r2: gamma * b2,
                r3: gamma * b3,
            };
            if membership_witness(cfg, &cand, StrategyRegion::Capacity, eps).is_some()
                && StrategyRegion::MULTIPLEX_VARIANTS
                    .iter()
                    .all(|&s| outside_with_margin(cfg, &cand, s, eps))
            {
                return Ok(Some(cand));
            }
        }
    }
    Ok(None)
}

/// Fraction of a rate grid that is inside the full region but outside the
/// union of the multiplexed variants, both with margin `eps`. The grid spans
/// `[0, C(P/N_i)]` with `resolution` points per axis.
pub fn region_gap_measure(cfg: &ChannelConfig, resolution: usize, eps: f64) -> Result<f64> {
    require_three_receivers(cfg)?;
    if resolution < 2 {
        return Err(Error::invalid("resolution must be >= 2 points per axis"));
    }
    let maxes: Vec<f64> = (1..=3)
        .map(|rx| capacity_raw(cfg.power() / cfg.noise(rx)))
        .collect();
    let mut hits = 0u64;
    let denom = (resolution - 1) as f64;
    for i in 0..resolution {
        for j in 0..resolution {
            for k in 0..resolution {
                let cand = RateTriple {
                    r1: maxes[0] * i as f64 / denom,
                    r2: maxes[1] * j as f64 / denom,
                    r3: maxes[2] * k as f64 / denom,
                };
                if membership_witness(cfg, &cand, StrategyRegion::Capacity, eps).is_some()
                    && outside_with_margin(cfg, &cand, StrategyRegion::MultiplexUnion, eps)
                {
                    hits += 1;
                }
            }
        }
    }
    Ok(hits as f64 / (resolution as f64).powi(3))
}
