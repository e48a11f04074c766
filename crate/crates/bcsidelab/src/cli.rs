//! Command implementations and file formats behind the `bcsidelab` binary.
//!
//! Scenario files are JSON with a fixed schema (unknown keys are rejected):
//!
//! ```json
//! {
//!   "power": 3.0,
//!   "noise": [1.0, 1.0, 1.0],
//!   "scheme": "three_rx_index",
//!   "rates": [0.4, 0.4, 0.4],
//!   "n": 32,
//!   "alpha": 0.3333333333333333,
//!   "strategy": "successive_cancel",
//!   "trials": 5000,
//!   "seed": 7
//! }
//! ```
//!
//! `bit_lengths` may replace `rates` to pin message sizes exactly. Optional
//! keys: `caps` (object with `codebook_entries` and/or `candidates`),
//! `codebook_mode` (`"fresh"` default, or `"fixed"`), and `zero_noise`
//! (test fixture: receivers observe the codeword unperturbed). The
//! `BCSIDELAB_CAP` environment variable overrides both caps at once.
//!
//! Tabular results are CSV; verdicts and reports are JSON. Floating-point
//! output carries 12 significant digits, and every command is a pure
//! function of its inputs, so re-running a command reproduces its output
//! files byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelConfig;
use crate::codec::{MessageConfig, SchemeId};
use crate::decode::DecodeStrategy;
use crate::montecarlo::{
    compare_schemes, run_trials, sweep_blocklength, CodebookMode, CompareVerdict, Scenario,
    TrialStats,
};
use crate::numfmt::{round12, sig12};
use crate::regions::{
    boundary_sweep, gap_witness, in_capacity_region, strategy_violation, PowerSplit, RateTriple,
    StrategyRegion,
};
use crate::{Caps, Error, Result};

/// Environment variable overriding both resource caps.
pub const CAP_ENV_VAR: &str = "BCSIDELAB_CAP";

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CapsFile {
    codebook_entries: Option<u64>,
    candidates: Option<u64>,
}

/// On-disk scenario schema. Validated against module preconditions before
/// any run; unknown keys are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    power: f64,
    noise: Vec<f64>,
    scheme: SchemeId,
    #[serde(default)]
    rates: Option<Vec<f64>>,
    #[serde(default)]
    bit_lengths: Option<Vec<u32>>,
    n: usize,
    alpha: f64,
    strategy: DecodeStrategy,
    trials: u64,
    seed: u64,
    #[serde(default)]
    caps: Option<CapsFile>,
    #[serde(default)]
    codebook_mode: Option<CodebookMode>,
    #[serde(default)]
    zero_noise: Option<bool>,
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario> {
        let channel = ChannelConfig::new(self.power, self.noise)?;
        let (messages, target_rates) = match (self.rates, self.bit_lengths) {
            (Some(rates), None) => {
                let msg = MessageConfig::from_rates(self.n, &rates)?;
                (msg, rates)
            }
            (None, Some(bits)) => {
                let msg = MessageConfig::new(self.n, bits)?;
                let targets = (1..=msg.message_count()).map(|j| msg.rate(j)).collect();
                (msg, targets)
            }
            _ => {
                return Err(Error::invalid(
                    "exactly one of `rates` and `bit_lengths` is required",
                ))
            }
        };
        let mut caps = Caps::default();
        if let Some(c) = self.caps {
            if let Some(v) = c.codebook_entries {
                caps.codebook_entries = v;
            }
            if let Some(v) = c.candidates {
                caps.candidates = v;
            }
        }
        if let Ok(raw) = std::env::var(CAP_ENV_VAR) {
            let v: u64 = raw.parse().map_err(|_| {
                Error::invalid(format!("{CAP_ENV_VAR} must be an integer, got {raw:?}"))
            })?;
            caps.codebook_entries = v;
            caps.candidates = v;
        }
        let scenario = Scenario {
            channel,
            scheme: self.scheme,
            messages,
            split: PowerSplit::new(self.alpha)?,
            strategy: self.strategy,
            trials: self.trials,
            seed: self.seed,
            codebook_mode: self.codebook_mode.unwrap_or(CodebookMode::Fresh),
            zero_noise: self.zero_noise.unwrap_or(false),
            caps,
            enum_threshold: crate::montecarlo::DEFAULT_ENUM_THRESHOLD,
            target_rates,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Loads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| Error::invalid(format!("invalid scenario {}: {e}", path.display())))?;
    file.into_scenario()
}

// ---------------------------------------------------------------------------
// region
// ---------------------------------------------------------------------------

/// Parses an `--alpha-grid` argument: either a point count (`"101"`, spread
/// uniformly over `[0, 1]`) or an explicit sorted comma list (`"0,0.5,1"`).
pub fn parse_alpha_grid(arg: &str) -> Result<Vec<PowerSplit>> {
    let values: Vec<f64> = if arg.contains(',') || arg.contains('.') {
        arg.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad alpha value {s:?}")))
            })
            .collect::<Result<_>>()?
    } else {
        let count: usize = arg
            .parse()
            .map_err(|_| Error::invalid(format!("bad alpha grid {arg:?}")))?;
        if count < 2 {
            return Err(Error::invalid(
                "an alpha grid count needs >= 2 points; pass explicit values instead",
            ));
        }
        (0..count)
            .map(|i| i as f64 / (count - 1) as f64)
            .collect()
    };
    values.into_iter().map(PowerSplit::new).collect()
}

/// Writes the region boundary as CSV (`alpha,R1,R2,R3`) over a sorted grid
/// of power splits.
pub fn cmd_region(
    power: f64,
    noise: &[f64],
    grid: &[PowerSplit],
    out: &Path,
) -> Result<()> {
    let cfg = ChannelConfig::new(power, noise.to_vec())?;
    let rows = boundary_sweep(&cfg, grid)?;
    let mut csv = String::from("alpha,R1,R2,R3\n");
    for (split, point) in rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            sig12(split.alpha()),
            sig12(point.r1),
            sig12(point.r2),
            sig12(point.r3)
        ));
    }
    std::fs::write(out, csv)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// witness
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct StrategyReport {
    strategy: &'static str,
    in_region: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    violated: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

#[derive(Debug, Serialize)]
struct WitnessReport {
    power: f64,
    noise: Vec<f64>,
    eps: f64,
    status: &'static str,
    witness: Option<RateTriple>,
    alpha_capacity: Option<f64>,
    strategies: Vec<StrategyReport>,
}

fn violation_detail(constraint: &str, value: f64, bound: f64, alpha: f64) -> String {
    if constraint.starts_with("R1+R2+R3") {
        format!("sum rate {} >= {}", sig12(value), sig12(bound))
    } else {
        format!(
            "{} {} >= {} at alpha {}",
            constraint.split(" <").next().unwrap_or(constraint),
            sig12(value),
            sig12(bound),
            sig12(alpha)
        )
    }
}

/// Searches for a rate triple achievable with the XOR layer but outside all
/// multiplexed variants, and reports each variant's violated constraint as
/// JSON.
pub fn cmd_witness(power: f64, noise: &[f64], eps: f64, out: Option<&Path>) -> Result<String> {
    let cfg = ChannelConfig::new(power, noise.to_vec())?;
    let witness = gap_witness(&cfg, eps)?;
    let report = match witness {
        None => WitnessReport {
            power: round12(power),
            noise: noise.iter().map(|&v| round12(v)).collect(),
            eps: round12(eps),
            status: "no_witness",
            witness: None,
            alpha_capacity: None,
            strategies: Vec::new(),
        },
        Some(rates) => {
            let alpha = in_capacity_region(&cfg, &rates, eps)?
                .expect("gap witness is inside the region by construction")
                .alpha();
            let strategies = StrategyRegion::MULTIPLEX_VARIANTS
                .iter()
                .map(|&s| {
                    let violation = strategy_violation(&cfg, &rates, s, eps)?;
                    Ok(match violation {
                        None => StrategyReport {
                            strategy: s.name(),
                            in_region: true,
                            violated: None,
                            detail: None,
                        },
                        Some(v) => StrategyReport {
                            strategy: s.name(),
                            in_region: false,
                            detail: Some(violation_detail(
                                &v.constraint,
                                v.value,
                                v.bound,
                                v.alpha,
                            )),
                            violated: Some(v.constraint),
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            WitnessReport {
                power: round12(power),
                noise: noise.iter().map(|&v| round12(v)).collect(),
                eps: round12(eps),
                status: "witness",
                witness: Some(RateTriple {
                    r1: round12(rates.r1),
                    r2: round12(rates.r2),
                    r3: round12(rates.r3),
                }),
                alpha_capacity: Some(round12(alpha)),
                strategies,
            }
        }
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    if let Some(path) = out {
        std::fs::write(path, &json)?;
    }
    Ok(json)
}

// ---------------------------------------------------------------------------
// simulate / sweep / compare
// ---------------------------------------------------------------------------

const STATS_CSV_HEADER: &str =
    "scheme,strategy,n,receiver,target_rate,realized_rate,errors,trials,err_rate,ci_lo,ci_hi,seed";

fn stats_csv_rows(stats: &TrialStats, csv: &mut String) {
    for r in &stats.receivers {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            stats.scheme.name(),
            stats.strategy.name(),
            stats.n,
            r.receiver,
            sig12(r.target_rate),
            sig12(r.realized_rate),
            r.errors,
            r.trials,
            sig12(r.err_rate),
            sig12(r.ci_lo),
            sig12(r.ci_hi),
            stats.seed
        ));
    }
}

fn rounded_stats(stats: &TrialStats) -> TrialStats {
    let mut out = stats.clone();
    for r in &mut out.receivers {
        r.target_rate = round12(r.target_rate);
        r.realized_rate = round12(r.realized_rate);
        r.err_rate = round12(r.err_rate);
        r.ci_lo = round12(r.ci_lo);
        r.ci_hi = round12(r.ci_hi);
    }
    out
}

/// Runs one scenario and writes per-receiver statistics as CSV, optionally
/// also as a full JSON record (including receiver 1's layer breakdown).
pub fn cmd_simulate(
    scenario_path: &Path,
    out: &Path,
    json_out: Option<&Path>,
    seed_override: Option<u64>,
) -> Result<()> {
    let mut scenario = load_scenario(scenario_path)?;
    if let Some(seed) = seed_override {
        scenario.seed = seed;
    }
    let stats = run_trials(&scenario)?;
    let mut csv = String::from(STATS_CSV_HEADER);
    csv.push('\n');
    stats_csv_rows(&stats, &mut csv);
    std::fs::write(out, csv)?;
    if let Some(path) = json_out {
        let mut json =
            serde_json::to_string_pretty(&rounded_stats(&stats)).expect("stats serialize");
        json.push('\n');
        std::fs::write(path, json)?;
    }
    Ok(())
}

/// Re-runs a scenario across blocklengths and writes one CSV row per
/// `(n, receiver)`.
pub fn cmd_sweep(
    scenario_path: &Path,
    n_list: &[usize],
    out: &Path,
    seed_override: Option<u64>,
) -> Result<()> {
    let mut scenario = load_scenario(scenario_path)?;
    if let Some(seed) = seed_override {
        scenario.seed = seed;
    }
    let results = sweep_blocklength(&scenario, n_list)?;
    let mut csv = String::from(STATS_CSV_HEADER);
    csv.push('\n');
    for (_, stats) in &results {
        stats_csv_rows(stats, &mut csv);
    }
    std::fs::write(out, csv)?;
    Ok(())
}

fn rounded_verdict(v: &CompareVerdict) -> CompareVerdict {
    let mut out = v.clone();
    for r in &mut out.receivers {
        r.err_rate_a = round12(r.err_rate_a);
        r.err_rate_b = round12(r.err_rate_b);
        r.diff = round12(r.diff);
        r.pooled_se = round12(r.pooled_se);
    }
    out
}

/// Runs two scenarios differing only in scheme and reports the per-receiver
/// equivalence verdict as JSON.
pub fn cmd_compare(path_a: &Path, path_b: &Path, out: Option<&Path>) -> Result<String> {
    let a = load_scenario(path_a)?;
    let b = load_scenario(path_b)?;
    let verdict = compare_schemes(&a, &b)?;
    let mut json =
        serde_json::to_string_pretty(&rounded_verdict(&verdict)).expect("verdict serializes");
    json.push('\n');
    if let Some(path) = out {
        std::fs::write(path, &json)?;
    }
    Ok(json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_grid_forms() {
        let corners = parse_alpha_grid("0,1").unwrap();
        assert_eq!(corners.len(), 2);
        assert_eq!((corners[0].alpha(), corners[1].alpha()), (0.0, 1.0));
        let dense = parse_alpha_grid("101").unwrap();
        assert_eq!(dense.len(), 101);
        assert!((dense[50].alpha() - 0.5).abs() < 1e-15);
        let single = parse_alpha_grid("0.5").unwrap();
        assert_eq!(single.len(), 1);
        assert!(parse_alpha_grid("1").is_err());
        assert!(parse_alpha_grid("0,2.0").is_err());
    }

    #[test]
    fn scenario_file_requires_exactly_one_rate_form() {
        let base = r#"{"power":3.0,"noise":[1.0,1.0,1.0],"scheme":"three_rx_index",
            "n":16,"alpha":0.5,"strategy":"successive_cancel","trials":10,"seed":1"#;
        let with_both: ScenarioFile = serde_json::from_str(&format!(
            "{base},\"rates\":[0.1,0.1,0.1],\"bit_lengths\":[2,2,2]}}"
        ))
        .unwrap();
        assert!(with_both.into_scenario().is_err());
        let with_neither: ScenarioFile = serde_json::from_str(&format!("{base}}}")).unwrap();
        assert!(with_neither.into_scenario().is_err());
        let ok: ScenarioFile =
            serde_json::from_str(&format!("{base},\"rates\":[0.125,0.125,0.125]}}")).unwrap();
        let s = ok.into_scenario().unwrap();
        assert_eq!(s.messages.bit_lengths(), &[2, 2, 2]);
        assert_eq!(s.target_rates, vec![0.125, 0.125, 0.125]);
    }

    #[test]
    fn unknown_scenario_keys_are_rejected() {
        let text = r#"{"power":3.0,"noise":[1.0,1.0,1.0],"scheme":"three_rx_index",
            "rates":[0.1,0.1,0.1],"n":16,"alpha":0.5,"strategy":"successive_cancel",
            "trials":10,"seed":1,"surprise":true}"#;
        let err = serde_json::from_str::<ScenarioFile>(text).unwrap_err();
        assert!(err.to_string().contains("surprise"));
    }

    #[test]
    fn violation_details_read_naturally() {
        assert_eq!(
            violation_detail("R1+R2+R3 < C(P/N1)", 1.2, 1.0, 0.25),
            "sum rate 1.2 >= 1"
        );
        assert_eq!(
            violation_detail("R2+R3 < C((1-a)P/(aP+N1))", 0.8, 0.6, 0.25),
            "R2+R3 0.8 >= 0.6 at alpha 0.25"
        );
    }
}
