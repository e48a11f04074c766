//! Small statistical helpers: Wilson intervals, pooled standard errors, and
//! the noncentral chi-square CDF used by the ensemble-sampled decoder
//! stages.

use statrs::function::gamma::{gamma_lr, ln_gamma};

/// 97.5% standard-normal quantile, for two-sided 95% intervals.
pub const Z_95: f64 = 1.959963984540054;

/// Wilson score interval for a binomial proportion at 95% confidence.
/// Always contains the point estimate `errors / trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0, "wilson interval needs at least one trial");
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // Clamp against rounding so the interval always brackets p.
    (
        (center - half).max(0.0).min(p),
        (center + half).min(1.0).max(p),
    )
}

/// Pooled standard error of the difference of two proportions.
pub fn pooled_se(errors_a: u64, trials_a: u64, errors_b: u64, trials_b: u64) -> f64 {
    let pooled = (errors_a + errors_b) as f64 / (trials_a + trials_b) as f64;
    (pooled * (1.0 - pooled) * (1.0 / trials_a as f64 + 1.0 / trials_b as f64)).sqrt()
}

/// CDF of the noncentral chi-square distribution with `dof` degrees of
/// freedom and noncentrality `lambda`, evaluated as a Poisson-weighted sum
/// of central chi-square CDFs. All terms are positive, so the sum is
/// accurate in the far left tail, which is what the decoder needs.
pub fn noncentral_chi2_cdf(x: f64, dof: f64, lambda: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return 0.0;
    }
    if lambda <= 0.0 {
        return gamma_lr(0.5 * dof, 0.5 * x);
    }
    let h = 0.5 * lambda;
    let a0 = 0.5 * dof;
    let xh = 0.5 * x;
    let mode = h.floor();
    // Poisson weight at the mode, in log space to survive large lambda.
    let w_mode = (mode * h.ln() - h - ln_gamma(mode + 1.0)).exp();

    let mut acc = 0.0;
    // Upward from the mode. gamma_lr decreases in its first argument, so
    // once terms shrink below the running total's precision they stay there.
    let mut w = w_mode;
    let mut i = mode;
    loop {
        let term = w * gamma_lr(a0 + i, xh);
        acc += term;
        w *= h / (i + 1.0);
        i += 1.0;
        if (i > mode + 8.0 && term < acc * 1e-17 + 1e-300) || i > mode + 1e6 {
            break;
        }
    }
    // Downward from the mode to zero (at most `mode` terms).
    let mut w = w_mode * mode / h;
    let mut i = mode - 1.0;
    while i >= 0.0 {
        acc += w * gamma_lr(a0 + i, xh);
        w *= i / h;
        i -= 1.0;
    }
    acc.min(1.0)
}
