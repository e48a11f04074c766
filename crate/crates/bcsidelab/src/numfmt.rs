//! Floating-point output formatting.
//!
//! Everything the crate writes to files uses the same rule: round to 12
//! significant digits, then print the shortest string that parses back to
//! that value. Re-parsing an exported number therefore reproduces it
//! exactly.

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap()
}

/// Formats with 12 significant digits, shortest round-trip form.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    format!("{}", round12(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_values_stay_short() {
        assert_eq!(sig12(0.5), "0.5");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(-2.25), "-2.25");
    }

    #[test]
    fn long_values_are_rounded_to_twelve_digits() {
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(2f64.sqrt()), "1.41421356237");
    }

    #[test]
    fn round_trip() {
        for &x in &[0.2470337, 1e-9, 123456.789012345, 3.999999999999] {
            let s = sig12(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, round12(x));
        }
    }
}
