//! Locale-independent numeric formatting for CSV and table output.

/// Significant digits in CSV and table output.
pub const SIG_DIGITS: usize = 10;

/// Formats `x` with [`SIG_DIGITS`] significant digits.
///
/// Plain decimal notation for magnitudes in `[1e-5, 1e15)`, scientific
/// notation outside that range. Trailing zeros are kept so every number has
/// the same precision.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // Exponent after rounding to SIG_DIGITS, e.g. 9.9999999999 -> 1.000000000e1.
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..15).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        sci
    }
}
