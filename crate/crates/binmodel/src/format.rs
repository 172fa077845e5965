//! Number formatting shared by every output.

/// Significant digits in printed and written numbers.
pub const SIGNIFICANT_DIGITS: usize = 6;

/// `x` with six significant digits, in scientific notation outside
/// `[1e-4, 1e6)`.
pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&magnitude) {
        return format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit (9.999995 -> 10.00000)
    let digits = s
        .chars()
        .filter(|c| c.is_ascii_digit())
        .skip_while(|&c| c == '0')
        .count();
    if digits > SIGNIFICANT_DIGITS && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

/// `x` rounded to six significant digits, for machine-readable output.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Optional number, blank when absent.
pub fn sig_opt(x: Option<f64>) -> String {
    x.map(sig).unwrap_or_default()
}
