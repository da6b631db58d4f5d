//! Number formatting shared by the table printers and file writers.

/// Formats `x` with `digits` significant digits in fixed notation.
pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.*}", digits.saturating_sub(1), 0.0);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Six significant digits, the precision used for all printed output.
pub fn sig6(x: f64) -> String {
    sig(x, 6)
}
