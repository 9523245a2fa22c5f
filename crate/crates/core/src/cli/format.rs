//! Locale-free fixed-notation numbers for CSV and text output.

/// `x` with 15 significant digits in plain decimal notation, trailing zeros
/// removed. Never uses an exponent; `-0` prints as `0`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (14 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

pub fn csv_row<I: IntoIterator<Item = f64>>(values: I) -> String {
    values.into_iter().map(fmt_num).collect::<Vec<_>>().join(",")
}
