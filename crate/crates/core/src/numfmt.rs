//! Deterministic decimal rendering for all text outputs.
//!
//! Values are written as the shortest round-trip decimal, capped at a fixed
//! number of significant digits (10 for every file format in this crate).
//! The cap is applied by value: when the shortest form needs more digits,
//! the value is rounded to 10 significant digits and re-rendered, so
//! `render(parse(render(x))) == render(x)` holds and serialize/parse is a
//! fixed point after one application.

/// Significant digits used in every text output of this workspace.
pub const OUTPUT_SIG_DIGITS: u32 = 10;

/// Render a value with at most `max_sig` significant digits,
/// no trailing-zero padding, never in exponent notation.
pub fn format_sig(value: f64, max_sig: u32) -> String {
    assert!(max_sig >= 1, "max_sig must be at least 1");
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return format!("{value}");
    }
    let shortest = format!("{value}");
    if sig_digits(&shortest) <= max_sig as usize {
        return shortest;
    }
    // Position of the leading digit relative to the decimal point.
    let exponent = value.abs().log10().floor() as i32;
    let mut decimals = max_sig as i32 - 1 - exponent;
    loop {
        let rounded = round_to_decimals(value, decimals);
        let canonical = format!("{rounded}");
        if rounded == 0.0 {
            return "0".to_string();
        }
        if sig_digits(&canonical) <= max_sig as usize {
            return canonical;
        }
        // log10 landed one off on a power-of-ten boundary; tighten once more.
        decimals -= 1;
    }
}

/// Shortest round-trip rendering capped at [`OUTPUT_SIG_DIGITS`].
pub fn format_value(value: f64) -> String {
    format_sig(value, OUTPUT_SIG_DIGITS)
}

/// The value the capped rendering stands for (round through the decimal form).
pub fn cap_value(value: f64) -> f64 {
    if !value.is_finite() {
        return value;
    }
    format_value(value).parse().expect("capped decimal re-parses")
}

fn round_to_decimals(value: f64, decimals: i32) -> f64 {
    if decimals >= 0 {
        let s = format!("{:.*}", decimals as usize, value);
        s.parse().expect("fixed-precision decimal re-parses")
    } else {
        let scale = 10f64.powi(-decimals);
        (value / scale).round() * scale
    }
}

/// Count digits from the first non-zero digit through the last non-zero digit.
/// Trailing zeros carry no round-trip precision, so `"1200"` counts 2.
fn sig_digits(rendered: &str) -> usize {
    let digits: Vec<u8> = rendered
        .bytes()
        .filter(|b| b.is_ascii_digit())
        .collect();
    let first = digits.iter().position(|&d| d != b'0');
    let last = digits.iter().rposition(|&d| d != b'0');
    match (first, last) {
        (Some(f), Some(l)) => l - f + 1,
        _ => 0,
    }
}
