//! Deterministic float text: 15 significant digits, trailing zeros trimmed,
//! lowercase scientific notation outside `[1e-4, 1e15)`.

use serde_json::value::RawValue;

pub fn float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_owned()
        } else if x > 0.0 {
            "inf".to_owned()
        } else {
            "-inf".to_owned()
        };
    }
    // Round to 15 significant digits first; the decade can change.
    let sci = format!("{:.14e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim(mantissa), exp)
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s.to_owned()
    }
}

/// A JSON number token with [`float`] text. Non-finite values become `null`.
pub fn json_float(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { float(x) } else { "null".to_owned() };
    RawValue::from_string(text).expect("valid JSON number")
}
