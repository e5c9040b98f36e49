//! Fixed 12-significant-digit rendering of floats.

use serde_json::Value;

pub const DIGITS: usize = 12;

/// `x` with 12 significant digits, in plain notation when the exponent is
/// moderate and in `1.5e-9` style otherwise. Trailing zeros are dropped.
pub fn decimal(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-6..DIGITS as i32).contains(&exp) {
        let places = (DIGITS as i32 - 1 - exp).max(0) as usize;
        trim(format!("{x:.places$}"))
    } else {
        format!("{}e{exp}", trim(mant.to_string()))
    }
}

fn trim(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" { "0".into() } else { t.to_string() }
}

/// Replaces every floating-point number in a JSON tree by its decimal string.
/// Integers are kept as numbers.
pub fn stringify_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(decimal(n.as_f64().unwrap())),
        Value::Array(a) => Value::Array(a.into_iter().map(stringify_floats).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, stringify_floats(v))).collect()),
        other => other,
    }
}
