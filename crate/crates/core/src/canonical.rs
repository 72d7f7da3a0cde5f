//! Canonical forms: JSON serialization, number formatting, content ids and
//! short-answer normalization.
//!
//! Canonical JSON has sorted object keys, no insignificant whitespace, and
//! floats carrying at most six significant digits. Payloads are normalized
//! with [`normalize_value`] when they enter the pipeline, so
//! `parse(to_canonical_string(p)) == p` holds exactly for every stored payload.

use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};

/// Significant digits kept for floats.
pub const FLOAT_SIG_DIGITS: usize = 6;

const MAX_EXACT_INT: f64 = 9_007_199_254_740_992.0; // 2^53

/// Rounds `x` to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let digits = digits.max(1);
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// Rounds to a fixed number of decimal places, then to the canonical
/// significant-digit budget.
pub fn round_decimals(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    round_sig((x * scale).round() / scale, FLOAT_SIG_DIGITS)
}

/// Canonical JSON number for a float.
pub fn canonical_number(x: f64) -> Number {
    let r = round_sig(x, FLOAT_SIG_DIGITS);
    if r.fract() == 0.0 && r.abs() < MAX_EXACT_INT {
        let i = r as i64;
        return if i >= 0 {
            Number::from(i as u64)
        } else {
            Number::from(i)
        };
    }
    Number::from_f64(r).unwrap_or_else(|| Number::from(0u64))
}

/// Formats a float the way canonical JSON prints it.
pub fn format_number(x: f64) -> String {
    number_text(&canonical_number(x))
}

fn number_text(n: &Number) -> String {
    if let Some(u) = n.as_u64() {
        u.to_string()
    } else if let Some(i) = n.as_i64() {
        i.to_string()
    } else {
        let f = n.as_f64().unwrap_or(0.0);
        // `Display` for f64 prints the shortest representation that
        // round-trips, never in exponent form.
        let s = format!("{f}");
        if s == "-0" {
            "0".to_string()
        } else {
            s
        }
    }
}

fn normalize_number(n: &Number) -> Number {
    if n.is_u64() || n.is_i64() {
        return n.clone();
    }
    canonical_number(n.as_f64().unwrap_or(0.0))
}

/// Rewrites every number into its canonical form.
pub fn normalize_value(value: &Value) -> Value {
    match value {
        Value::Number(n) => Value::Number(normalize_number(n)),
        Value::Array(items) => Value::Array(items.iter().map(normalize_value).collect()),
        Value::Object(map) => {
            let mut out = Map::new();
            for (k, v) in map {
                out.insert(k.clone(), normalize_value(v));
            }
            Value::Object(out)
        }
        other => other.clone(),
    }
}

/// Serializes `value` canonically.
pub fn to_canonical_string(value: &Value) -> String {
    let mut out = String::new();
    write_canonical(value, &mut out);
    out
}

fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&number_text(&normalize_number(n))),
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serialization is infallible"))
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(
                    &serde_json::to_string(key).expect("string serialization is infallible"),
                );
                out.push(':');
                write_canonical(&map[key], out);
            }
            out.push('}');
        }
    }
}

/// Full hex SHA-256 over `parts`, separated by NUL bytes.
pub fn sha256_hex(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            hasher.update([0u8]);
        }
        hasher.update(part.as_bytes());
    }
    hex::encode(hasher.finalize())
}

/// Content id: SHA-256 truncated to 16 hex chars.
pub fn content_id(parts: &[&str]) -> String {
    let mut full = sha256_hex(parts);
    full.truncate(16);
    full
}

/// A short answer after canonicalization.
#[derive(Debug, Clone, PartialEq)]
pub enum CanonicalAnswer {
    Number(f64),
    Text(String),
}

impl CanonicalAnswer {
    /// Normalized string form; numbers use canonical formatting.
    pub fn normalized(&self) -> String {
        match self {
            CanonicalAnswer::Number(x) => format_number(*x),
            CanonicalAnswer::Text(s) => s.clone(),
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            CanonicalAnswer::Number(x) => Some(*x),
            CanonicalAnswer::Text(_) => None,
        }
    }
}

/// Trim, lowercase, collapse whitespace; strip a trailing `%` and thousands
/// separators when the remainder parses as a number.
pub fn canonicalize_answer(raw: &str) -> CanonicalAnswer {
    let text = raw
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase();
    match parse_numeric(&text) {
        Some(x) => CanonicalAnswer::Number(x),
        None => CanonicalAnswer::Text(text),
    }
}

/// Parses a numeric answer: optional trailing `%`, optional grouped
/// thousands (`1,234,567.5`). Non-finite values are rejected.
pub fn parse_numeric(text: &str) -> Option<f64> {
    let t = text.trim();
    let t = t.strip_suffix('%').unwrap_or(t).trim_end();
    if t.is_empty() {
        return None;
    }
    let candidate = if t.contains(',') {
        if !is_grouped_thousands(t) {
            return None;
        }
        t.replace(',', "")
    } else {
        t.to_string()
    };
    if !candidate
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
    {
        return None;
    }
    candidate.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn is_grouped_thousands(t: &str) -> bool {
    let body = t.strip_prefix(['-', '+']).unwrap_or(t);
    let int_part = body.split('.').next().unwrap_or("");
    let groups: Vec<&str> = int_part.split(',').collect();
    if groups.len() < 2 {
        return false;
    }
    let first_ok =
        (1..=3).contains(&groups[0].len()) && groups[0].chars().all(|c| c.is_ascii_digit());
    first_ok
        && groups[1..]
            .iter()
            .all(|g| g.len() == 3 && g.chars().all(|c| c.is_ascii_digit()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    #[test]
    fn canonical_sorts_keys_and_strips_whitespace() {
        let v = json!({"b": [1, 2.5], "a": {"z": "x y", "c": null}});
        assert_eq!(
            to_canonical_string(&v),
            r#"{"a":{"c":null,"z":"x y"},"b":[1,2.5]}"#
        );
    }

    #[test]
    fn floats_keep_six_significant_digits() {
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(format_number(1.23456789), "1.23457");
        assert_eq!(format_number(3.0), "3");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1234567.8), "1234570");
        assert_eq!(format_number(0.000012345678), "0.0000123457");
    }

    #[test]
    fn integral_floats_become_integers() {
        let v = normalize_value(&json!({"x": 3.0, "y": -2.0}));
        assert_eq!(v, json!({"x": 3, "y": -2}));
    }

    #[test]
    fn content_id_is_sixteen_hex() {
        let id = content_id(&["data", "bar", "{}"]);
        assert_eq!(id.len(), 16);
        assert!(id.chars().all(|c| c.is_ascii_hexdigit()));
        assert_ne!(id, content_id(&["data", "bar", "{ }"]));
        // separator matters
        assert_ne!(content_id(&["ab", "c"]), content_id(&["a", "bc"]));
    }

    #[test]
    fn answer_canonicalization() {
        assert_eq!(
            canonicalize_answer("  Tuesday "),
            CanonicalAnswer::Text("tuesday".into())
        );
        assert_eq!(
            canonicalize_answer("1,234.5"),
            CanonicalAnswer::Number(1234.5)
        );
        assert_eq!(canonicalize_answer("45%"), CanonicalAnswer::Number(45.0));
        assert_eq!(canonicalize_answer("12 %"), CanonicalAnswer::Number(12.0));
        assert_eq!(
            canonicalize_answer("1,23"),
            CanonicalAnswer::Text("1,23".into())
        );
        assert_eq!(
            canonicalize_answer("nan"),
            CanonicalAnswer::Text("nan".into())
        );
        assert_eq!(canonicalize_answer("-7"), CanonicalAnswer::Number(-7.0));
        assert_eq!(canonicalize_answer("1,000").normalized(), "1000");
    }

    fn arb_json() -> impl Strategy<Value = Value> {
        let leaf = prop_oneof![
            Just(Value::Null),
            any::<bool>().prop_map(Value::Bool),
            (-1.0e9f64..1.0e9).prop_map(|x| json!(x)),
            any::<i32>().prop_map(|x| json!(x)),
            "[a-zA-Z0-9 \"\\\\]{0,8}".prop_map(Value::String),
        ];
        leaf.prop_recursive(3, 24, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 0..4).prop_map(Value::Array),
                prop::collection::btree_map("[a-z]{1,4}", inner, 0..4)
                    .prop_map(|m| Value::Object(m.into_iter().collect())),
            ]
        })
    }

    proptest! {
        #[test]
        fn canonical_round_trip_is_exact(v in arb_json()) {
            let normalized = normalize_value(&v);
            let text = to_canonical_string(&v);
            let parsed: Value = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(&parsed, &normalized);
            prop_assert_eq!(to_canonical_string(&parsed), text);
        }
    }
}
