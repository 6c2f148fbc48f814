//! Deterministic number formatting for reports.
//!
//! All floats leave the crate with exactly six decimals. Non-finite values
//! become the strings `inf`, `-inf` and `nan` (quoted in JSON).

use serde::ser::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Decimal places used in every report.
pub const DECIMALS: usize = 6;

/// Formats `x` with six decimals, or as `inf` / `-inf` / `nan`.
pub fn fixed(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        // avoid "-0.000000"
        let s = format!("{x:.DECIMALS$}");
        if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
            s.trim_start_matches('-').to_owned()
        } else {
            s
        }
    }
}

/// A float that serializes to JSON as a fixed six-decimal number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed(pub f64);

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_str(&fixed(self.0));
        }
        let raw = RawValue::from_string(fixed(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

pub fn fixed_vec(xs: &[f64]) -> Vec<Fixed> {
    xs.iter().copied().map(Fixed).collect()
}
