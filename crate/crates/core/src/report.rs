//! Structured pass/fail records.
//!
//! Every check is an inequality `lhs <= rhs + |rhs| * rel_tol + abs_tol`.
//! Identities are stored as `residual <= 0 + abs_tol`, with the compared
//! quantities kept in the diagnostics, so a single rule recomputes `pass` from
//! the stored numbers.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;

/// Serde adapter writing non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
pub mod float_repr {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    struct FloatVisitor;

    impl<'de> Visitor<'de> for FloatVisitor {
        type Value = f64;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            parse_special(v).ok_or_else(|| E::custom(format!("not a float: {v}")))
        }
    }

    pub fn parse_special(v: &str) -> Option<f64> {
        match v.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
            "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            other => other.parse().ok(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(FloatVisitor)
    }
}

/// Converts a float to a JSON value, mapping non-finite values to strings.
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub anchor: String,
    #[serde(with = "float_repr")]
    pub lhs: f64,
    #[serde(with = "float_repr")]
    pub rhs: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premise_violated: Option<String>,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, Value>,
}

/// The acceptance rule shared by every report.
pub fn holds(lhs: f64, rhs: f64, rel_tol: f64, abs_tol: f64) -> bool {
    if lhs.is_nan() || rhs.is_nan() {
        return false;
    }
    if rhs == f64::INFINITY || lhs == f64::NEG_INFINITY {
        return true;
    }
    lhs <= rhs + (rhs.abs() * rel_tol + abs_tol)
}

impl CheckReport {
    pub fn inequality(name: impl Into<String>, anchor: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        CheckReport {
            name: name.into(),
            anchor: anchor.into(),
            lhs,
            rhs,
            rel_tol: 0.0,
            abs_tol: 0.0,
            pass: holds(lhs, rhs, 0.0, 0.0),
            premise_violated: None,
            diagnostics: BTreeMap::new(),
        }
    }

    /// `residual <= tol`, for identities.
    pub fn identity(name: impl Into<String>, anchor: impl Into<String>, residual: f64, tol: f64) -> Self {
        Self::inequality(name, anchor, residual, 0.0).tol(0.0, tol)
    }

    /// A report for an instance whose hypotheses fail. It never passes.
    pub fn premise_failure(name: impl Into<String>, anchor: impl Into<String>, premise: impl Into<String>) -> Self {
        let mut r = Self::inequality(name, anchor, 1.0, 0.0);
        r.premise_violated = Some(premise.into());
        r.pass = false;
        r
    }

    pub fn tol(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self.pass = self.premise_violated.is_none() && holds(self.lhs, self.rhs, rel_tol, abs_tol);
        self
    }

    pub fn diag(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.diagnostics.insert(key.to_string(), value.into());
        self
    }

    pub fn diag_f64(self, key: &str, value: f64) -> Self {
        self.diag(key, json_f64(value))
    }

    pub fn non_sharp(self) -> Self {
        self.diag("sharpness", "non-sharp")
    }

    /// Effective absolute tolerance, as written to the CSV `tol` column.
    pub fn effective_tol(&self) -> f64 {
        if self.rhs.is_finite() {
            self.rhs.abs() * self.rel_tol + self.abs_tol
        } else {
            self.abs_tol
        }
    }

    /// Recomputes `pass` from the stored numbers.
    pub fn recompute(&self) -> bool {
        self.premise_violated.is_none() && holds(self.lhs, self.rhs, self.rel_tol, self.abs_tol)
    }

    /// Slack `rhs + tol - lhs`; negative means failure.
    pub fn slack(&self) -> f64 {
        self.rhs + self.effective_tol() - self.lhs
    }
}

pub fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rule_is_recomputable() {
        let r = CheckReport::inequality("a", "x", 1.0, 1.0 - 1e-9).tol(1e-6, 0.0);
        assert!(r.pass && r.recompute());
        let r = CheckReport::identity("b", "x", 2e-10, 1e-10);
        assert!(!r.pass && !r.recompute());
        let r = CheckReport::premise_failure("c", "x", "u >= 0");
        assert!(!r.pass);
    }

    #[test]
    fn non_finite_round_trip() {
        let r = CheckReport::inequality("a", "x", f64::NEG_INFINITY, f64::INFINITY);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"-inf\""));
        let back: CheckReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back.lhs, f64::NEG_INFINITY);
        assert!(back.pass);
    }
}
