use serde::{Deserialize, Serialize};

use crate::rational::ExtRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Lelong,
    Lct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactRule,
    ClosedForm,
    Lp,
    IntervalCertificate,
    Numeric,
    NumericRequired,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum EstimateValue {
    Exact { value: ExtRational },
    Interval { lo: ExtRational, hi: ExtRational },
    Numeric {
        #[serde(with = "ext_float")]
        value: f64,
        #[serde(with = "ext_float")]
        lo: f64,
        #[serde(with = "ext_float")]
        hi: f64,
    },
    Unknown,
}

/// A Lelong number or singularity exponent with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantEstimate {
    pub kind: Kind,
    pub value: EstimateValue,
    pub method: Method,
    pub note: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl InvariantEstimate {
    pub fn exact(kind: Kind, value: ExtRational, method: Method, note: impl Into<String>) -> Self {
        InvariantEstimate {
            kind,
            value: EstimateValue::Exact { value },
            method,
            note: note.into(),
            flags: Vec::new(),
        }
    }

    pub fn interval(kind: Kind, lo: ExtRational, hi: ExtRational, method: Method, note: impl Into<String>) -> Self {
        debug_assert!(lo <= hi);
        if lo == hi {
            return InvariantEstimate::exact(kind, lo, method, note);
        }
        InvariantEstimate {
            kind,
            value: EstimateValue::Interval { lo, hi },
            method,
            note: note.into(),
            flags: Vec::new(),
        }
    }

    pub fn numeric(kind: Kind, value: f64, lo: f64, hi: f64, note: impl Into<String>) -> Self {
        InvariantEstimate {
            kind,
            value: EstimateValue::Numeric { value, lo, hi },
            method: Method::Numeric,
            note: note.into(),
            flags: Vec::new(),
        }
    }

    pub fn numeric_required(kind: Kind, note: impl Into<String>) -> Self {
        InvariantEstimate {
            kind,
            value: EstimateValue::Unknown,
            method: Method::NumericRequired,
            note: note.into(),
            flags: Vec::new(),
        }
    }

    pub fn with_flag(mut self, flag: impl Into<String>) -> Self {
        self.flags.push(flag.into());
        self
    }

    pub fn is_known(&self) -> bool {
        !matches!(self.value, EstimateValue::Unknown)
    }

    pub fn exact_value(&self) -> Option<&ExtRational> {
        match &self.value {
            EstimateValue::Exact { value } => Some(value),
            _ => None,
        }
    }

    /// Closed bounds as floats (`+∞` allowed for the upper end).
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match &self.value {
            EstimateValue::Exact { value } => Some((value.to_f64(), value.to_f64())),
            EstimateValue::Interval { lo, hi } => Some((lo.to_f64(), hi.to_f64())),
            EstimateValue::Numeric { lo, hi, .. } => Some((*lo, *hi)),
            EstimateValue::Unknown => None,
        }
    }

    /// Representative value: the exact value, the numeric estimate, or the interval midpoint.
    pub fn point(&self) -> Option<f64> {
        match &self.value {
            EstimateValue::Exact { value } => Some(value.to_f64()),
            EstimateValue::Interval { lo, hi } => Some((lo.to_f64() + hi.to_f64()) / 2.0),
            EstimateValue::Numeric { value, .. } => Some(*value),
            EstimateValue::Unknown => None,
        }
    }
}

/// JSON has no infinities: non-finite floats travel as the strings `"inf"`, `"-inf"`, `"nan"`.
pub mod ext_float {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

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

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            #[derive(Deserialize)]
            struct Wrap(#[serde(with = "super")] f64);
            Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_numeric_bounds_round_trip() {
        let e = InvariantEstimate::numeric(Kind::Lct, f64::INFINITY, 2.5, f64::INFINITY, "x");
        let text = serde_json::to_string(&e).unwrap();
        assert!(text.contains("\"hi\":\"inf\""), "{text}");
        let back: InvariantEstimate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
    }
}
