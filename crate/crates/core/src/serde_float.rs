//! Serde helpers that keep non-finite floats through JSON, which has no
//! representation for them: `inf`, `-inf` and `nan` are written as strings.

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

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

impl Visitor<'_> for FloatVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
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
        match v {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
        }
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    d.deserialize_any(FloatVisitor)
}

#[derive(Serialize, Deserialize)]
struct Wrapped(#[serde(with = "self")] f64);

/// The same encoding for `(f64, f64)` pairs.
pub mod pair {
    use super::Wrapped;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        (Wrapped(x.0), Wrapped(x.1)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let (a, b) = <(Wrapped, Wrapped)>::deserialize(d)?;
        Ok((a.0, b.0))
    }
}

#[cfg(test)]
mod tests {
    #[derive(Debug, serde::Serialize, serde::Deserialize)]
    struct S {
        #[serde(with = "super")]
        x: f64,
        #[serde(with = "super::pair")]
        p: (f64, f64),
    }

    #[test]
    fn non_finite_round_trip() {
        let s = S {
            x: f64::INFINITY,
            p: (f64::NEG_INFINITY, 1.5),
        };
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"x":"inf","p":["-inf",1.5]}"#);
        let back: S = serde_json::from_str(&json).unwrap();
        assert_eq!((back.x, back.p), (s.x, s.p));
        let nan: S = serde_json::from_str(r#"{"x":"nan","p":[0,2]}"#).unwrap();
        assert!(nan.x.is_nan());
        assert_eq!(nan.p, (0.0, 2.0));
    }
}
