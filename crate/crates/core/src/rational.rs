//! Exact rationals and their wire formats.
//!
//! Machine output writes `{"num": p, "den": q}` in lowest terms with `q > 0`.
//! Input additionally accepts a bare integer or a `"p/q"` string.

use num_rational::Rational64;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::Deserialize;

pub type Q = Rational64;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(num, den)
}

pub fn qi(num: i64) -> Q {
    Q::from_integer(num)
}

pub fn to_f64(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

pub fn to_json(x: &Q) -> serde_json::Value {
    serde_json::json!({ "num": x.numer(), "den": x.denom() })
}

pub fn parse(s: &str) -> Result<Q, String> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: i64 = n.parse().map_err(|_| format!("bad rational '{s}'"))?;
    let d: i64 = d.parse().map_err(|_| format!("bad rational '{s}'"))?;
    if d == 0 {
        return Err(format!("zero denominator in '{s}'"));
    }
    Ok(Q::new(n, d))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Int(i64),
    Text(String),
    Parts { num: i64, den: i64 },
}

impl Repr {
    fn into_q<E: de::Error>(self) -> Result<Q, E> {
        match self {
            Repr::Int(v) => Ok(qi(v)),
            Repr::Text(s) => parse(&s).map_err(E::custom),
            Repr::Parts { den: 0, .. } => Err(E::custom("zero denominator")),
            Repr::Parts { num, den } => Ok(Q::new(num, den)),
        }
    }
}

pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
    let mut st = s.serialize_struct("Rational", 2)?;
    st.serialize_field("num", x.numer())?;
    st.serialize_field("den", x.denom())?;
    st.end()
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
    Repr::deserialize(d)?.into_q()
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => super::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
        Option::<Repr>::deserialize(d)?.map(Repr::into_q).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(serde::Serialize, Deserialize)]
    struct W {
        #[serde(with = "super")]
        v: Q,
    }

    #[test]
    fn accepts_all_input_forms() {
        for src in [r#"{"v": 3}"#, r#"{"v": "6/2"}"#, r#"{"v": {"num": 9, "den": 3}}"#] {
            let w: W = serde_json::from_str(src).unwrap();
            assert_eq!(w.v, qi(3));
        }
        assert!(serde_json::from_str::<W>(r#"{"v": "1/0"}"#).is_err());
    }

    #[test]
    fn writes_lowest_terms() {
        let s = serde_json::to_string(&W { v: q(4, -8) }).unwrap();
        assert_eq!(s, r#"{"v":{"num":-1,"den":2}}"#);
    }
}
