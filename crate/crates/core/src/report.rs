//! Serialization helpers shared by the report types.
//!
//! Big integers are written as decimal strings so any JSON reader can take
//! them without precision loss; rationals as `{"num", "den", "approx"}`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

pub mod biguint_string {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
    pub approx: f64,
}

impl From<&BigRational> for RationalJson {
    fn from(q: &BigRational) -> Self {
        RationalJson {
            num: q.numer().to_string(),
            den: q.denom().to_string(),
            approx: q.to_f64().unwrap_or(f64::INFINITY),
        }
    }
}

pub mod rational {
    use super::*;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(value: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        RationalJson::from(value).serialize(s)
    }
}
