//! `{"vars":["x1","x2"],"terms":[{"exps":[2,0],"num":1,"den":1}, ...]}`
//!
//! Numerators and denominators are JSON integers when they fit in `i64`
//! and decimal strings otherwise, so rational coefficients round-trip exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{var_list, PolyError, Polynomial};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialJson {
    pub vars: Vec<String>,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub exps: Vec<u32>,
    #[serde(serialize_with = "ser_big", deserialize_with = "de_big")]
    pub num: BigInt,
    #[serde(serialize_with = "ser_big", deserialize_with = "de_big", default = "one")]
    pub den: BigInt,
}

fn one() -> BigInt {
    BigInt::from(1)
}

fn ser_big<Ser: Serializer>(v: &BigInt, s: Ser) -> Result<Ser::Ok, Ser::Error> {
    match v.to_i64() {
        Some(i) => s.serialize_i64(i),
        None => s.serialize_str(&v.to_string()),
    }
}

fn de_big<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Str(String),
    }
    match Raw::deserialize(d)? {
        Raw::Int(i) => Ok(BigInt::from(i)),
        Raw::Str(s) => BigInt::from_str_radix(&s, 10).map_err(serde::de::Error::custom),
    }
}

impl<S: Scalar> Polynomial<S> {
    pub fn to_json(&self) -> PolynomialJson {
        PolynomialJson {
            vars: self.vars().to_vec(),
            terms: self
                .terms()
                .map(|(m, c)| {
                    let q = c.to_rational().expect("finite coefficient");
                    TermJson { exps: m.exps().to_vec(), num: q.numer().clone(), den: q.denom().clone() }
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PolynomialJson) -> Result<Self, PolyError> {
        let vars = var_list(j.vars.iter().cloned());
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in &j.terms {
            if t.den == BigInt::from(0) {
                return Err(PolyError::BadCoefficient("zero denominator".into()));
            }
            let q = BigRational::new(t.num.clone(), t.den.clone());
            terms.push((t.exps.clone(), S::from_rational(&q)));
        }
        Polynomial::from_terms(vars, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_polynomial;

    #[test]
    fn wire_format() {
        let p = parse_polynomial("x1^2 - 3/4*x2", None).unwrap();
        let s = serde_json::to_string(&p.to_json()).unwrap();
        assert_eq!(
            s,
            r#"{"vars":["x1","x2"],"terms":[{"exps":[0,1],"num":-3,"den":4},{"exps":[2,0],"num":1,"den":1}]}"#
        );
    }

    #[test]
    fn big_coefficients_use_strings() {
        let p = parse_polynomial("123456789012345678901234567890*x", None).unwrap();
        let s = serde_json::to_string(&p.to_json()).unwrap();
        assert!(s.contains("\"123456789012345678901234567890\""));
        let back: PolynomialJson = serde_json::from_str(&s).unwrap();
        assert_eq!(Polynomial::<BigRational>::from_json(&back).unwrap(), p);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = r#"{"vars":["x"],"terms":[{"exps":[1,0],"num":1,"den":1}]}"#;
        let j: PolynomialJson = serde_json::from_str(bad).unwrap();
        assert!(Polynomial::<BigRational>::from_json(&j).is_err());
        let zero_den = r#"{"vars":["x"],"terms":[{"exps":[1],"num":1,"den":0}]}"#;
        let j: PolynomialJson = serde_json::from_str(zero_den).unwrap();
        assert!(Polynomial::<BigRational>::from_json(&j).is_err());
        assert!(serde_json::from_str::<PolynomialJson>(r#"{"vars":[],"terms":[],"x":1}"#).is_err());
    }
}
