//! Explicit membership representations for bounded powers, from the identity
//! `(ℓ² - f²) p = 1 + q` with `p` SOS and `q ∈ M`:
//!
//! * `A_i := ℓ^{2i} p - f^{2i} p = Σ_{k<i} ℓ^{2(i-1-k)} f^{2k} · (1 + q)`
//! * `B_i := ℓ^{2i+2} p - f^{2i} = ℓ² A_i + f^{2i+2} · p + f^{2i} · q`

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use super::{QPoly, QmError};

/// `weight · element`, where `weight` is a square times a positive constant and
/// `element` is one of the module elements `1 + q`, `p`, `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTerm {
    pub weight: QPoly,
    pub element: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerCertificate {
    pub i: u32,
    /// 1 for `A_i`, 2 for `B_i`.
    pub claim: u8,
    pub target: QPoly,
    pub terms: Vec<PowerTerm>,
}

#[derive(Serialize)]
struct TermJson<'a> {
    weight: String,
    element: &'a str,
}

impl PowerCertificate {
    /// `Σ weight · element` with the element names resolved.
    pub fn expand(&self, p: &QPoly, q: &QPoly) -> QPoly {
        let one_plus_q = q.add_constant(&BigRational::one());
        self.terms.iter().fold(QPoly::zero(self.target.vars().clone()), |acc, t| {
            let e = match t.element {
                "1+q" => &one_plus_q,
                "p" => p,
                _ => q,
            };
            &acc + &(&t.weight * e)
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "i": self.i,
            "claim": self.claim,
            "target": self.target.to_string(),
            "terms": self.terms.iter().map(|t| TermJson { weight: t.weight.to_string(), element: t.element }).collect::<Vec<_>>(),
        })
    }
}

/// Representations of `A_i` and `B_i` for `i = 1..=i_max`.
pub fn bounded_power_certificates(
    p: &QPoly,
    q: &QPoly,
    f: &QPoly,
    ell: &BigRational,
    i_max: u32,
) -> Result<Vec<PowerCertificate>, QmError> {
    let vars = p.vars().clone();
    let ell2 = ell * ell;
    let f2 = f.pow(2);
    let lhs = &(&QPoly::constant(vars.clone(), ell2.clone()) - &f2) * p;
    if lhs != q.add_constant(&BigRational::one()) {
        return Err(QmError::Precondition("(ℓ² - f²) p != 1 + q".into()));
    }
    let ell_pow = |k: u32| -> BigRational { (0..k).fold(BigRational::one(), |a, _| a * &ell2) };
    let mut out = Vec::with_capacity(2 * i_max as usize);
    for i in 1..=i_max {
        let a_terms: Vec<PowerTerm> = (0..i)
            .map(|k| PowerTerm { weight: f2.pow(k).scale(&ell_pow(i - 1 - k)), element: "1+q" })
            .filter(|t| !t.weight.is_zero())
            .collect();
        let a_target = &p.scale(&ell_pow(i)) - &(&f2.pow(i) * p);
        let mut b_terms: Vec<PowerTerm> =
            a_terms.iter().map(|t| PowerTerm { weight: t.weight.scale(&ell2), element: t.element }).collect();
        b_terms.push(PowerTerm { weight: f2.pow(i + 1), element: "p" });
        b_terms.push(PowerTerm { weight: f2.pow(i), element: "q" });
        let b_target = &p.scale(&ell_pow(i + 1)) - &f2.pow(i);
        out.push(PowerCertificate { i, claim: 1, target: a_target, terms: a_terms });
        out.push(PowerCertificate { i, claim: 2, target: b_target, terms: b_terms });
    }
    debug_assert!(out.iter().all(|c| c.expand(p, q) == c.target));
    Ok(out)
}
