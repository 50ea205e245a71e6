//! Degree-truncated computations with finitely generated quadratic modules
//! and preorderings of `ℝ[x_1, …, x_n]`.
//!
//! Every positive answer carries a certificate that has been re-expanded in
//! exact rational arithmetic. Negative answers are always relative to the
//! truncation degree.

mod gram;
mod member;
mod moments;
mod power;
mod stability;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numkernel::{NumError, SdpOptions};
use crate::polyring::{indexed_vars, parse_polynomial, var_list, PolyError, Polynomial, PolynomialJson, VarList};

pub use gram::{CertBlock, GramOutcome, GramSystem, MembershipCertificate, PruneStage};
pub use member::{
    archimedean_probe, member, pos_semiordering, pos_semiordering_search, seq_member, stable_closure, support_probe,
    ArchimedeanStatus, MemberResult, MemberStatus, PosYCertificate, PosYResult, SeqMemberResult,
};
pub use moments::{dual_moment_check, verify_separation, MomentCheck, MomentWitness, PseudoMoments};
pub use power::{bounded_power_certificates, PowerCertificate, PowerTerm};
pub use stability::{poly_stability, BoundedWitness, StabilityReport, StabilityStatus};

pub type QPoly = Polynomial<BigRational>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error("degree {degree} of {what} exceeds the truncation degree {limit}")]
    DegreeTooHigh { what: String, degree: u32, limit: u32 },
    #[error("Gram basis of size {size} exceeds the limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("pseudo-moments missing monomial of degree {0}")]
    MissingMoment(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModuleKind {
    #[serde(rename = "qm")]
    QuadraticModule,
    #[serde(rename = "preordering")]
    Preordering,
}

/// Generators `g_1, …, g_s` (with `g_0 = 1` implicit) over a fixed variable list.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModuleSpec {
    pub vars: VarList,
    pub generators: Vec<QPoly>,
    pub kind: ModuleKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemberOptions {
    pub sdp: SdpOptions,
    /// Denominator cap when rationalizing Gram entries.
    pub max_den: u64,
    /// Largest Gram basis accepted.
    pub max_basis: usize,
}

impl Default for MemberOptions {
    fn default() -> Self {
        MemberOptions { sdp: SdpOptions::default(), max_den: 1_000_000, max_basis: 300 }
    }
}

impl QuadraticModuleSpec {
    pub fn new(vars: VarList, generators: Vec<QPoly>, kind: ModuleKind) -> Result<Self, QmError> {
        let mut gens = Vec::with_capacity(generators.len());
        for g in generators {
            gens.push(if g.vars() == &vars { g } else { g.embed(vars.clone())? });
        }
        Ok(QuadraticModuleSpec { vars, generators: gens, kind })
    }

    pub fn qm(vars: VarList, generators: Vec<QPoly>) -> Result<Self, QmError> {
        Self::new(vars, generators, ModuleKind::QuadraticModule)
    }

    /// Parses generator strings over the given variable names.
    pub fn parse(vars: &[&str], generators: &[&str], kind: ModuleKind) -> Result<Self, QmError> {
        let vars = var_list(vars.iter().copied());
        let gens = generators
            .iter()
            .map(|g| parse_polynomial(g, Some(vars.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(vars, gens, kind)
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    /// Multipliers used at truncation degree `d`: `1`, then the generators or,
    /// for a preordering, all products of nonempty generator subsets of degree `<= d`.
    pub fn multipliers(&self, d: u32) -> Vec<QPoly> {
        let one = QPoly::one(self.vars.clone());
        let mut out = vec![one.clone()];
        match self.kind {
            ModuleKind::QuadraticModule => out.extend(self.generators.iter().filter(|g| g.degree() <= d).cloned()),
            ModuleKind::Preordering => {
                let mut products: Vec<QPoly> = Vec::new();
                for g in &self.generators {
                    let mut next = products.clone();
                    next.push(g.clone());
                    for p in &products {
                        let gp = p * g;
                        if gp.degree() <= d {
                            next.push(gp);
                        }
                    }
                    products = next;
                }
                out.extend(products.into_iter().filter(|p| p.degree() <= d));
            }
        }
        out
    }

    /// Same module with the preordering products written out as generators.
    pub fn expand_preordering(&self, d: u32) -> Self {
        QuadraticModuleSpec {
            vars: self.vars.clone(),
            generators: self.multipliers(d).into_iter().skip(1).collect(),
            kind: ModuleKind::QuadraticModule,
        }
    }

    pub fn to_json(&self) -> ModuleJson {
        ModuleJson {
            vars: self.vars.to_vec(),
            kind: self.kind,
            generators: self.generators.iter().map(|g| g.to_json()).collect(),
        }
    }

    pub fn from_json(j: &ModuleJson) -> Result<Self, QmError> {
        let vars = var_list(j.vars.iter().cloned());
        let gens = j.generators.iter().map(QPoly::from_json).collect::<Result<Vec<_>, _>>()?;
        Self::new(vars, gens, j.kind)
    }
}

/// `{"vars":[...], "kind":"qm"|"preordering", "generators":[...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleJson {
    pub vars: Vec<String>,
    pub kind: ModuleKind,
    pub generators: Vec<PolynomialJson>,
}

fn prod_vars(vars: &VarList, idx: impl Iterator<Item = usize>) -> QPoly {
    idx.fold(QPoly::one(vars.clone()), |acc, i| &acc * &QPoly::var_index(vars.clone(), i))
}

/// `x_1 - 1, …, x_n - 1, c - x_1⋯x_n`.
pub fn example_3_3(n: usize, c: BigRational) -> QuadraticModuleSpec {
    let vars = indexed_vars("x", n);
    let one = QPoly::one(vars.clone());
    let mut gens: Vec<QPoly> = (0..n).map(|i| &QPoly::var_index(vars.clone(), i) - &one).collect();
    gens.push(-prod_vars(&vars, 0..n).add_constant(&-c));
    QuadraticModuleSpec::qm(vars, gens).expect("consistent variables")
}

/// `1 - x_1, …, 1 - x_n, x_1⋯x_n - c, x_1 x_n², x_1 x_2 x_n², …, x_1⋯x_{n-1} x_n²`.
pub fn example_3_4(n: usize, c: BigRational) -> QuadraticModuleSpec {
    let vars = indexed_vars("x", n);
    let one = QPoly::one(vars.clone());
    let mut gens: Vec<QPoly> = (0..n).map(|i| &one - &QPoly::var_index(vars.clone(), i)).collect();
    gens.push(prod_vars(&vars, 0..n).add_constant(&-c));
    let xn2 = QPoly::var_index(vars.clone(), n - 1).pow(2);
    for k in 1..n {
        gens.push(&prod_vars(&vars, 0..k) * &xn2);
    }
    QuadraticModuleSpec::qm(vars, gens).expect("consistent variables")
}

/// Preordering of `ℝ[x, y]` generated by `(1 - x) x y²`.
pub fn example_4_2() -> QuadraticModuleSpec {
    QuadraticModuleSpec::parse(&["x", "y"], &["(1 - x)*x*y^2"], ModuleKind::Preordering).expect("literal")
}

/// `N`: preordering of `ℝ[x, y]` generated by `(1 - x) x³`.
pub fn example_couex() -> QuadraticModuleSpec {
    QuadraticModuleSpec::parse(&["x", "y"], &["(1 - x)*x^3"], ModuleKind::Preordering).expect("literal")
}

/// `M`: preordering of `ℝ[x, y]` generated by `(1 - x) x³ y²`.
pub fn example_couex_m() -> QuadraticModuleSpec {
    QuadraticModuleSpec::parse(&["x", "y"], &["(1 - x)*x^3*y^2"], ModuleKind::Preordering).expect("literal")
}

/// `QM(1 - Σ x_i²)`.
pub fn ball(n: usize) -> QuadraticModuleSpec {
    let vars = indexed_vars("x", n);
    let g = (0..n).fold(QPoly::one(vars.clone()), |acc, i| &acc - &QPoly::var_index(vars.clone(), i).pow(2));
    QuadraticModuleSpec::qm(vars, vec![g]).expect("consistent variables")
}

/// `Σ x_i²` over the module's variables.
pub fn sum_of_squares_of_vars(vars: &VarList) -> QPoly {
    (0..vars.len()).fold(QPoly::zero(vars.clone()), |acc, i| &acc + &QPoly::var_index(vars.clone(), i).pow(2))
}

#[cfg(test)]
mod tests;
