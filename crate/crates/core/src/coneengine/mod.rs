//! Finite-dimensional convex cones: duals, interiors, sequential closure
//! by ε-perturbation, and the closedness test for cones with `C ∪ -C = V`.

mod closure;
pub mod dd;

use std::sync::OnceLock;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numkernel::{sdp_feasible, SdpOptions, SdpProblem, SdpStatus};
use crate::scalar::{parse_rational, Scalar};

pub use closure::{
    default_schedule, semispace_closed, seq_closure_member, EpsVerdict, Membership, MembershipOracle, SemispaceVerdict,
    SeqClosureWitness, SeqVerdict,
};
pub use dd::{caratheodory, HForm, VForm};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("vector has length {got}, cone lives in dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("conversion limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("operation not supported for {0} cones")]
    Unsupported(&'static str),
    #[error("hypothesis C ∪ -C = V fails: {0}")]
    HypothesisFailed(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("bad ε schedule: {0}")]
    BadSchedule(String),
    #[error("bad cone encoding: {0}")]
    Encoding(String),
}

/// `{v : ∃ X ⪰ 0, A_i • X = (B v)_i}` where `rhs_map[i]` is row `i` of `B`.
#[derive(Debug, Clone)]
pub struct SdpSlice {
    pub problem: SdpProblem,
    pub rhs_map: Vec<Vec<f64>>,
    pub options: SdpOptions,
}

impl SdpSlice {
    pub fn member(&self, v: &[f64]) -> Membership {
        let mut p = self.problem.clone();
        for (c, row) in p.constraints.iter_mut().zip(&self.rhs_map) {
            c.rhs = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        match sdp_feasible(&p, &self.options).map(|r| r.status) {
            Ok(SdpStatus::Feasible) => Membership::Member,
            Ok(SdpStatus::Infeasible) => Membership::NonMember,
            _ => Membership::Unknown,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ConeRepr<S> {
    /// `cone(g_1, …, g_k)`; the empty list is `{0}`.
    Generators(Vec<Vec<S>>),
    /// `{x : a·x >= 0}`; the empty list is the whole space.
    Halfspaces(Vec<Vec<S>>),
    /// Membership-only projection of a spectrahedron.
    SdpSlice(SdpSlice),
    /// `{x : (L_1 x, L_2 x, …) is lexicographically >= 0}`. Always satisfies `C ∪ -C = V`;
    /// not closed once two of the functionals are independent.
    Lexicographic(Vec<Vec<S>>),
}

#[derive(Debug, Clone)]
pub struct TruncatedCone<S> {
    dim: usize,
    repr: ConeRepr<S>,
    h_cache: OnceLock<Result<HForm<S>, ConeError>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteriorVerdict<S> {
    pub interior: bool,
    /// Nonzero `L ∈ C^∨` with `L(v) <= 0` when not interior.
    pub witness: Option<Vec<S>>,
}

impl<S: Scalar> TruncatedCone<S> {
    fn build(dim: usize, vs: &[Vec<S>], repr: ConeRepr<S>) -> Result<Self, ConeError> {
        if let Some(v) = vs.iter().find(|v| v.len() != dim) {
            return Err(ConeError::DimensionMismatch { expected: dim, got: v.len() });
        }
        Ok(TruncatedCone { dim, repr, h_cache: OnceLock::new() })
    }

    pub fn from_generators(dim: usize, gens: Vec<Vec<S>>) -> Result<Self, ConeError> {
        let g = gens.clone();
        Self::build(dim, &g, ConeRepr::Generators(gens))
    }

    pub fn from_halfspaces(dim: usize, normals: Vec<Vec<S>>) -> Result<Self, ConeError> {
        let n = normals.clone();
        Self::build(dim, &n, ConeRepr::Halfspaces(normals))
    }

    pub fn lexicographic(dim: usize, functionals: Vec<Vec<S>>) -> Result<Self, ConeError> {
        let f = functionals.clone();
        Self::build(dim, &f, ConeRepr::Lexicographic(functionals))
    }

    pub fn sdp_slice(dim: usize, slice: SdpSlice) -> Result<Self, ConeError> {
        if let Some(r) = slice.rhs_map.iter().find(|r| r.len() != dim) {
            return Err(ConeError::DimensionMismatch { expected: dim, got: r.len() });
        }
        Ok(TruncatedCone { dim, repr: ConeRepr::SdpSlice(slice), h_cache: OnceLock::new() })
    }

    pub fn orthant(dim: usize) -> Self {
        let gens = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { S::one() } else { S::zero() }).collect())
            .collect();
        Self::from_generators(dim, gens).expect("consistent dimensions")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn repr(&self) -> &ConeRepr<S> {
        &self.repr
    }

    pub fn is_polyhedral(&self) -> bool {
        matches!(self.repr, ConeRepr::Generators(_) | ConeRepr::Halfspaces(_))
    }

    fn check_vec(&self, v: &[S]) -> Result<(), ConeError> {
        if v.len() != self.dim {
            return Err(ConeError::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        Ok(())
    }

    /// Equalities and facet normals of the (closed) polyhedral cone.
    pub fn h_form(&self) -> Result<HForm<S>, ConeError> {
        self.h_cache
            .get_or_init(|| match &self.repr {
                ConeRepr::Halfspaces(a) => {
                    let vf = dd::halfspaces_to_generators(self.dim, a)?;
                    dd::generators_to_halfspaces(self.dim, &vf)
                }
                ConeRepr::Generators(g) => {
                    dd::generators_to_halfspaces(self.dim, &VForm { lineality: vec![], rays: g.clone() })
                }
                ConeRepr::SdpSlice(_) => Err(ConeError::Unsupported("SDP-slice")),
                ConeRepr::Lexicographic(_) => Err(ConeError::Unsupported("lexicographic")),
            })
            .clone()
    }

    /// Lineality and extreme rays.
    pub fn v_form(&self) -> Result<VForm<S>, ConeError> {
        let h = self.h_form()?;
        let mut all = h.inequalities.clone();
        for e in &h.equalities {
            all.push(e.clone());
            all.push(dd::scaled(e, &-S::one()));
        }
        dd::halfspaces_to_generators(self.dim, &all)
    }

    pub fn contains(&self, v: &[S]) -> Result<bool, ConeError> {
        self.check_vec(v)?;
        match &self.repr {
            ConeRepr::Halfspaces(a) => Ok(a.iter().all(|a| !dd::dot(a, v).is_strictly_negative())),
            ConeRepr::Lexicographic(fs) => Ok(fs
                .iter()
                .map(|f| dd::dot(f, v))
                .find(|x| !x.is_negligible())
                .map_or(true, |x| x > S::zero())),
            ConeRepr::SdpSlice(s) => {
                let vf: Vec<f64> = v.iter().map(|x| x.to_f64_lossy()).collect();
                match s.member(&vf) {
                    Membership::Member => Ok(true),
                    Membership::NonMember => Ok(false),
                    Membership::Unknown => Err(ConeError::Precondition("SDP membership inconclusive".into())),
                }
            }
            ConeRepr::Generators(_) => Ok(self.h_form()?.contains(v)),
        }
    }

    /// `C^∨ = {L : L(c) >= 0 for c in C}` in the same coordinates.
    pub fn dual_cone(&self) -> Result<Self, ConeError> {
        match &self.repr {
            ConeRepr::Generators(g) => Self::from_halfspaces(self.dim, g.clone()),
            ConeRepr::Halfspaces(a) => Self::from_generators(self.dim, a.clone()),
            // the closure is the halfspace of the first nonzero functional
            ConeRepr::Lexicographic(fs) => Self::from_generators(
                self.dim,
                fs.iter().find(|f| f.iter().any(|x| !x.is_negligible())).cloned().into_iter().collect(),
            ),
            ConeRepr::SdpSlice(_) => Err(ConeError::Unsupported("SDP-slice")),
        }
    }

    /// Closure equality for polyhedral cones, by mutual containment of generators.
    pub fn same_closure(&self, other: &Self) -> Result<bool, ConeError> {
        let inside = |a: &Self, b: &Self| -> Result<bool, ConeError> {
            let v = a.v_form()?;
            let hb = b.h_form()?;
            Ok(v.rays.iter().all(|r| hb.contains(r))
                && v.lineality.iter().all(|l| hb.contains(l) && hb.contains(&dd::scaled(l, &-S::one()))))
        };
        Ok(inside(self, other)? && inside(other, self)?)
    }

    /// Interior test through the facet normals of the dual side.
    pub fn is_interior(&self, v: &[S]) -> Result<InteriorVerdict<S>, ConeError> {
        self.check_vec(v)?;
        let h = self.h_form()?;
        if let Some(e) = h.equalities.first() {
            let val = dd::dot(e, v);
            let l = if val > S::zero() { dd::scaled(e, &-S::one()) } else { e.clone() };
            return Ok(InteriorVerdict { interior: false, witness: Some(l) });
        }
        for a in &h.inequalities {
            if !dd::dot(a, v).is_strictly_positive() {
                return Ok(InteriorVerdict { interior: false, witness: Some(a.clone()) });
            }
        }
        Ok(InteriorVerdict { interior: true, witness: None })
    }

    /// Checks that `v + ε q` is interior, given interior `q` and `v ∈ C̄`.
    pub fn interior_shift(&self, q: &[S], v: &[S], eps: &S) -> Result<bool, ConeError> {
        if !eps.is_strictly_positive() {
            return Err(ConeError::Precondition("ε must be positive".into()));
        }
        if !self.is_interior(q)?.interior {
            return Err(ConeError::Precondition("q is not an interior point".into()));
        }
        if !self.h_form()?.contains(v) {
            return Err(ConeError::Precondition("v is not in the closure".into()));
        }
        Ok(self.is_interior(&dd::axpy(v, eps, q))?.interior)
    }

    /// Boundary witness for a non-closed lexicographic cone:
    /// `(v, u)` with `v ∉ C` but `v + εu ∈ C` for all ε > 0.
    fn lexicographic_limit(&self) -> Option<(Vec<S>, Vec<S>)> {
        let ConeRepr::Lexicographic(fs) = &self.repr else {
            return None;
        };
        let mut basis: Vec<Vec<S>> = Vec::new();
        for f in fs {
            let mut trial = basis.clone();
            trial.push(f.clone());
            if dd::rank(&trial) > basis.len() {
                basis = trial;
            }
            if basis.len() == 2 {
                break;
            }
        }
        if basis.len() < 2 {
            return None;
        }
        // solve L1 v = 0, L2 v = -1 and L1 u = 1 on the row space of L1, L2
        let solve = |t1: S, t2: S| -> Vec<S> {
            let mut m = vec![basis[0].clone(), basis[1].clone()];
            m[0].push(t1);
            m[1].push(t2);
            let piv = dd::rref(&mut m);
            let mut x = vec![S::zero(); self.dim];
            for (r, &c) in piv.iter().enumerate() {
                x[c] = m[r][self.dim].clone();
            }
            x
        };
        Some((solve(S::zero(), -S::one()), solve(S::one(), S::zero())))
    }
}

impl<S: Scalar> MembershipOracle<S> for TruncatedCone<S> {
    fn member(&self, v: &[S]) -> Membership {
        match self.contains(v) {
            Ok(true) => Membership::Member,
            Ok(false) => Membership::NonMember,
            Err(_) => Membership::Unknown,
        }
    }
}

/// JSON encoding for polyhedral cones over exact rationals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeJson {
    pub dim: usize,
    pub kind: String,
    pub vectors: Vec<Vec<String>>,
}

impl TruncatedCone<BigRational> {
    pub fn to_json(&self) -> Result<ConeJson, ConeError> {
        let (kind, vs) = match &self.repr {
            ConeRepr::Generators(g) => ("generators", g),
            ConeRepr::Halfspaces(a) => ("halfspaces", a),
            ConeRepr::Lexicographic(f) => ("lexicographic", f),
            ConeRepr::SdpSlice(_) => return Err(ConeError::Unsupported("SDP-slice")),
        };
        Ok(ConeJson {
            dim: self.dim,
            kind: kind.into(),
            vectors: vs.iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect(),
        })
    }

    pub fn from_json(j: &ConeJson) -> Result<Self, ConeError> {
        let vs = j
            .vectors
            .iter()
            .map(|v| {
                v.iter()
                    .map(|s| parse_rational(s).ok_or_else(|| ConeError::Encoding(format!("bad number `{s}`"))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        match j.kind.as_str() {
            "generators" => Self::from_generators(j.dim, vs),
            "halfspaces" => Self::from_halfspaces(j.dim, vs),
            "lexicographic" => Self::lexicographic(j.dim, vs),
            k => Err(ConeError::Encoding(format!("unknown kind `{k}`"))),
        }
    }
}

#[cfg(test)]
mod tests;
