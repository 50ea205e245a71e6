use serde::Serialize;

use super::{dd, ConeError, ConeRepr, TruncatedCone};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Member,
    NonMember,
    Unknown,
}

/// Decides membership in `C ∩ W` for a finite-dimensional slice `W`.
pub trait MembershipOracle<S> {
    fn member(&self, v: &[S]) -> Membership;
}

impl<S, F: Fn(&[S]) -> Membership> MembershipOracle<S> for F {
    fn member(&self, v: &[S]) -> Membership {
        self(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeqVerdict {
    /// `v + εq ∈ C` at every ε of the schedule.
    InClosure,
    /// Some ε failed. Not a proof of non-membership.
    NotDetected,
    /// The oracle could not decide some ε.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsVerdict {
    pub eps: String,
    pub verdict: Membership,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeqClosureWitness {
    pub v: Vec<String>,
    pub q: Vec<String>,
    pub schedule: Vec<EpsVerdict>,
}

/// `{1, 1/10, …, 1/10^6}`.
pub fn default_schedule<S: Scalar>() -> Vec<S> {
    (0..=6).map(|k| S::from_ratio(1, 10i64.pow(k))).collect()
}

/// One-sided sequential-closure test: `v + εq ∈ C` for each ε in the schedule.
pub fn seq_closure_member<S: Scalar>(
    oracle: &dyn MembershipOracle<S>,
    v: &[S],
    q: &[S],
    schedule: &[S],
) -> Result<(SeqVerdict, SeqClosureWitness), ConeError> {
    if v.len() != q.len() {
        return Err(ConeError::DimensionMismatch { expected: v.len(), got: q.len() });
    }
    if schedule.is_empty() {
        return Err(ConeError::BadSchedule("empty".into()));
    }
    for w in schedule.windows(2) {
        if w[1] >= w[0] {
            return Err(ConeError::BadSchedule("must be strictly decreasing".into()));
        }
    }
    if !schedule.last().is_some_and(|e| e.is_strictly_positive()) {
        return Err(ConeError::BadSchedule("entries must be positive".into()));
    }
    let mut verdict = SeqVerdict::InClosure;
    let mut rows = Vec::with_capacity(schedule.len());
    for eps in schedule {
        let m = oracle.member(&dd::axpy(v, eps, q));
        match m {
            Membership::Member => {}
            Membership::NonMember => verdict = SeqVerdict::NotDetected,
            Membership::Unknown if verdict == SeqVerdict::InClosure => verdict = SeqVerdict::Inconclusive,
            Membership::Unknown => {}
        }
        rows.push(EpsVerdict { eps: eps.to_string(), verdict: m });
    }
    let witness = SeqClosureWitness {
        v: v.iter().map(|x| x.to_string()).collect(),
        q: q.iter().map(|x| x.to_string()).collect(),
        schedule: rows,
    };
    Ok((verdict, witness))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemispaceVerdict<S> {
    /// `dim V/(C ∩ -C) <= 1`, equivalently `C` is closed.
    pub closed: bool,
    pub quotient_dim: usize,
    /// `(v, u)`: `v ∉ C` is the limit of `v + εu ∈ C` when not closed.
    pub limit_witness: Option<(Vec<S>, Vec<S>)>,
}

/// Closedness of a cone with `C ∪ -C = V` via the quotient dimension.
pub fn semispace_closed<S: Scalar>(c: &TruncatedCone<S>) -> Result<SemispaceVerdict<S>, ConeError> {
    match c.repr() {
        ConeRepr::Lexicographic(fs) => {
            let q = dd::rank(fs);
            Ok(SemispaceVerdict { closed: q <= 1, quotient_dim: q, limit_witness: c.lexicographic_limit() })
        }
        ConeRepr::Generators(_) | ConeRepr::Halfspaces(_) => {
            // a polyhedral C with C ∪ -C = V is V or a closed halfspace
            let h = c.h_form()?;
            if !h.equalities.is_empty() {
                return Err(ConeError::HypothesisFailed("cone lies in a proper subspace".into()));
            }
            let facets = &h.inequalities;
            if facets.len() > 1 {
                return Err(ConeError::HypothesisFailed(format!("{} independent facets", facets.len())));
            }
            let quotient_dim = facets.len();
            Ok(SemispaceVerdict { closed: true, quotient_dim, limit_witness: None })
        }
        ConeRepr::SdpSlice(_) => Err(ConeError::Unsupported("SDP-slice")),
    }
}
