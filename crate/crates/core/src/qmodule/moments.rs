use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::{QPoly, QmError, QuadraticModuleSpec};
use crate::numkernel::min_eigenpair;
use crate::polyring::{monomial_basis, Monomial, VarList};

/// Linear functional on polynomials of degree `<= degree`, stored by its
/// values on monomials. Missing monomials of admissible degree read as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoMoments {
    pub vars: VarList,
    pub degree: u32,
    pub values: BTreeMap<Monomial, f64>,
}

impl PseudoMoments {
    pub fn new(vars: VarList, degree: u32, values: BTreeMap<Monomial, f64>) -> Self {
        PseudoMoments { vars, degree, values }
    }

    /// Evaluation at a point.
    pub fn dirac(vars: VarList, degree: u32, point: &[f64]) -> Self {
        let values = monomial_basis(vars.len(), degree).into_iter().map(|m| {
            let v = m.eval(point);
            (m, v)
        });
        PseudoMoments { vars, degree, values: values.collect() }
    }

    pub fn get(&self, m: &Monomial) -> Result<f64, QmError> {
        if m.degree() > self.degree {
            return Err(QmError::MissingMoment(m.degree()));
        }
        Ok(self.values.get(m).copied().unwrap_or(0.0))
    }

    pub fn apply(&self, p: &QPoly) -> Result<f64, QmError> {
        p.terms().try_fold(0.0, |acc, (m, c)| Ok(acc + c.to_f64().unwrap_or(f64::NAN) * self.get(m)?))
    }

    /// `[L(g · m_r · m_c)]` over the given basis.
    pub fn localizing_matrix(&self, g: &QPoly, basis: &[Monomial]) -> Result<DMatrix<f64>, QmError> {
        let n = basis.len();
        let mut out = DMatrix::zeros(n, n);
        for r in 0..n {
            for c in r..n {
                let mrc = basis[r].mul(&basis[c]);
                let mut s = 0.0;
                for (beta, cb) in g.terms() {
                    s += cb.to_f64().unwrap_or(f64::NAN) * self.get(&mrc.mul(beta))?;
                }
                out[(r, c)] = s;
                out[(c, r)] = s;
            }
        }
        Ok(out)
    }
}

/// A polynomial `h = Σ v_i m_i` with `L(h² · multiplier) < 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentWitness {
    pub multiplier: String,
    pub basis: Vec<Vec<u32>>,
    pub vector: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MomentCheck {
    PsdPass { min_eig: f64 },
    PsdFail(MomentWitness),
}

impl MomentCheck {
    pub fn passed(&self) -> bool {
        matches!(self, MomentCheck::PsdPass { .. })
    }
}

/// Moment and localizing matrices at total truncation `2d`: the basis for a
/// multiplier `g` has degree `<= ⌊(2d - deg g)/2⌋`.
pub fn dual_moment_check(l: &PseudoMoments, m: &QuadraticModuleSpec, d: u32, tol_psd: f64) -> Result<MomentCheck, QmError> {
    check_at(l, m, 2 * d, tol_psd)
}

pub(crate) fn check_at(l: &PseudoMoments, m: &QuadraticModuleSpec, total: u32, tol_psd: f64) -> Result<MomentCheck, QmError> {
    if l.vars != m.vars {
        return Err(QmError::Precondition("pseudo-moments and module use different variables".into()));
    }
    if l.degree < total {
        return Err(QmError::MissingMoment(total));
    }
    let mut worst = f64::INFINITY;
    for g in m.multipliers(total) {
        let basis = monomial_basis(m.nvars(), (total - g.degree()) / 2);
        let mat = l.localizing_matrix(&g, &basis)?;
        let (eig, vec) = min_eigenpair(&mat)?;
        if eig < -tol_psd {
            let value = (vec.transpose() * &mat * &vec)[(0, 0)];
            return Ok(MomentCheck::PsdFail(MomentWitness {
                multiplier: g.to_string(),
                basis: basis.iter().map(|b| b.exps().to_vec()).collect(),
                vector: vec.iter().copied().collect(),
                value,
            }));
        }
        worst = worst.min(eig);
    }
    Ok(MomentCheck::PsdPass { min_eig: worst })
}

/// Independent check of an infeasibility ray: `L` must pass the localizing
/// checks at truncation `total` and satisfy `L(f) < 0`. Returns `-L(f)`.
pub fn verify_separation(
    l: &PseudoMoments,
    m: &QuadraticModuleSpec,
    f: &QPoly,
    total: u32,
    tol_psd: f64,
) -> Result<Option<f64>, QmError> {
    if !check_at(l, m, total, tol_psd)?.passed() {
        return Ok(None);
    }
    let v = l.apply(f)?;
    Ok((v < 0.0).then_some(-v))
}
