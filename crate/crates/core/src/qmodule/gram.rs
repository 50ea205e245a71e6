//! `target = Σ_b sign_b · mult_b · (m_bᵀ G_b m_b)` with `G_b ⪰ 0`, one linear
//! constraint per monomial of degree `<= d`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use super::{MemberOptions, PseudoMoments, QPoly, QmError};
use crate::numkernel::{min_eigenvalue, sdp_feasible, SdpEntry, SdpProblem, SdpStatus};
use crate::polyring::{monomial_basis, Monomial, VarList};
use crate::scalar::{rationalize, rationalize_within};

#[derive(Debug, Clone, PartialEq)]
pub struct GramBlockSpec {
    pub multiplier: QPoly,
    pub sign: i32,
    pub basis: Vec<Monomial>,
}

#[derive(Debug, Clone)]
pub struct GramSystem {
    vars: VarList,
    degree: u32,
    target: QPoly,
    blocks: Vec<GramBlockSpec>,
    rows: Vec<Monomial>,
}

/// A verified block: `sign · multiplier · (basisᵀ gram basis)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertBlock {
    pub multiplier: QPoly,
    pub sign: i32,
    pub basis: Vec<Monomial>,
    pub gram: Vec<Vec<BigRational>>,
}

impl CertBlock {
    /// `sign · multiplier · basisᵀ G basis` as a polynomial.
    pub fn expand(&self) -> QPoly {
        let vars = self.multiplier.vars().clone();
        let mut sos = QPoly::zero(vars);
        for (r, mr) in self.basis.iter().enumerate() {
            for (c, mc) in self.basis.iter().enumerate() {
                if !self.gram[r][c].is_zero() {
                    sos.add_term(mr.mul(mc), self.gram[r][c].clone());
                }
            }
        }
        let p = &sos * &self.multiplier;
        if self.sign < 0 {
            -p
        } else {
            p
        }
    }

    pub fn gram_f64(&self) -> DMatrix<f64> {
        let n = self.basis.len();
        DMatrix::from_fn(n, n, |r, c| self.gram[r][c].to_f64().unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone)]
pub struct MembershipCertificate {
    pub degree: u32,
    pub target: QPoly,
    pub blocks: Vec<CertBlock>,
    /// Max-norm of `target - Σ blocks` after exact re-expansion.
    pub residual: f64,
    pub min_eig: f64,
    pub tol_feas: f64,
    pub tol_psd: f64,
}

impl MembershipCertificate {
    pub fn expand(&self) -> QPoly {
        self.blocks.iter().fold(QPoly::zero(self.target.vars().clone()), |acc, b| &acc + &b.expand())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "degree": self.degree,
            "target": self.target.to_string(),
            "residual": self.residual,
            "mineig": self.min_eig,
            "tolerances": { "tol_feas": self.tol_feas, "tol_psd": self.tol_psd },
            "blocks": self.blocks.iter().map(|b| json!({
                "multiplier": b.multiplier.to_string(),
                "sign": b.sign,
                "basis": b.basis.iter().map(|m| m.exps().to_vec()).collect::<Vec<_>>(),
                "gram": b.gram.iter().map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// One pruning step: `row` forced the listed basis elements out of their blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneStage {
    pub row: Monomial,
    /// Sign of the diagonal coefficients feeding `row`.
    pub positive: bool,
    pub removed: Vec<(usize, Monomial)>,
}

#[derive(Debug, Clone)]
pub enum GramOutcome {
    Certified(MembershipCertificate),
    /// Dual ray read as pseudo-moments `L` with `L(target) < 0` and PSD localizing matrices.
    Infeasible { moments: PseudoMoments, margin: f64 },
    NoCertificate { reason: String },
}

impl GramSystem {
    pub fn new(vars: VarList, target: QPoly, degree: u32) -> Result<Self, QmError> {
        if target.degree() > degree && !target.is_zero() {
            return Err(QmError::DegreeTooHigh { what: "target".into(), degree: target.degree(), limit: degree });
        }
        let rows = monomial_basis(vars.len(), degree);
        Ok(GramSystem { vars, degree, target, blocks: Vec::new(), rows })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn blocks(&self) -> &[GramBlockSpec] {
        &self.blocks
    }

    /// Adds `sign · multiplier · σ` with `σ` SOS of degree `<= 2⌊(d - deg multiplier)/2⌋`.
    /// Multipliers of degree above `d` are skipped (returns false).
    pub fn add_block(&mut self, multiplier: QPoly, sign: i32, max_basis: usize) -> Result<bool, QmError> {
        if multiplier.is_zero() || multiplier.degree() > self.degree {
            return Ok(false);
        }
        let half = (self.degree - multiplier.degree()) / 2;
        let basis = monomial_basis(self.vars.len(), half);
        if basis.len() > max_basis {
            return Err(QmError::TooLarge { size: basis.len(), limit: max_basis });
        }
        self.blocks.push(GramBlockSpec { multiplier, sign, basis });
        Ok(true)
    }

    /// Indices of blocks with a nonempty basis; only these enter the SDP.
    fn active(&self) -> Vec<usize> {
        (0..self.blocks.len()).filter(|&i| !self.blocks[i].basis.is_empty()).collect()
    }

    pub fn to_sdp(&self) -> SdpProblem {
        let index: BTreeMap<&Monomial, usize> = self.rows.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut per_row: Vec<BTreeMap<(usize, usize, usize), f64>> = vec![BTreeMap::new(); self.rows.len()];
        for (bi, b) in self.active().into_iter().map(|i| &self.blocks[i]).enumerate() {
            let terms: Vec<(Monomial, f64)> =
                b.multiplier.terms().map(|(m, c)| (m.clone(), c.to_f64().unwrap_or(f64::NAN) * b.sign as f64)).collect();
            for r in 0..b.basis.len() {
                for c in r..b.basis.len() {
                    let mrc = b.basis[r].mul(&b.basis[c]);
                    let factor = if r == c { 1.0 } else { 2.0 };
                    for (beta, cb) in &terms {
                        let alpha = mrc.mul(beta);
                        let row = index[&alpha];
                        *per_row[row].entry((bi, r, c)).or_insert(0.0) += factor * cb;
                    }
                }
            }
        }
        let mut prob = SdpProblem::new(self.active().iter().map(|&i| self.blocks[i].basis.len()).collect());
        for (i, m) in self.rows.iter().enumerate() {
            let entries = per_row[i]
                .iter()
                .filter(|(_, v)| **v != 0.0)
                .map(|(&(block, row, col), &value)| SdpEntry { block, row, col, value })
                .collect();
            let rhs = self.target.coeff(m).to_f64().unwrap_or(f64::NAN);
            prob.add_constraint(entries, rhs);
        }
        prob
    }

    /// Exact `target - Σ blocks` as a coefficient map.
    fn residual_map(&self, grams: &[Vec<Vec<BigRational>>]) -> BTreeMap<Monomial, BigRational> {
        let mut res: BTreeMap<Monomial, BigRational> = self.target.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        for (b, g) in self.blocks.iter().zip(grams) {
            let sign = BigRational::from_integer(b.sign.into());
            for (r, mr) in b.basis.iter().enumerate() {
                for (c, mc) in b.basis.iter().enumerate() {
                    if g[r][c].is_zero() {
                        continue;
                    }
                    let mrc = mr.mul(mc);
                    for (beta, cb) in b.multiplier.terms() {
                        let e = res.entry(mrc.mul(beta)).or_insert_with(BigRational::zero);
                        *e -= &sign * cb * &g[r][c];
                    }
                }
            }
        }
        res.retain(|_, v| !v.is_zero());
        res
    }

    /// Pushes the exact residual into the first block whose multiplier is the constant 1,
    /// spreading each coefficient evenly over the Gram pairs that produce it.
    fn absorb_residual(&self, grams: &mut [Vec<Vec<BigRational>>]) {
        let Some(bi) = self.blocks.iter().position(|b| b.multiplier.is_constant() && b.multiplier.constant_term() == BigRational::from_integer(1.into())) else {
            return;
        };
        let res = self.residual_map(grams);
        let b = &self.blocks[bi];
        let mut pairs: BTreeMap<Monomial, Vec<(usize, usize)>> = BTreeMap::new();
        for r in 0..b.basis.len() {
            for c in r..b.basis.len() {
                pairs.entry(b.basis[r].mul(&b.basis[c])).or_default().push((r, c));
            }
        }
        let sign = BigRational::from_integer(b.sign.into());
        for (m, coef) in res {
            let Some(ps) = pairs.get(&m) else { continue };
            let share = &sign * coef / BigRational::from_integer(ps.len().into());
            for &(r, c) in ps {
                if r == c {
                    grams[bi][r][r] += &share;
                } else {
                    let half = &share / BigRational::from_integer(2.into());
                    grams[bi][r][c] += &half;
                    grams[bi][c][r] += &half;
                }
            }
        }
    }

    /// Drops basis elements whose diagonal Gram entry is forced to zero: a row
    /// with zero right-hand side fed only by diagonal entries of one sign.
    /// Repeats until nothing changes. The feasible set is unchanged.
    pub fn prune(&mut self) -> Vec<PruneStage> {
        let mut stages = Vec::new();
        loop {
            let mut rows: BTreeMap<Monomial, Vec<(usize, usize, usize, f64)>> = BTreeMap::new();
            for (bi, b) in self.blocks.iter().enumerate() {
                for r in 0..b.basis.len() {
                    for c in r..b.basis.len() {
                        let mrc = b.basis[r].mul(&b.basis[c]);
                        for (beta, cb) in b.multiplier.terms() {
                            let v = cb.to_f64().unwrap_or(f64::NAN) * b.sign as f64;
                            rows.entry(mrc.mul(beta)).or_default().push((bi, r, c, v));
                        }
                    }
                }
            }
            let mut stage = None;
            for (alpha, entries) in &rows {
                if !self.target.coeff(alpha).is_zero() {
                    continue;
                }
                let diag = entries.iter().all(|e| e.1 == e.2);
                let pos = entries.iter().all(|e| e.3 > 0.0);
                let neg = entries.iter().all(|e| e.3 < 0.0);
                if diag && (pos || neg) {
                    let removed = entries.iter().map(|e| (e.0, self.blocks[e.0].basis[e.1].clone())).collect();
                    stage = Some(PruneStage { row: alpha.clone(), positive: pos, removed });
                    break;
                }
            }
            let Some(stage) = stage else { return stages };
            for (bi, m) in &stage.removed {
                self.blocks[*bi].basis.retain(|x| x != m);
            }
            stages.push(stage);
        }
    }

    pub fn solve(&self, opts: &MemberOptions) -> Result<GramOutcome, QmError> {
        let mut reduced = self.clone();
        let stages = reduced.prune();
        let prob = reduced.to_sdp();
        let sol = sdp_feasible(&prob, &opts.sdp)?;
        match sol.status {
            SdpStatus::Feasible => Ok(reduced.certify(&sol.x, opts)),
            SdpStatus::Infeasible => {
                let ray = sol.ray.expect("infeasible result carries a ray");
                let mut values: BTreeMap<Monomial, f64> = self.rows.iter().cloned().zip(ray).collect();
                if !stages.is_empty() {
                    if let Some(full) = self.full_ray(opts)? {
                        values = full;
                    } else if !self.repair_ray(&mut values, &stages, opts.sdp.tol_psd)? {
                        return Ok(GramOutcome::NoCertificate {
                            reason: "dual ray of the pruned system does not extend".into(),
                        });
                    }
                }
                let moments = PseudoMoments::new(self.vars.clone(), self.degree, values);
                let margin = -moments.apply(&self.target)?;
                if margin <= 0.0 {
                    return Ok(GramOutcome::NoCertificate { reason: "dual ray does not separate".into() });
                }
                Ok(GramOutcome::Infeasible { moments, margin })
            }
            SdpStatus::Inconclusive => Ok(GramOutcome::NoCertificate { reason: format!("solver: {}", sol.reason) }),
        }
    }

    /// Ray from the unpruned system, when the solver finds one there.
    fn full_ray(&self, opts: &MemberOptions) -> Result<Option<BTreeMap<Monomial, f64>>, QmError> {
        let sol = sdp_feasible(&self.to_sdp(), &opts.sdp)?;
        Ok(match (sol.status, sol.ray) {
            (SdpStatus::Infeasible, Some(ray)) => Some(self.rows.iter().cloned().zip(ray).collect()),
            _ => None,
        })
    }

    /// `[L(sign · multiplier · m_r m_c)]` for one block over the given basis.
    fn block_matrix(&self, values: &BTreeMap<Monomial, f64>, b: &GramBlockSpec, basis: &[Monomial]) -> DMatrix<f64> {
        let n = basis.len();
        DMatrix::from_fn(n, n, |r, c| {
            let mrc = basis[r].mul(&basis[c]);
            b.multiplier
                .terms()
                .map(|(beta, cb)| cb.to_f64().unwrap_or(f64::NAN) * b.sign as f64 * values.get(&mrc.mul(beta)).unwrap_or(&0.0))
                .sum()
        })
    }

    /// Undoes the pruning stages last to first, moving `L(row)` of each stage
    /// until the restored blocks are PSD. Those rows have zero target
    /// coefficient, so `L(target)` does not change.
    fn repair_ray(
        &self,
        values: &mut BTreeMap<Monomial, f64>,
        stages: &[PruneStage],
        tol_psd: f64,
    ) -> Result<bool, QmError> {
        let mut bases: Vec<Vec<Monomial>> = {
            let mut r = self.clone();
            r.prune();
            r.blocks.into_iter().map(|b| b.basis).collect()
        };
        for stage in stages.iter().rev() {
            for (bi, m) in &stage.removed {
                bases[*bi].push(m.clone());
            }
            let touched: Vec<usize> = stage.removed.iter().map(|e| e.0).collect();
            let psd = |values: &BTreeMap<Monomial, f64>| -> Result<bool, QmError> {
                for &bi in &touched {
                    let mat = self.block_matrix(values, &self.blocks[bi], &bases[bi]);
                    if min_eigenvalue(&mat)? < -tol_psd / 2.0 {
                        return Ok(false);
                    }
                }
                Ok(true)
            };
            let base = *values.get(&stage.row).unwrap_or(&0.0);
            let dir = if stage.positive { 1.0 } else { -1.0 };
            let mut t = 1e-6;
            while !psd(values)? {
                if t > 1e12 {
                    return Ok(false);
                }
                values.insert(stage.row.clone(), base + dir * t);
                t *= 4.0;
            }
        }
        // Normalize to max-abs 1 as for solver rays.
        let scale = values.values().fold(0.0f64, |a, v| a.max(v.abs()));
        if scale > 0.0 {
            values.values_mut().for_each(|v| *v /= scale);
        }
        Ok(true)
    }

    /// Rationalizes float Grams and re-verifies them exactly. Tries the plain
    /// denominator cap first, then snaps entries to simpler rationals.
    pub fn certify(&self, x: &[DMatrix<f64>], opts: &MemberOptions) -> GramOutcome {
        let mut last = None;
        for snap in [None, Some(1e-9), Some(1e-7), Some(1e-5)] {
            match self.certify_with(x, opts, snap) {
                GramOutcome::NoCertificate { reason } => last = Some(reason),
                done => return done,
            }
        }
        GramOutcome::NoCertificate { reason: last.unwrap_or_default() }
    }

    fn certify_with(&self, x: &[DMatrix<f64>], opts: &MemberOptions, snap: Option<f64>) -> GramOutcome {
        let mut grams: Vec<Vec<Vec<BigRational>>> = vec![Vec::new(); self.blocks.len()];
        for (&bi, m) in self.active().iter().zip(x) {
            let n = m.nrows();
            let mut g = vec![vec![BigRational::zero(); n]; n];
            for r in 0..n {
                for c in r..n {
                    let v = 0.5 * (m[(r, c)] + m[(c, r)]);
                    let q = match snap {
                        Some(tol) => rationalize_within(v, tol, opts.max_den),
                        None => rationalize(v, opts.max_den),
                    };
                    let Some(q) = q else {
                        return GramOutcome::NoCertificate { reason: "rationalization failed".into() };
                    };
                    g[r][c] = q.clone();
                    g[c][r] = q;
                }
            }
            grams[bi] = g;
        }
        self.absorb_residual(&mut grams);
        let res = self.residual_map(&grams);
        let residual = res.values().map(|v| v.abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
        let blocks: Vec<CertBlock> = self
            .blocks
            .iter()
            .zip(grams)
            .map(|(b, gram)| CertBlock { multiplier: b.multiplier.clone(), sign: b.sign, basis: b.basis.clone(), gram })
            .collect();
        let mut min_eig = f64::INFINITY;
        for b in blocks.iter().filter(|b| !b.basis.is_empty()) {
            match min_eigenvalue(&b.gram_f64()) {
                Ok(e) => min_eig = min_eig.min(e),
                Err(e) => return GramOutcome::NoCertificate { reason: format!("eigenvalue check: {e}") },
            }
        }
        if min_eig.is_infinite() {
            min_eig = 0.0;
        }
        if residual > opts.sdp.tol_feas {
            return GramOutcome::NoCertificate { reason: format!("exact residual {residual:e} above tolerance") };
        }
        if min_eig < -opts.sdp.tol_psd {
            return GramOutcome::NoCertificate { reason: format!("rationalized Gram has eigenvalue {min_eig:e}") };
        }
        GramOutcome::Certified(MembershipCertificate {
            degree: self.degree,
            target: self.target.clone(),
            blocks,
            residual,
            min_eig,
            tol_feas: opts.sdp.tol_feas,
            tol_psd: opts.sdp.tol_psd,
        })
    }
}
