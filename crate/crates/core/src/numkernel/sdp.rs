//! Primal-dual interior-point SDP solver (HKM direction, Mehrotra
//! predictor-corrector) on dense block-diagonal data.
//!
//! Feasibility uses a τ-embedding: one extra 1×1 block τ and the column
//! `r = b - A(I)` make `X = I, τ = 1` feasible, and the solver minimizes τ.
//! Any iterate with small τ is a primal certificate. The dual multipliers of a
//! positive optimum give the Farkas ray `w` with `Σ w_i A_i ⪰ 0`, `b·w < 0`.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;
use serde_json::{json, Value};

use super::linalg::{min_eigenvalue, min_eigenvalue_blocks};
use super::NumError;

/// One coefficient of a constraint. For `row != col` the value multiplies
/// `X[row][col]` once, i.e. the symmetric coefficient matrix holds `value / 2`
/// in both positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SdpEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SdpConstraint {
    pub entries: Vec<SdpEntry>,
    pub rhs: f64,
}

/// `A_i • X = b_i`, `X ⪰ 0` block-diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub constraints: Vec<SdpConstraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SdpOptions {
    pub tol_feas: f64,
    pub tol_psd: f64,
    pub max_iter: usize,
    /// Largest accepted block side.
    pub max_block: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { tol_feas: 1e-8, tol_psd: 1e-8, max_iter: 200, max_block: 300 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Feasible,
    Infeasible,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct SdpResult {
    pub status: SdpStatus,
    /// Primal blocks (last iterate when inconclusive).
    pub x: Vec<DMatrix<f64>>,
    /// Max-norm constraint violation of `x`.
    pub residual: f64,
    pub min_eig: f64,
    /// Farkas ray, normalized to max-norm 1, when infeasible.
    pub ray: Option<Vec<f64>>,
    /// `-b·w` for the ray.
    pub ray_margin: Option<f64>,
    pub iterations: usize,
    pub reason: String,
    pub options: SdpOptions,
}

#[derive(Debug, Clone)]
pub struct SdpOptimum {
    pub converged: bool,
    pub x: Vec<DMatrix<f64>>,
    pub y: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residual: f64,
    pub iterations: usize,
}

fn matrix_json(m: &DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| json!((0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>())).collect())
}

impl SdpResult {
    pub fn to_json(&self) -> Value {
        json!({
            "status": self.status,
            "blocks": self.x.iter().map(matrix_json).collect::<Vec<_>>(),
            "residual": self.residual,
            "mineig": self.min_eig,
            "ray": self.ray,
            "ray_margin": self.ray_margin,
            "iterations": self.iterations,
            "reason": self.reason,
            "tolerances": { "tol_feas": self.options.tol_feas, "tol_psd": self.options.tol_psd },
        })
    }
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>) -> Self {
        SdpProblem { blocks, constraints: Vec::new() }
    }

    pub fn add_constraint(&mut self, entries: Vec<SdpEntry>, rhs: f64) -> usize {
        self.constraints.push(SdpConstraint { entries, rhs });
        self.constraints.len() - 1
    }

    pub fn validate(&self) -> Result<(), NumError> {
        for (i, c) in self.constraints.iter().enumerate() {
            for e in &c.entries {
                let ok = e.block < self.blocks.len() && e.row < self.blocks[e.block] && e.col < self.blocks[e.block];
                if !ok || !e.value.is_finite() {
                    return Err(NumError::BadEntry { constraint: i, block: e.block, row: e.row, col: e.col });
                }
            }
            if !c.rhs.is_finite() {
                return Err(NumError::NonFinite { constraint: i });
            }
        }
        Ok(())
    }

    /// `A_i • X` for a block matrix that need not be symmetric.
    pub fn apply(&self, i: usize, x: &[DMatrix<f64>]) -> f64 {
        self.constraints[i]
            .entries
            .iter()
            .map(|e| {
                if e.row == e.col {
                    e.value * x[e.block][(e.row, e.row)]
                } else {
                    0.5 * e.value * (x[e.block][(e.row, e.col)] + x[e.block][(e.col, e.row)])
                }
            })
            .sum()
    }

    /// Max-norm violation of the equality constraints.
    pub fn residual(&self, x: &[DMatrix<f64>]) -> f64 {
        (0..self.constraints.len()).map(|i| (self.apply(i, x) - self.constraints[i].rhs).abs()).fold(0.0, f64::max)
    }

    /// `Σ w_i A_i` as symmetric blocks.
    pub fn aggregate(&self, w: &[f64]) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (c, wi) in self.constraints.iter().zip(w) {
            for e in &c.entries {
                let m = &mut out[e.block];
                if e.row == e.col {
                    m[(e.row, e.row)] += wi * e.value;
                } else {
                    m[(e.row, e.col)] += 0.5 * wi * e.value;
                    m[(e.col, e.row)] += 0.5 * wi * e.value;
                }
            }
        }
        out
    }

    /// For a candidate ray returns `(λ_min(Σ w_i A_i), -b·w)`.
    pub fn ray_quality(&self, w: &[f64]) -> (f64, f64) {
        let agg = self.aggregate(w);
        let eig = min_eigenvalue_blocks(&agg).unwrap_or(f64::NEG_INFINITY);
        let margin = -self.constraints.iter().zip(w).map(|(c, wi)| c.rhs * wi).sum::<f64>();
        (eig, margin)
    }

    fn check_limits(&self, opts: &SdpOptions) -> Result<(), NumError> {
        if let Some(&side) = self.blocks.iter().find(|&&n| n > opts.max_block) {
            return Err(NumError::TooLarge { side, limit: opts.max_block });
        }
        self.validate()
    }
}

#[derive(Clone, Copy)]
struct Ent {
    b: usize,
    r: usize,
    c: usize,
    v: f64,
}

/// Scaled internal copy with full symmetric expansion.
struct Data {
    sizes: Vec<usize>,
    rows: Vec<Vec<Ent>>,
    b: DVector<f64>,
    c: Vec<DMatrix<f64>>,
}

type Blocks = Vec<DMatrix<f64>>;

fn expand(entries: &[SdpEntry], scale: f64) -> Vec<Ent> {
    let mut out = Vec::with_capacity(entries.len() * 2);
    for e in entries {
        let v = e.value / scale;
        if e.row == e.col {
            out.push(Ent { b: e.block, r: e.row, c: e.row, v });
        } else {
            out.push(Ent { b: e.block, r: e.row, c: e.col, v: v / 2.0 });
            out.push(Ent { b: e.block, r: e.col, c: e.row, v: v / 2.0 });
        }
    }
    out
}

fn row_norm(entries: &[SdpEntry]) -> f64 {
    entries.iter().map(|e| if e.row == e.col { e.value * e.value } else { e.value * e.value / 2.0 }).sum::<f64>().sqrt()
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn identity(sizes: &[usize]) -> Blocks {
    sizes.iter().map(|&n| DMatrix::identity(n, n)).collect()
}

fn inverse_spd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Some(m.clone());
    }
    Cholesky::new(m.clone()).map(|c| c.inverse())
}

/// Largest α with `x + α dx ⪰ 0` (possibly infinite).
fn max_step(x: &[DMatrix<f64>], dx: &[DMatrix<f64>]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(dx) {
        if xb.nrows() == 0 {
            continue;
        }
        let Some(ch) = Cholesky::new(xb.clone()) else {
            return 0.0;
        };
        let l = ch.l();
        let Some(linv) = l.clone().try_inverse() else {
            return 0.0;
        };
        let w = sym(&linv * db * linv.transpose());
        let lam = min_eigenvalue(&w).unwrap_or(f64::NEG_INFINITY);
        if lam < 0.0 {
            alpha = alpha.min(-1.0 / lam);
        }
    }
    alpha
}

impl Data {
    fn apply(&self, i: usize, g: &[DMatrix<f64>]) -> f64 {
        self.rows[i].iter().map(|e| e.v * g[e.b][(e.r, e.c)]).sum()
    }

    fn apply_all(&self, g: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(self.rows.len(), (0..self.rows.len()).map(|i| self.apply(i, g)))
    }

    fn adjoint(&self, y: &DVector<f64>) -> Blocks {
        let mut out: Blocks = self.sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (row, yi) in self.rows.iter().zip(y.iter()) {
            for e in row {
                out[e.b][(e.r, e.c)] += yi * e.v;
            }
        }
        out
    }

    /// `M_ij = tr(A_i X A_j Z⁻¹)`.
    fn schur(&self, x: &[DMatrix<f64>], zinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.rows.len();
        let mut out = DMatrix::zeros(m, m);
        for j in 0..m {
            // G_j = X A_j Z⁻¹ restricted to the touched blocks
            let mut g: Vec<Option<DMatrix<f64>>> = vec![None; self.sizes.len()];
            let mut t: Vec<Option<DMatrix<f64>>> = vec![None; self.sizes.len()];
            for e in &self.rows[j] {
                let n = self.sizes[e.b];
                let tb = t[e.b].get_or_insert_with(|| DMatrix::zeros(n, n));
                let col = x[e.b].column(e.r) * e.v;
                let mut dst = tb.column_mut(e.c);
                dst += col;
            }
            for (bi, tb) in t.into_iter().enumerate() {
                if let Some(tb) = tb {
                    g[bi] = Some(tb * &zinv[bi]);
                }
            }
            for i in 0..m {
                let mut s = 0.0;
                for e in &self.rows[i] {
                    if let Some(gb) = &g[e.b] {
                        s += e.v * gb[(e.c, e.r)];
                    }
                }
                out[(i, j)] = s;
            }
        }
        (&out + out.transpose()) * 0.5
    }
}

fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Some(ch.solve(rhs));
    }
    let scale = m.diagonal().amax().max(1e-300);
    for k in [1e-14, 1e-12, 1e-10] {
        let reg = m + DMatrix::identity(m.nrows(), m.nrows()) * (k * scale);
        if let Some(ch) = Cholesky::new(reg) {
            return Some(ch.solve(rhs));
        }
    }
    m.clone().lu().solve(rhs)
}

struct Iterate {
    x: Blocks,
    y: DVector<f64>,
    z: Blocks,
}

enum Outcome<T> {
    Stop(T),
    Stalled(&'static str),
}

fn add_scaled(a: &[DMatrix<f64>], b: &[DMatrix<f64>], s: f64) -> Blocks {
    a.iter().zip(b).map(|(p, q)| p + q * s).collect()
}

/// Runs predictor-corrector steps until `monitor` returns a value.
fn run_ipm<T>(
    data: &Data,
    it: &mut Iterate,
    max_iter: usize,
    iterations: &mut usize,
    monitor: &mut dyn FnMut(&Iterate) -> Option<T>,
) -> Outcome<T> {
    let ntot: usize = data.sizes.iter().sum::<usize>().max(1);
    for _ in 0..max_iter {
        if let Some(t) = monitor(it) {
            return Outcome::Stop(t);
        }
        *iterations += 1;
        let mu = inner(&it.x, &it.z) / ntot as f64;
        if !mu.is_finite() {
            return Outcome::Stalled("non-finite iterate");
        }
        let aty = data.adjoint(&it.y);
        let rd: Blocks = (0..data.sizes.len()).map(|k| &data.c[k] - &it.z[k] - &aty[k]).collect();
        let Some(zinv) = it.z.iter().map(inverse_spd).collect::<Option<Blocks>>() else {
            return Outcome::Stalled("dual iterate lost definiteness");
        };
        let m = data.schur(&it.x, &zinv);
        let xrz: Blocks = (0..data.sizes.len()).map(|k| &it.x[k] * &rd[k] * &zinv[k]).collect();
        let base = &data.b + data.apply_all(&xrz);

        let direction = |rhs: &DVector<f64>, sigma_mu: f64, corr: Option<&Blocks>| -> Option<(Blocks, DVector<f64>, Blocks)> {
            let dy = solve_spd(&m, rhs)?;
            let ady = data.adjoint(&dy);
            let dz: Blocks = (0..data.sizes.len()).map(|k| &rd[k] - &ady[k]).collect();
            let dx: Blocks = (0..data.sizes.len())
                .map(|k| {
                    let mut d = &zinv[k] * sigma_mu - &it.x[k] - &it.x[k] * &dz[k] * &zinv[k];
                    if let Some(c) = corr {
                        d -= &c[k];
                    }
                    sym(d)
                })
                .collect();
            Some((dx, dy, dz))
        };

        let Some((dxa, _, dza)) = direction(&base, 0.0, None) else {
            return Outcome::Stalled("Schur complement solve failed");
        };
        let ap = (0.95 * max_step(&it.x, &dxa)).min(1.0);
        let ad = (0.95 * max_step(&it.z, &dza)).min(1.0);
        let mu_aff = inner(&add_scaled(&it.x, &dxa, ap), &add_scaled(&it.z, &dza, ad)) / ntot as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let corr: Blocks = (0..data.sizes.len()).map(|k| &dxa[k] * &dza[k] * &zinv[k]).collect();
        let rhs = &base - data.apply_all(&zinv) * (sigma * mu) + data.apply_all(&corr);
        let Some((dx, dy, dz)) = direction(&rhs, sigma * mu, Some(&corr)) else {
            return Outcome::Stalled("Schur complement solve failed");
        };
        let ap = (0.95 * max_step(&it.x, &dx)).min(1.0);
        let ad = (0.95 * max_step(&it.z, &dz)).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            return Outcome::Stalled("step length collapsed");
        }
        it.x = add_scaled(&it.x, &dx, ap).into_iter().map(sym).collect();
        it.y += dy * ad;
        it.z = add_scaled(&it.z, &dz, ad).into_iter().map(sym).collect();
    }
    match monitor(it) {
        Some(t) => Outcome::Stop(t),
        None => Outcome::Stalled("iteration limit reached"),
    }
}

/// Decides whether `{X ⪰ 0 : A(X) = b}` is nonempty.
pub fn sdp_feasible(prob: &SdpProblem, opts: &SdpOptions) -> Result<SdpResult, NumError> {
    prob.check_limits(opts)?;
    let nb = prob.blocks.len();
    let zeros: Blocks = prob.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
    let finish = |status, x: Blocks, ray: Option<Vec<f64>>, iterations, reason: &str| {
        let residual = prob.residual(&x);
        let min_eig = min_eigenvalue_blocks(&x).unwrap_or(f64::NEG_INFINITY);
        let ray_margin = ray.as_ref().map(|w: &Vec<f64>| prob.ray_quality(w).1);
        SdpResult { status, x, residual, min_eig, ray, ray_margin, iterations, reason: reason.to_string(), options: *opts }
    };

    // structurally empty rows decide themselves
    let mut kept = Vec::new();
    for (i, c) in prob.constraints.iter().enumerate() {
        let norm = row_norm(&c.entries);
        if norm == 0.0 {
            if c.rhs.abs() > opts.tol_feas {
                let mut w = vec![0.0; prob.constraints.len()];
                w[i] = -c.rhs.signum();
                return Ok(finish(SdpStatus::Infeasible, zeros, Some(w), 0, "zero row with nonzero right-hand side"));
            }
        } else {
            kept.push((i, norm));
        }
    }
    let ident = identity(&prob.blocks);
    if kept.is_empty() {
        return Ok(finish(SdpStatus::Feasible, zeros, None, 0, "no constraints"));
    }

    let tau = nb;
    let mut sizes = prob.blocks.clone();
    sizes.push(1);
    let mut rows = Vec::with_capacity(kept.len());
    let mut b = DVector::zeros(kept.len());
    let mut r_orig = Vec::with_capacity(kept.len());
    for (k, &(i, norm)) in kept.iter().enumerate() {
        let c = &prob.constraints[i];
        let mut row = expand(&c.entries, norm);
        let r = c.rhs - prob.apply(i, &ident);
        r_orig.push(r);
        if r != 0.0 {
            row.push(Ent { b: tau, r: 0, c: 0, v: r / norm });
        }
        rows.push(row);
        b[k] = c.rhs / norm;
    }
    if r_orig.iter().all(|r| r.abs() <= opts.tol_feas / 10.0) {
        return Ok(finish(SdpStatus::Feasible, ident, None, 0, "identity satisfies the constraints"));
    }
    let mut c: Blocks = sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect();
    c[tau][(0, 0)] = 1.0;
    let data = Data { sizes: sizes.clone(), rows, b, c };
    let mut it = Iterate { x: identity(&sizes), y: DVector::zeros(kept.len()), z: identity(&sizes) };
    let rmax = r_orig.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let mut iterations = 0;

    enum Verdict {
        Feasible(Blocks),
        Infeasible(Vec<f64>),
    }
    let mut monitor = |it: &Iterate| -> Option<Verdict> {
        let t = it.x[tau][(0, 0)];
        if t * rmax <= opts.tol_feas / 10.0 {
            let x: Blocks = it.x[..nb].to_vec();
            if prob.residual(&x) <= opts.tol_feas / 10.0 && min_eigenvalue_blocks(&x).unwrap_or(-1.0) >= -opts.tol_psd {
                return Some(Verdict::Feasible(x));
            }
        }
        let mut w = vec![0.0; prob.constraints.len()];
        for (k, &(i, norm)) in kept.iter().enumerate() {
            w[i] = -it.y[k] / norm;
        }
        let wmax = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if wmax > 0.0 && wmax.is_finite() {
            w.iter_mut().for_each(|v| *v /= wmax);
            let (eig, margin) = prob.ray_quality(&w);
            // a slightly indefinite aggregate can fake a small margin against
            // boundary-feasible X, so the margin must dominate the defect
            if eig >= -opts.tol_psd && margin > opts.tol_feas && -eig.min(0.0) * 1e4 < margin {
                return Some(Verdict::Infeasible(w));
            }
        }
        None
    };
    Ok(match run_ipm(&data, &mut it, opts.max_iter, &mut iterations, &mut monitor) {
        Outcome::Stop(Verdict::Feasible(x)) => finish(SdpStatus::Feasible, x, None, iterations, "primal certificate"),
        Outcome::Stop(Verdict::Infeasible(w)) => {
            finish(SdpStatus::Infeasible, it.x[..nb].to_vec(), Some(w), iterations, "dual ray")
        }
        Outcome::Stalled(why) => finish(SdpStatus::Inconclusive, it.x[..nb].to_vec(), None, iterations, why),
    })
}

/// Minimizes `C • X` over `{X ⪰ 0 : A(X) = b}` from an infeasible start.
/// `converged` is false when the residuals or the duality gap stay above the tolerances.
pub fn sdp_minimize(prob: &SdpProblem, objective: &[DMatrix<f64>], opts: &SdpOptions) -> Result<SdpOptimum, NumError> {
    prob.check_limits(opts)?;
    if objective.len() != prob.blocks.len() {
        return Err(NumError::BlockMismatch { expected: prob.blocks.len(), got: objective.len() });
    }
    let norms: Vec<f64> = prob.constraints.iter().map(|c| row_norm(&c.entries).max(1e-300)).collect();
    let rows = prob.constraints.iter().zip(&norms).map(|(c, &n)| expand(&c.entries, n)).collect();
    let b = DVector::from_iterator(norms.len(), prob.constraints.iter().zip(&norms).map(|(c, n)| c.rhs / n));
    let data = Data { sizes: prob.blocks.clone(), rows, b, c: objective.iter().map(|m| sym(m.clone())).collect() };
    let mut it = Iterate { x: identity(&prob.blocks), y: DVector::zeros(norms.len()), z: identity(&prob.blocks) };
    let mut iterations = 0;
    let cscale = 1.0 + objective.iter().map(|m| m.amax()).fold(0.0, f64::max);
    let mut monitor = |it: &Iterate| -> Option<()> {
        let pres = (&data.b - data.apply_all(&it.x)).amax();
        let aty = data.adjoint(&it.y);
        let dres = (0..data.sizes.len()).map(|k| (&data.c[k] - &it.z[k] - &aty[k]).amax()).fold(0.0, f64::max);
        let p = inner(&data.c, &it.x);
        let d = data.b.dot(&it.y);
        let gap = (p - d).abs() / (1.0 + p.abs() + d.abs());
        (pres <= opts.tol_feas && dres <= opts.tol_feas * cscale && gap <= opts.tol_feas).then_some(())
    };
    let converged = matches!(run_ipm(&data, &mut it, opts.max_iter, &mut iterations, &mut monitor), Outcome::Stop(()));
    let y: Vec<f64> = it.y.iter().zip(&norms).map(|(v, n)| v / n).collect();
    let primal_objective = inner(objective, &it.x);
    let dual_objective = prob.constraints.iter().zip(&y).map(|(c, v)| c.rhs * v).sum();
    Ok(SdpOptimum { converged, residual: prob.residual(&it.x), x: it.x, y, primal_objective, dual_objective, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ent(block: usize, row: usize, col: usize, value: f64) -> SdpEntry {
        SdpEntry { block, row, col, value }
    }

    fn fix_2x2(target: [[f64; 2]; 2]) -> SdpProblem {
        let mut p = SdpProblem::new(vec![2]);
        p.add_constraint(vec![ent(0, 0, 0, 1.0)], target[0][0]);
        p.add_constraint(vec![ent(0, 0, 1, 1.0)], target[0][1]);
        p.add_constraint(vec![ent(0, 1, 1, 1.0)], target[1][1]);
        p
    }

    #[test]
    fn rank_one_block_is_feasible() {
        let p = fix_2x2([[1.0, 1.0], [1.0, 1.0]]);
        let r = sdp_feasible(&p, &SdpOptions::default()).unwrap();
        assert_eq!(r.status, SdpStatus::Feasible, "{}", r.reason);
        assert!(r.residual <= 1e-8);
        assert!(r.min_eig.abs() <= 1e-6 && r.min_eig >= -1e-8);
    }

    #[test]
    fn negative_diagonal_is_infeasible() {
        let mut p = SdpProblem::new(vec![2]);
        p.add_constraint(vec![ent(0, 0, 0, 1.0)], -1.0);
        let r = sdp_feasible(&p, &SdpOptions::default()).unwrap();
        assert_eq!(r.status, SdpStatus::Infeasible);
        let w = r.ray.unwrap();
        let (eig, margin) = p.ray_quality(&w);
        assert!(eig >= -1e-8 && margin > 1e-8);
    }

    #[test]
    fn indefinite_target_is_infeasible() {
        let p = fix_2x2([[1.0, 2.0], [2.0, 1.0]]);
        let r = sdp_feasible(&p, &SdpOptions::default()).unwrap();
        assert_eq!(r.status, SdpStatus::Infeasible, "{}", r.reason);
    }

    #[test]
    fn zero_row_cases() {
        let mut p = SdpProblem::new(vec![1]);
        p.add_constraint(vec![], 0.0);
        assert_eq!(sdp_feasible(&p, &SdpOptions::default()).unwrap().status, SdpStatus::Feasible);
        p.add_constraint(vec![], 2.0);
        let r = sdp_feasible(&p, &SdpOptions::default()).unwrap();
        assert_eq!(r.status, SdpStatus::Infeasible);
        assert!(r.ray_margin.unwrap() > 0.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        let mut p = SdpProblem::new(vec![2]);
        p.add_constraint(vec![ent(0, 2, 0, 1.0)], 0.0);
        assert!(sdp_feasible(&p, &SdpOptions::default()).is_err());
        let big = SdpProblem::new(vec![400]);
        assert!(matches!(sdp_feasible(&big, &SdpOptions::default()), Err(NumError::TooLarge { .. })));
    }

    #[test]
    fn minimize_trace_with_fixed_offdiagonal() {
        // min X00 + X11 s.t. X01 = 1  → optimum 2 at [[1,1],[1,1]]
        let mut p = SdpProblem::new(vec![2]);
        p.add_constraint(vec![ent(0, 0, 1, 1.0)], 1.0);
        let c = vec![DMatrix::identity(2, 2)];
        let o = sdp_minimize(&p, &c, &SdpOptions::default()).unwrap();
        assert!(o.converged);
        assert!((o.primal_objective - 2.0).abs() < 1e-6);
        assert!((o.dual_objective - 2.0).abs() < 1e-6);
    }

    #[test]
    fn json_echoes_tolerances() {
        let p = fix_2x2([[2.0, 0.0], [0.0, 3.0]]);
        let r = sdp_feasible(&p, &SdpOptions::default()).unwrap();
        let j = r.to_json();
        assert_eq!(j["status"], "feasible");
        assert_eq!(j["tolerances"]["tol_psd"], 1e-8);
        assert_eq!(j["blocks"][0].as_array().unwrap().len(), 2);
    }
}
