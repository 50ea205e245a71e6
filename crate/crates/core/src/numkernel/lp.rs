//! Dense two-phase simplex with Bland's rule, generic over [`Scalar`].
//!
//! With `BigRational` every verdict is exact. Infeasible systems come back with
//! a Farkas witness `y` (see [`LpProblem::verify_farkas`]); unbounded objectives
//! come back with an improving ray.

use serde::Serialize;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LpRow<S> {
    pub coeffs: Vec<S>,
    pub relation: Relation,
    pub rhs: S,
}

/// `min objective·x` subject to the rows, with `x_j >= 0` unless `free[j]`.
#[derive(Debug, Clone)]
pub struct LpProblem<S> {
    pub num_vars: usize,
    pub free: Vec<bool>,
    pub rows: Vec<LpRow<S>>,
    pub objective: Option<Vec<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution<S> {
    /// Feasible point; optimal for the objective when one was set.
    Feasible { x: Vec<S>, value: Option<S> },
    /// Multipliers `y` (one per row) proving the rows have no solution.
    Infeasible { farkas: Vec<S> },
    /// Feasible point plus a ray along which the objective decreases without bound.
    Unbounded { x: Vec<S>, ray: Vec<S> },
}

impl<S> LpSolution<S> {
    pub fn point(&self) -> Option<&[S]> {
        match self {
            LpSolution::Feasible { x, .. } | LpSolution::Unbounded { x, .. } => Some(x),
            LpSolution::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpSolution::Infeasible { .. })
    }
}

impl<S: Scalar> LpProblem<S> {
    pub fn new(num_vars: usize) -> Self {
        LpProblem { num_vars, free: vec![false; num_vars], rows: Vec::new(), objective: None }
    }

    pub fn with_free_vars(num_vars: usize) -> Self {
        LpProblem { num_vars, free: vec![true; num_vars], rows: Vec::new(), objective: None }
    }

    pub fn add_row(&mut self, coeffs: Vec<S>, relation: Relation, rhs: S) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars, "row width must match variable count");
        self.rows.push(LpRow { coeffs, relation, rhs });
        self
    }

    pub fn set_objective(&mut self, c: Vec<S>) -> &mut Self {
        assert_eq!(c.len(), self.num_vars);
        self.objective = Some(c);
        self
    }

    /// Max row violation of `x` (including sign constraints).
    pub fn violation(&self, x: &[S]) -> S {
        let mut worst = S::zero();
        let mut bump = |v: S| {
            if v > worst {
                worst = v;
            }
        };
        for row in &self.rows {
            let lhs = dot(&row.coeffs, x);
            let d = lhs - row.rhs.clone();
            match row.relation {
                Relation::Le => bump(d),
                Relation::Ge => bump(-d),
                Relation::Eq => bump(d.abs()),
            }
        }
        for (j, xj) in x.iter().enumerate() {
            if !self.free[j] {
                bump(-xj.clone());
            }
        }
        worst
    }

    /// Checks a Farkas witness: `y_i <= 0` on `Le` rows, `y_i >= 0` on `Ge` rows,
    /// `c = Σ y_i a_i` has `c_j <= 0` on sign-constrained and `c_j = 0` on free
    /// variables, and `Σ y_i b_i > 0`. Returns the margin `Σ y_i b_i` when valid.
    pub fn verify_farkas(&self, y: &[S]) -> Option<S> {
        if y.len() != self.rows.len() {
            return None;
        }
        let tol = S::tolerance();
        for (row, yi) in self.rows.iter().zip(y) {
            match row.relation {
                Relation::Le if *yi > tol => return None,
                Relation::Ge if *yi < -tol.clone() => return None,
                _ => {}
            }
        }
        let scale = y.iter().fold(S::one(), |a, v| if v.abs() > a { v.abs() } else { a });
        for j in 0..self.num_vars {
            let cj = self.rows.iter().zip(y).fold(S::zero(), |a, (r, yi)| a + r.coeffs[j].clone() * yi.clone());
            let bound = tol.clone() * scale.clone();
            if self.free[j] {
                if cj.abs() > bound {
                    return None;
                }
            } else if cj > bound {
                return None;
            }
        }
        let margin = self.rows.iter().zip(y).fold(S::zero(), |a, (r, yi)| a + r.rhs.clone() * yi.clone());
        if margin > tol * scale {
            Some(margin)
        } else {
            None
        }
    }

    pub fn solve(&self) -> LpSolution<S> {
        Tableau::build(self).run(self)
    }
}

/// Solves the rows without an objective.
pub fn lp_feasible<S: Scalar>(prob: &LpProblem<S>) -> LpSolution<S> {
    let mut p = prob.clone();
    p.objective = None;
    p.solve()
}

/// Looks for `d` with `a·d > 0` for every `a` in `strict` and `e·d = 0` for every
/// `e` in `equal`. On failure returns Gordan multipliers `λ >= 0`, `Σλ > 0`, with
/// `Σ λ_i a_i` in the span of `equal`.
pub fn strict_positive_direction<S: Scalar>(strict: &[Vec<S>], equal: &[Vec<S>], dim: usize) -> Result<Vec<S>, Vec<S>> {
    let mut lp = LpProblem::with_free_vars(dim);
    for a in strict {
        lp.add_row(a.clone(), Relation::Ge, S::one());
    }
    for e in equal {
        lp.add_row(e.clone(), Relation::Eq, S::zero());
    }
    match lp.solve() {
        LpSolution::Feasible { x, .. } | LpSolution::Unbounded { x, .. } => Ok(x),
        LpSolution::Infeasible { farkas } => Err(farkas[..strict.len()].to_vec()),
    }
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

enum ColKind {
    /// original variable j with sign (+1 / -1 for the negative part of a free var)
    Var(usize, bool),
    Slack,
    Artificial(usize),
}

struct Tableau<S> {
    /// m rows of width ncols + 1 (last = rhs)
    t: Vec<Vec<S>>,
    basis: Vec<usize>,
    cols: Vec<ColKind>,
    row_sign: Vec<bool>,
    ncols: usize,
}

impl<S: Scalar> Tableau<S> {
    fn build(p: &LpProblem<S>) -> Self {
        let m = p.rows.len();
        let mut cols = Vec::new();
        for j in 0..p.num_vars {
            cols.push(ColKind::Var(j, true));
            if p.free[j] {
                cols.push(ColKind::Var(j, false));
            }
        }
        let mut slack_of_row = vec![None; m];
        for (i, r) in p.rows.iter().enumerate() {
            if r.relation != Relation::Eq {
                slack_of_row[i] = Some(cols.len());
                cols.push(ColKind::Slack);
            }
        }
        let art0 = cols.len();
        for i in 0..m {
            cols.push(ColKind::Artificial(i));
        }
        let ncols = cols.len();
        let mut t = vec![vec![S::zero(); ncols + 1]; m];
        let mut row_sign = vec![false; m];
        for (i, r) in p.rows.iter().enumerate() {
            let mut c = 0;
            for j in 0..p.num_vars {
                t[i][c] = r.coeffs[j].clone();
                c += 1;
                if p.free[j] {
                    t[i][c] = -r.coeffs[j].clone();
                    c += 1;
                }
            }
            if let Some(s) = slack_of_row[i] {
                t[i][s] = match r.relation {
                    Relation::Le => S::one(),
                    _ => -S::one(),
                };
            }
            t[i][ncols] = r.rhs.clone();
            if r.rhs < S::zero() {
                row_sign[i] = true;
                for v in t[i].iter_mut() {
                    *v = -v.clone();
                }
            }
            t[i][art0 + i] = S::one();
        }
        Tableau { t, basis: (art0..art0 + m).collect(), cols, row_sign, ncols }
    }

    fn is_artificial(&self, j: usize) -> bool {
        matches!(self.cols[j], ColKind::Artificial(_))
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let pv = self.t[r][c].clone();
        for v in self.t[r].iter_mut() {
            *v = v.clone() / pv.clone();
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pvv) in row.iter_mut().zip(&prow) {
                *v = v.clone() - f.clone() * pvv.clone();
            }
            if S::EXACT {
                continue;
            }
            row[c] = S::zero();
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost` over columns allowed by `allowed`. Returns `Err(col)` when
    /// column `col` is an unbounded improving direction.
    fn optimize(&mut self, cost: &[S], allowed: &dyn Fn(usize) -> bool) -> Result<(), usize> {
        let tol = S::tolerance() * S::from_f64(1e3).unwrap_or_else(S::one);
        let max_iter = 50_000;
        for _ in 0..max_iter {
            let reduced = self.reduced_costs(cost);
            let entering = (0..self.ncols).find(|&j| allowed(j) && reduced[j] < -tol.clone());
            let Some(c) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, S)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if row[c] > tol {
                    let ratio = row[self.ncols].clone() / row[c].clone();
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(c),
            }
        }
        Ok(())
    }

    fn reduced_costs(&self, cost: &[S]) -> Vec<S> {
        let mut r: Vec<S> = cost.to_vec();
        for (i, row) in self.t.iter().enumerate() {
            let cb = cost[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..self.ncols {
                r[j] = r[j].clone() - cb.clone() * row[j].clone();
            }
        }
        r
    }

    fn extract(&self, p: &LpProblem<S>, col_values: &[S]) -> Vec<S> {
        let mut x = vec![S::zero(); p.num_vars];
        for (j, kind) in self.cols.iter().enumerate() {
            if let ColKind::Var(v, pos) = kind {
                if *pos {
                    x[*v] = x[*v].clone() + col_values[j].clone();
                } else {
                    x[*v] = x[*v].clone() - col_values[j].clone();
                }
            }
        }
        x
    }

    fn basic_values(&self) -> Vec<S> {
        let mut vals = vec![S::zero(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            vals[b] = self.t[i][self.ncols].clone();
        }
        vals
    }

    fn run(mut self, p: &LpProblem<S>) -> LpSolution<S> {
        let m = self.t.len();
        let phase1: Vec<S> = (0..self.ncols)
            .map(|j| if self.is_artificial(j) { S::one() } else { S::zero() })
            .collect();
        let _ = self.optimize(&phase1, &|_| true);
        let infeas: S = self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| self.is_artificial(b))
            .fold(S::zero(), |a, (i, _)| a + self.t[i][self.ncols].clone());
        let feas_tol = S::tolerance() * S::from_f64(1e4).unwrap_or_else(S::one);
        if infeas > feas_tol {
            let reduced = self.reduced_costs(&phase1);
            let mut y = vec![S::zero(); m];
            for (j, kind) in self.cols.iter().enumerate() {
                if let ColKind::Artificial(i) = kind {
                    let yi = S::one() - reduced[j].clone();
                    y[*i] = if self.row_sign[*i] { -yi } else { yi };
                }
            }
            return LpSolution::Infeasible { farkas: y };
        }
        // drive zero-level artificials out of the basis where possible
        for i in 0..m {
            if self.is_artificial(self.basis[i]) {
                if let Some(c) = (0..self.ncols).find(|&j| !self.is_artificial(j) && !self.t[i][j].is_negligible()) {
                    self.pivot(i, c);
                }
            }
        }
        let Some(obj) = &p.objective else {
            let x = self.extract(p, &self.basic_values());
            return LpSolution::Feasible { x, value: None };
        };
        let mut cost = vec![S::zero(); self.ncols];
        for (j, kind) in self.cols.iter().enumerate() {
            if let ColKind::Var(v, pos) = kind {
                cost[j] = if *pos { obj[*v].clone() } else { -obj[*v].clone() };
            }
        }
        let not_art: Vec<bool> = (0..self.ncols).map(|j| !self.is_artificial(j)).collect();
        match self.optimize(&cost, &|j| not_art[j]) {
            Ok(()) => {
                let x = self.extract(p, &self.basic_values());
                let value = dot(obj, &x);
                LpSolution::Feasible { x, value: Some(value) }
            }
            Err(c) => {
                let x = self.extract(p, &self.basic_values());
                let mut dir = vec![S::zero(); self.ncols];
                dir[c] = S::one();
                for (i, &b) in self.basis.iter().enumerate() {
                    dir[b] = -self.t[i][c].clone();
                }
                let ray = self.extract(p, &dir);
                LpSolution::Unbounded { x, ray }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn single_variable_feasible() {
        let mut lp = LpProblem::<Q>::new(1);
        lp.add_row(vec![q(1)], Relation::Eq, q(1));
        match lp_feasible(&lp) {
            LpSolution::Feasible { x, .. } => assert_eq!(x, vec![q(1)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_variable_infeasible_with_farkas() {
        let mut lp = LpProblem::<Q>::new(1);
        lp.add_row(vec![q(1)], Relation::Eq, q(-1));
        match lp_feasible(&lp) {
            LpSolution::Infeasible { farkas } => {
                assert!(lp.verify_farkas(&farkas).is_some(), "witness {farkas:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn strict_positivity_in_the_plane() {
        // p~ = {x, y}: some d has both strictly positive
        let d = strict_positive_direction(&[vec![q(1), q(0)], vec![q(0), q(1)]], &[], 2).unwrap();
        assert!(d[0] > Q::zero() && d[1] > Q::zero());
        // {x, -x} are positively dependent
        let lam = strict_positive_direction(&[vec![q(1)], vec![q(-1)]], &[], 1).unwrap_err();
        assert!(lam.iter().all(|l| *l >= Q::zero()));
        assert!(lam.iter().any(|l| *l > Q::zero()));
        assert_eq!(lam[0].clone() - lam[1].clone(), Q::zero());
    }

    #[test]
    fn optimum_and_unbounded() {
        // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6
        let mut lp = LpProblem::<Q>::new(2);
        lp.add_row(vec![q(1), q(2)], Relation::Le, q(4));
        lp.add_row(vec![q(3), q(1)], Relation::Le, q(6));
        lp.set_objective(vec![q(-1), q(-1)]);
        match lp.solve() {
            LpSolution::Feasible { x, value } => {
                assert_eq!(x, vec![Q::new(8.into(), 5.into()), Q::new(6.into(), 5.into())]);
                assert_eq!(value, Some(Q::new((-14).into(), 5.into())));
            }
            other => panic!("{other:?}"),
        }
        let mut lp = LpProblem::<Q>::with_free_vars(1);
        lp.add_row(vec![q(1)], Relation::Ge, q(0));
        lp.set_objective(vec![q(1)]);
        assert!(matches!(lp.solve(), LpSolution::Feasible { .. }));
        lp.set_objective(vec![q(-1)]);
        match lp.solve() {
            LpSolution::Unbounded { ray, .. } => assert!(ray[0] > Q::zero()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn float_mode_agrees() {
        let mut lp = LpProblem::<f64>::new(2);
        lp.add_row(vec![1.0, 1.0], Relation::Ge, 2.0);
        lp.add_row(vec![1.0, -1.0], Relation::Eq, 0.0);
        lp.set_objective(vec![1.0, 2.0]);
        match lp.solve() {
            LpSolution::Feasible { x, value } => {
                assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
                assert!((value.unwrap() - 3.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert!(lp.violation(&[1.0, 1.0]) < 1e-12);
        assert!(Q::one() > Q::zero());
    }
}
