//! Sparse multivariate polynomials over named variables.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`], whose ordering is the
//! graded lexicographic order used everywhere a monomial basis is indexed.
//! No zero coefficient is ever stored.

mod json;
mod parse;

pub use json::{PolynomialJson, TermJson};
pub use parse::parse_polynomial;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable sets differ: {left:?} vs {right:?}")]
    VariableMismatch { left: Vec<String>, right: Vec<String> },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("exponent vector has length {got}, expected {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("assignment does not cover variable `{0}`")]
    MissingValue(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid coefficient: {0}")]
    BadCoefficient(String),
}

/// Exponent vector, one entry per ambient variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }

    pub fn eval<S: Scalar>(&self, point: &[S]) -> S {
        let mut acc = S::one();
        for (x, &e) in point.iter().zip(&self.0) {
            for _ in 0..e {
                acc = acc * x.clone();
            }
        }
        acc
    }

    fn without(&self, index: usize) -> Monomial {
        let mut e = self.0.clone();
        e.remove(index);
        Monomial(e)
    }
}

impl Ord for Monomial {
    /// Graded order: total degree first, then earlier variables with larger
    /// exponents come first (`1 < x < y < x^2 < xy < y^2` for vars `[x, y]`).
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials in `nvars` variables of total degree `<= maxdeg`, in graded order.
pub fn monomial_basis(nvars: usize, maxdeg: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for deg in 0..=maxdeg {
        let mut cur = vec![0u32; nvars];
        push_degree(&mut out, &mut cur, 0, deg);
    }
    out
}

fn push_degree(out: &mut Vec<Monomial>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if pos + 1 >= cur.len() {
        if cur.is_empty() {
            if left == 0 {
                out.push(Monomial(Vec::new()));
            }
            return;
        }
        cur[pos] = left;
        out.push(Monomial(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for e in (0..=left).rev() {
        cur[pos] = e;
        push_degree(out, cur, pos + 1, left - e);
    }
    cur[pos] = 0;
}

/// Number of monomials of degree `<= maxdeg` in `nvars` variables: `C(nvars+maxdeg, maxdeg)`.
pub fn monomial_count(nvars: usize, maxdeg: u32) -> usize {
    let (n, d) = (nvars as u128, maxdeg as u128);
    let mut c: u128 = 1;
    for i in 1..=d {
        c = c * (n + i) / i;
    }
    c as usize
}

pub type VarList = Arc<[String]>;

pub fn var_list<I, T>(names: I) -> VarList
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    names.into_iter().map(Into::into).collect::<Vec<_>>().into()
}

/// `x1, ..., xn`.
pub fn indexed_vars(prefix: &str, n: usize) -> VarList {
    var_list((1..=n).map(|i| format!("{prefix}{i}")))
}

#[derive(Clone, PartialEq)]
pub struct Polynomial<S: Scalar> {
    vars: VarList,
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn zero(vars: VarList) -> Self {
        Polynomial { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: VarList, c: S) -> Self {
        let mut p = Self::zero(vars);
        let m = Monomial::one(p.nvars());
        p.add_term(m, c);
        p
    }

    pub fn one(vars: VarList) -> Self {
        Self::constant(vars, S::one())
    }

    pub fn var(vars: VarList, name: &str) -> Result<Self, PolyError> {
        let idx = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        Ok(Self::var_index(vars, idx))
    }

    pub fn var_index(vars: VarList, index: usize) -> Self {
        let n = vars.len();
        let mut p = Self::zero(vars);
        p.terms.insert(Monomial::var(n, index), S::one());
        p
    }

    pub fn monomial(vars: VarList, m: Monomial, c: S) -> Result<Self, PolyError> {
        if m.nvars() != vars.len() {
            return Err(PolyError::ArityMismatch { expected: vars.len(), got: m.nvars() });
        }
        let mut p = Self::zero(vars);
        p.add_term(m, c);
        Ok(p)
    }

    pub fn from_terms<I>(vars: VarList, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, S)>,
    {
        let mut p = Self::zero(vars);
        for (exps, c) in terms {
            if exps.len() != p.nvars() {
                return Err(PolyError::ArityMismatch { expected: p.nvars(), got: exps.len() });
            }
            p.add_term(Monomial(exps), c);
        }
        Ok(p)
    }

    pub fn vars(&self) -> &VarList {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree of the zero polynomial is reported as 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_term(&self) -> S {
        self.coeff(&Monomial::one(self.nvars()))
    }

    /// Adds `c * m` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn check_vars(&self, other: &Self) -> Result<(), PolyError> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(PolyError::VariableMismatch {
                left: self.vars.to_vec(),
                right: other.vars.to_vec(),
            })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        let mut out = Self::zero(self.vars.clone());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.vars.clone());
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v.clone() * c.clone())).collect(),
        }
    }

    pub fn add_constant(&self, c: &S) -> Self {
        let mut out = self.clone();
        out.add_term(Monomial::one(self.nvars()), c.clone());
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one(self.vars.clone());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Polynomial<T> {
        let mut out = Polynomial::zero(self.vars.clone());
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Converts coefficients through the exact rational value.
    pub fn convert<T: Scalar>(&self) -> Polynomial<T> {
        self.map_coeffs(|c| {
            let q = c.to_rational().expect("finite coefficient");
            T::from_rational(&q)
        })
    }

    pub fn to_f64(&self) -> Polynomial<f64> {
        self.map_coeffs(|c| c.to_f64_lossy())
    }

    pub fn eval(&self, point: &[S]) -> Result<S, PolyError> {
        if point.len() != self.nvars() {
            return Err(PolyError::ArityMismatch { expected: self.nvars(), got: point.len() });
        }
        Ok(self
            .terms
            .iter()
            .fold(S::zero(), |acc, (m, c)| acc + c.clone() * m.eval(point)))
    }

    pub fn eval_assignment(&self, values: &VariableAssignment<S>) -> Result<S, PolyError> {
        let point = self
            .vars
            .iter()
            .map(|v| values.get(v).cloned().ok_or_else(|| PolyError::MissingValue(v.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        self.eval(&point)
    }

    /// Substitutes `var := value` and drops `var` from the variable list.
    pub fn substitute(&self, var: &str, value: &S) -> Result<Self, PolyError> {
        let idx = self
            .vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| PolyError::UnknownVariable(var.to_string()))?;
        let vars: VarList = self
            .vars
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, v)| v.clone())
            .collect::<Vec<_>>()
            .into();
        let mut out = Self::zero(vars);
        for (m, c) in &self.terms {
            let mut factor = S::one();
            for _ in 0..m.exps()[idx] {
                factor = factor * value.clone();
            }
            out.add_term(m.without(idx), c.clone() * factor);
        }
        Ok(out)
    }

    /// Re-expresses the polynomial over a superset of its variables.
    pub fn embed(&self, vars: VarList) -> Result<Self, PolyError> {
        let map = self
            .vars
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|w| w == v)
                    .ok_or_else(|| PolyError::UnknownVariable(v.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let n = vars.len();
        let mut out = Self::zero(vars);
        for (m, c) in &self.terms {
            let mut e = vec![0; n];
            for (i, &j) in map.iter().enumerate() {
                e[j] = m.exps()[i];
            }
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// Max absolute coefficient.
    pub fn max_abs_coeff(&self) -> S {
        self.terms
            .values()
            .map(|c| c.abs())
            .fold(S::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn l1_norm(&self) -> S {
        self.terms.values().fold(S::zero(), |a, c| a + c.abs())
    }

    /// Leading term in graded order.
    pub fn leading(&self) -> Option<(&Monomial, &S)> {
        self.terms.iter().next_back()
    }
}

/// `(1 + x1^2 + ... + xn^2)^e`, the standard strictly positive perturbation.
pub fn perturber<S: Scalar>(vars: VarList, e: u32) -> Polynomial<S> {
    let n = vars.len();
    let mut g = Polynomial::one(vars.clone());
    for i in 0..n {
        let mut sq = vec![0; n];
        sq[i] = 2;
        g.add_term(Monomial(sq), S::one());
    }
    g.pow(e)
}

pub type VariableAssignment<S> = BTreeMap<String, S>;

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<'a, S: Scalar> std::ops::$tr<&'a Polynomial<S>> for &'a Polynomial<S> {
            type Output = Polynomial<S>;

            /// Panics on a variable-set mismatch; use the `checked_*` form to recover.
            fn $method(self, rhs: &'a Polynomial<S>) -> Polynomial<S> {
                self.$checked(rhs).expect("polynomial variable sets must agree")
            }
        }

        impl<S: Scalar> std::ops::$tr for Polynomial<S> {
            type Output = Polynomial<S>;

            fn $method(self, rhs: Polynomial<S>) -> Polynomial<S> {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl<S: Scalar> std::ops::Neg for &Polynomial<S> {
    type Output = Polynomial<S>;

    fn neg(self) -> Polynomial<S> {
        self.scale(&(-S::one()))
    }
}

impl<S: Scalar> std::ops::Neg for Polynomial<S> {
    type Output = Polynomial<S>;

    fn neg(self) -> Polynomial<S> {
        -&self
    }
}

impl<S: Scalar> fmt::Display for Polynomial<S> {
    /// Highest graded term first, e.g. `x1^2*x2 - 3/4*x1 + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let negative = *c < S::zero();
            let mag = c.abs();
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            first = false;
            let mono: Vec<String> = m
                .exps()
                .iter()
                .zip(self.vars.iter())
                .filter(|(e, _)| **e > 0)
                .map(|(e, v)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
                .collect();
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{mag}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Debug for Polynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{}]({})", self.vars.join(","), self)
    }
}

/// Exact rational constant helper.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

impl Polynomial<BigRational> {
    /// Divides by the absolute value of the leading coefficient (positive scaling).
    pub fn normalize_positive(&self) -> Self {
        match self.leading() {
            Some((_, c)) => {
                let s = c.abs().recip();
                self.scale(&s)
            }
            None => self.clone(),
        }
    }

    pub fn is_positive_constant(&self) -> bool {
        self.is_constant() && self.constant_term() > BigRational::zero()
    }
}

#[cfg(test)]
mod tests;
