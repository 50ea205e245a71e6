//! Double description between `{x : a_i·x >= 0}` and `span(L) + cone(R)`,
//! plus the small amount of generic Gaussian elimination the cones need.

use crate::scalar::Scalar;

use super::ConeError;

pub const MAX_DIM: usize = 12;
pub const MAX_INPUT: usize = 200;
const MAX_INTERMEDIATE: usize = 20_000;

/// `span(lineality) + cone(rays)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VForm<S> {
    pub lineality: Vec<Vec<S>>,
    pub rays: Vec<Vec<S>>,
}

/// `{x : e·x = 0 for e in equalities, a·x >= 0 for a in inequalities}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HForm<S> {
    pub equalities: Vec<Vec<S>>,
    pub inequalities: Vec<Vec<S>>,
}

impl<S: Scalar> HForm<S> {
    pub fn contains(&self, v: &[S]) -> bool {
        self.equalities.iter().all(|e| dot(e, v).is_negligible())
            && self.inequalities.iter().all(|a| !dot(a, v).is_strictly_negative())
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn axpy<S: Scalar>(a: &[S], s: &S, b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + s.clone() * y.clone()).collect()
}

pub fn scaled<S: Scalar>(a: &[S], s: &S) -> Vec<S> {
    a.iter().map(|x| x.clone() * s.clone()).collect()
}

/// Positive rescaling to max-abs coordinate 1; canonical up to positive scaling.
pub fn normalize<S: Scalar>(v: &[S]) -> Option<Vec<S>> {
    let m = v.iter().fold(S::zero(), |acc, x| if x.abs() > acc { x.abs() } else { acc });
    if m.is_negligible() {
        return None;
    }
    Some(v.iter().map(|x| x.clone() / m.clone()).collect())
}

fn same_vec<S: Scalar>(a: &[S], b: &[S]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x.clone() - y.clone()).is_negligible())
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<S: Scalar>(m: &mut [Vec<S>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let best = (r..rows).fold(None::<usize>, |acc, i| match acc {
            Some(j) if m[j][c].abs() >= m[i][c].abs() => Some(j),
            _ => Some(i),
        });
        let Some(p) = best.filter(|&p| !m[p][c].is_negligible()) else {
            continue;
        };
        m.swap(r, p);
        let pv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = x.clone() / pv.clone();
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x = x.clone() - f.clone() * p.clone();
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<S: Scalar>(vectors: &[Vec<S>]) -> usize {
    let mut m = vectors.to_vec();
    rref(&mut m).len()
}

/// Basis of `{x : row·x = 0 for every row}` in dimension `dim`.
pub fn kernel<S: Scalar>(rows: &[Vec<S>], dim: usize) -> Vec<Vec<S>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![S::zero(); dim];
            v[f] = S::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Nonzero `μ` with `Σ μ_i v_i = 0`, if the vectors are dependent.
pub fn dependency<S: Scalar>(vectors: &[Vec<S>]) -> Option<Vec<S>> {
    let k = vectors.len();
    let d = vectors.first().map_or(0, |v| v.len());
    let rows: Vec<Vec<S>> = (0..d).map(|i| vectors.iter().map(|v| v[i].clone()).collect()).collect();
    kernel(&rows, k).into_iter().next()
}

fn check_input<S>(dim: usize, vs: &[Vec<S>]) -> Result<(), ConeError> {
    if dim > MAX_DIM {
        return Err(ConeError::LimitExceeded(format!("dimension {dim} > {MAX_DIM}")));
    }
    if vs.len() > MAX_INPUT {
        return Err(ConeError::LimitExceeded(format!("{} input vectors > {MAX_INPUT}", vs.len())));
    }
    if let Some(v) = vs.iter().find(|v| v.len() != dim) {
        return Err(ConeError::DimensionMismatch { expected: dim, got: v.len() });
    }
    Ok(())
}

/// Extreme rays and lineality of `{x : a·x >= 0 for a in ineqs}`.
pub fn halfspaces_to_generators<S: Scalar>(dim: usize, ineqs: &[Vec<S>]) -> Result<VForm<S>, ConeError> {
    check_input(dim, ineqs)?;
    let m = ineqs.len();
    let mut lineality: Vec<Vec<S>> = (0..dim)
        .map(|i| {
            let mut e = vec![S::zero(); dim];
            e[i] = S::one();
            e
        })
        .collect();
    // rays with the set of processed inequalities they are tight on
    let mut rays: Vec<(Vec<S>, Vec<bool>)> = Vec::new();
    for (k, a) in ineqs.iter().enumerate() {
        if let Some(pos) = lineality.iter().position(|l| !dot(a, l).is_negligible()) {
            let mut l0 = lineality.swap_remove(pos);
            let mut al0 = dot(a, &l0);
            if al0 < S::zero() {
                l0 = scaled(&l0, &-S::one());
                al0 = -al0;
            }
            for l in lineality.iter_mut() {
                let f = -(dot(a, l) / al0.clone());
                *l = axpy(l, &f, &l0);
            }
            for (r, z) in rays.iter_mut() {
                let f = -(dot(a, r) / al0.clone());
                *r = normalize(&axpy(r, &f, &l0)).expect("projected ray stays nonzero");
                z[k] = true;
            }
            let mut z = vec![true; m];
            z[k] = false;
            for zz in z.iter_mut().skip(k + 1) {
                *zz = false;
            }
            rays.push((normalize(&l0).expect("lineality vector is nonzero"), z));
            continue;
        }
        let vals: Vec<S> = rays.iter().map(|(r, _)| dot(a, r)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_strictly_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_strictly_negative()).collect();
        let zero: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negligible()).collect();
        let needed = dim.saturating_sub(lineality.len()).saturating_sub(2);
        let mut next: Vec<(Vec<S>, Vec<bool>)> = Vec::new();
        for &i in pos.iter().chain(&zero) {
            let (r, z) = &rays[i];
            let mut z = z.clone();
            z[k] = vals[i].is_negligible();
            next.push((r.clone(), z));
        }
        for &p in &pos {
            for &n in &neg {
                let common: Vec<bool> = rays[p].1.iter().zip(&rays[n].1).map(|(x, y)| *x && *y).collect();
                if common.iter().filter(|b| **b).count() < needed {
                    continue;
                }
                let blocked = rays.iter().enumerate().any(|(j, (_, zj))| {
                    j != p && j != n && common.iter().zip(zj).all(|(c, t)| !*c || *t)
                });
                if blocked {
                    continue;
                }
                let combo: Vec<S> = rays[n]
                    .0
                    .iter()
                    .zip(&rays[p].0)
                    .map(|(x, y)| vals[p].clone() * x.clone() - vals[n].clone() * y.clone())
                    .collect();
                if let Some(r) = normalize(&combo) {
                    let mut z = common;
                    z[k] = true;
                    if !next.iter().any(|(q, _)| same_vec(q, &r)) {
                        next.push((r, z));
                    }
                }
            }
        }
        if next.len() > MAX_INTERMEDIATE {
            return Err(ConeError::LimitExceeded(format!("{} intermediate rays", next.len())));
        }
        rays = next;
    }
    Ok(VForm { lineality, rays: rays.into_iter().map(|(r, _)| r).collect() })
}

/// Facet normals and implicit equalities of `span(lineality) + cone(rays)`.
pub fn generators_to_halfspaces<S: Scalar>(dim: usize, v: &VForm<S>) -> Result<HForm<S>, ConeError> {
    let mut all: Vec<Vec<S>> = v.rays.clone();
    for l in &v.lineality {
        all.push(l.clone());
        all.push(scaled(l, &-S::one()));
    }
    let dual = halfspaces_to_generators(dim, &all)?;
    Ok(HForm { equalities: dual.lineality, inequalities: dual.rays })
}

/// Writes `x = Σ λ_i g_i` (λ >= 0) with linearly independent `g_i`.
/// Returns the surviving `(index, coefficient)` pairs.
pub fn caratheodory<S: Scalar>(gens: &[Vec<S>], coeffs: &[S]) -> Vec<(usize, S)> {
    let mut active: Vec<(usize, S)> =
        coeffs.iter().cloned().enumerate().filter(|(_, c)| c.is_strictly_positive()).collect();
    loop {
        let vs: Vec<Vec<S>> = active.iter().map(|(i, _)| gens[*i].clone()).collect();
        let Some(mut mu) = dependency(&vs) else {
            return active;
        };
        if !mu.iter().any(|m| m.is_strictly_positive()) {
            mu = scaled(&mu, &-S::one());
        }
        // step to the first coefficient that hits zero
        let mut argmin: Option<(usize, S)> = None;
        for (k, ((_, l), m)) in active.iter().zip(&mu).enumerate() {
            if m.is_strictly_positive() {
                let r = l.clone() / m.clone();
                if argmin.as_ref().map_or(true, |(_, t)| r < *t) {
                    argmin = Some((k, r));
                }
            }
        }
        let (kmin, t) = argmin.expect("dependency has a positive entry");
        active = active
            .iter()
            .zip(&mu)
            .enumerate()
            .filter(|(k, _)| *k != kmin)
            .map(|(_, ((i, l), m))| (*i, l.clone() - t.clone() * m.clone()))
            .filter(|(_, l)| l.is_strictly_positive())
            .collect();
    }
}
