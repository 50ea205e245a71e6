//! The appendix sets `V(l)`, `U(l)`, `M_n = ∪_l U(l)` and the cone `cc(M_n)`,
//! restricted to the truncations `W_m`, with constructive limit oracles that
//! check `(M_n)^‡ = M_{n-1}` and `cc(M_n)^‡ = cc(M_{n-1})` pointwise.
//!
//! Coordinates are generic over [`Scalar`]; the verifiers use exact rationals.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::coneengine::caratheodory;
use crate::numkernel::{lp_feasible, LpProblem, LpSolution, Relation};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeqError {
    #[error("malformed signature: {0}")]
    Signature(String),
    #[error("point has {len} coordinates but ambient index {m}")]
    Ambient { len: usize, m: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{0} candidate atoms exceed the limit {1}")]
    TooManyAtoms(usize, usize),
}

/// Largest atom family handed to the LP.
pub const MAX_ATOMS: usize = 20_000;

/// An element of `W_m`: `coords` padded with zeros up to length `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct AppendixPoint<S> {
    pub coords: Vec<S>,
    pub m: usize,
}

impl<S: Scalar> AppendixPoint<S> {
    pub fn new(coords: Vec<S>, m: usize) -> Result<Self, SeqError> {
        if coords.len() > m {
            return Err(SeqError::Ambient { len: coords.len(), m });
        }
        Ok(AppendixPoint { coords, m })
    }

    /// Ambient index equal to the number of coordinates.
    pub fn from_coords(coords: Vec<S>) -> Self {
        let m = coords.len();
        AppendixPoint { coords, m }
    }

    pub fn coord(&self, i: usize) -> S {
        self.coords.get(i).cloned().unwrap_or_else(S::zero)
    }

    pub fn padded(&self) -> Vec<S> {
        (0..self.m).map(|i| self.coord(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_negligible())
    }

    pub fn max_coord(&self) -> S {
        self.coords.iter().fold(S::zero(), |a, c| if *c > a { c.clone() } else { a })
    }

    pub fn min_positive(&self) -> Option<S> {
        self.coords
            .iter()
            .filter(|c| c.is_strictly_positive())
            .fold(None, |a: Option<S>, c| Some(match a { Some(a) if a < *c => a, _ => c.clone() }))
    }

    fn scaled(&self, s: &S) -> Self {
        AppendixPoint { coords: self.coords.iter().map(|c| c.clone() * s.clone()).collect(), m: self.m }
    }
}

fn ge<S: Scalar>(x: &S, t: &S) -> bool {
    !(x.clone() - t.clone()).is_strictly_negative()
}

fn recip<S: Scalar>(l: usize) -> S {
    S::from_ratio(1, l as i64)
}

/// `l = (l_0, …, l_n)` with every entry at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BlockSignature(pub Vec<usize>);

impl BlockSignature {
    pub fn new(l: Vec<usize>) -> Result<Self, SeqError> {
        if l.len() < 2 {
            return Err(SeqError::Signature(format!("{l:?} has fewer than two entries")));
        }
        if l.contains(&0) {
            return Err(SeqError::Signature(format!("{l:?} has a zero entry")));
        }
        Ok(BlockSignature(l))
    }

    pub fn n(&self) -> usize {
        self.0.len() - 1
    }

    /// `l_0 + … + l_{n-1}`, the length of `V(l)`.
    pub fn span(&self) -> usize {
        self.0[..self.n()].iter().sum()
    }

    /// Lower bound of `V(l)` at each of its coordinates.
    pub fn thresholds<S: Scalar>(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.span());
        for j in 0..self.n() {
            out.extend(std::iter::repeat_n(recip::<S>(self.0[j + 1]), self.0[j]));
        }
        out
    }
}

/// `x ∈ U(l)`: the blocks of `V(l)` followed by coordinates in `[0, 1]`.
#[allow(non_snake_case)]
pub fn in_U<S: Scalar>(x: &AppendixPoint<S>, l: &BlockSignature) -> bool {
    let t = l.thresholds::<S>();
    if t.len() > x.m {
        return false;
    }
    (0..x.m).all(|i| {
        let c = x.coord(i);
        let lo = t.get(i).cloned().unwrap_or_else(S::zero);
        ge(&c, &lo) && ge(&S::one(), &c)
    })
}

/// All `(l_0, …, l_{parts-1})` with entries `>= 1` and sum `<= max_sum`.
pub fn compositions(parts: usize, max_sum: usize) -> Vec<Vec<usize>> {
    fn go(parts: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            out.push(cur.clone());
            return;
        }
        for v in 1..=left.saturating_sub(parts - 1) {
            cur.push(v);
            go(parts - 1, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts <= max_sum {
        go(parts, max_sum, &mut Vec::new(), &mut out);
    }
    out
}

/// `max(10, ⌈max / min_pos⌉)`; for points in `[0, 1]^m` this is at least
/// `⌈1 / min_pos⌉`, the largest last threshold that can matter.
pub fn default_search_bound<S: Scalar>(x: &AppendixPoint<S>) -> usize {
    let Some(mp) = x.min_positive() else { return 10 };
    let ratio = (x.max_coord().max_f64() / mp.to_f64_lossy()).ceil();
    let r = if ratio.is_finite() { ratio as usize } else { usize::MAX / 2 };
    // Guard against float rounding in the ratio.
    10.max(r.saturating_add(1))
}

trait MaxF64 {
    fn max_f64(&self) -> f64;
}

impl<S: Scalar> MaxF64 for S {
    fn max_f64(&self) -> f64 {
        self.to_f64_lossy().max(1.0)
    }
}

/// Smallest `l_n` making the last block of `x` admissible, if `<= bound`.
fn last_threshold<S: Scalar>(x: &AppendixPoint<S>, start: usize, len: usize, bound: usize) -> Option<usize> {
    let mut need = 1usize;
    for i in start..start + len {
        let c = x.coord(i);
        if !c.is_strictly_positive() {
            return None;
        }
        while need <= bound && !ge(&c, &recip::<S>(need)) {
            need = if need == bound { bound + 1 } else { (need * 2).min(bound) };
        }
        if need > bound {
            return None;
        }
    }
    // Tighten by bisection back from the doubling step.
    let ok = |k: usize| (start..start + len).all(|i| ge(&x.coord(i), &recip::<S>(k)));
    let (mut lo, mut hi) = (1usize, need);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(hi)
}

/// Membership in `M_n ∩ W_m` by enumerating `(l_0, …, l_{n-1})` with span
/// `<= m`; `l_n` is computed exactly and must not exceed `search_bound`.
#[allow(non_snake_case)]
pub fn in_Mn<S: Scalar>(x: &AppendixPoint<S>, n: usize, search_bound: Option<usize>) -> Option<BlockSignature> {
    if n == 0 {
        return None;
    }
    let bound = search_bound.unwrap_or_else(|| default_search_bound(x));
    if (0..x.m).any(|i| x.coord(i).is_strictly_negative() || !ge(&S::one(), &x.coord(i))) {
        return None;
    }
    for prefix in compositions(n, x.m) {
        let head: usize = prefix[..n - 1].iter().sum();
        // Blocks 0..n-2 have thresholds fixed by the prefix itself.
        let mut ok = true;
        let mut pos = 0;
        for j in 0..n - 1 {
            let t = recip::<S>(prefix[j + 1]);
            if (pos..pos + prefix[j]).any(|i| !ge(&x.coord(i), &t)) {
                ok = false;
                break;
            }
            pos += prefix[j];
        }
        if !ok {
            continue;
        }
        if let Some(ln) = last_threshold(x, head, prefix[n - 1], bound) {
            let mut l = prefix.clone();
            l.push(ln);
            let sig = BlockSignature(l);
            debug_assert!(in_U(x, &sig));
            return Some(sig);
        }
    }
    None
}

/// `x^k` in `M_n` with `|x^k - x|_∞ <= 1/k`, built by raising the zeros of the
/// last block of a closure box to `1/k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitWitness<S> {
    /// `(l_0, …, l_{n-1})` of the closure box containing `x`.
    pub prefix: Vec<usize>,
    pub sequence: Vec<(usize, AppendixPoint<S>, S)>,
}

pub const DEFAULT_K_SCHEDULE: [usize; 4] = [10, 100, 1000, 10_000];

/// Closure box of `U(prefix, ∞)`: the last block relaxed to `[0, 1]`.
fn closure_thresholds<S: Scalar>(prefix: &[usize]) -> Vec<S> {
    let n = prefix.len();
    let mut out = Vec::new();
    for j in 0..n - 1 {
        out.extend(std::iter::repeat_n(recip::<S>(prefix[j + 1]), prefix[j]));
    }
    out.extend(std::iter::repeat_n(S::zero(), prefix[n - 1]));
    out
}

fn in_box<S: Scalar>(x: &AppendixPoint<S>, lower: &[S]) -> bool {
    (0..x.m).all(|i| {
        let c = x.coord(i);
        ge(&c, lower.get(i).unwrap_or(&S::zero())) && ge(&S::one(), &c)
    })
}

fn raise_last_block<S: Scalar>(x: &AppendixPoint<S>, prefix: &[usize], k: usize) -> AppendixPoint<S> {
    let span: usize = prefix.iter().sum();
    let start = span - prefix[prefix.len() - 1];
    let m = x.m.max(span);
    let mut c: Vec<S> = (0..m).map(|i| x.coord(i)).collect();
    for v in c.iter_mut().take(span).skip(start) {
        if !ge(v, &recip::<S>(k)) {
            *v = recip::<S>(k);
        }
    }
    AppendixPoint { coords: c, m }
}

fn dist<S: Scalar>(a: &AppendixPoint<S>, b: &AppendixPoint<S>) -> S {
    (0..a.m.max(b.m)).fold(S::zero(), |acc, i| {
        let d = (a.coord(i) - b.coord(i)).abs();
        if d > acc {
            d
        } else {
            acc
        }
    })
}

/// `(l_0, …, l_{n-1})` whose first `n - 1` blocks fit in `W_m`. The last block
/// may run past `m`: a sequence converging in `E` lives in some larger `W_{m'}`.
fn limit_prefixes(n: usize, m: usize, bound: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for head in compositions(n - 1, m) {
        for last in 1..=bound {
            let mut p = head.clone();
            p.push(last);
            out.push(p);
        }
    }
    out
}

/// Constructive test for `x ∈ (M_n)^‡ ∩ W_m`, independent of [`in_Mn`] at `n - 1`.
/// The approximants `x^k` lie in `M_n ∩ W_{m'}` for some `m' >= m`.
pub fn mn_limit_oracle<S: Scalar>(x: &AppendixPoint<S>, n: usize, schedule: &[usize]) -> Option<LimitWitness<S>> {
    if n == 0 {
        return None;
    }
    'prefix: for prefix in limit_prefixes(n, x.m, default_search_bound(x)) {
        if !in_box(x, &closure_thresholds::<S>(&prefix)) {
            continue;
        }
        let mut sequence = Vec::with_capacity(schedule.len());
        for &k in schedule {
            let xk = raise_last_block(x, &prefix, k);
            let mut l = prefix.clone();
            l.push(k);
            let d = dist(&xk, x);
            if !in_U(&xk, &BlockSignature(l)) || d > recip::<S>(k) {
                continue 'prefix;
            }
            sequence.push((k, xk, d));
        }
        return Some(LimitWitness { prefix, sequence });
    }
    None
}

/// `Σ coeffs_i · atoms_i` with every atom in `M_n ∩ W_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicCombination<S> {
    pub coeffs: Vec<S>,
    pub atoms: Vec<AppendixPoint<S>>,
    pub signatures: Vec<BlockSignature>,
}

impl<S: Scalar> ConicCombination<S> {
    pub fn support(&self) -> usize {
        self.coeffs.len()
    }

    pub fn sum(&self, m: usize) -> AppendixPoint<S> {
        let mut out = vec![S::zero(); m];
        for (c, a) in self.coeffs.iter().zip(&self.atoms) {
            for (o, v) in out.iter_mut().zip(a.padded()) {
                *o = o.clone() + c.clone() * v;
            }
        }
        AppendixPoint { coords: out, m }
    }
}

/// Vertices of the box `lower ≤ v ≤ 1` that vanish where `x` does. `None`
/// when the box forces a positive entry at such a coordinate.
fn box_vertices<S: Scalar>(lower: &[S], x: &AppendixPoint<S>) -> Option<Vec<Vec<S>>> {
    let mut verts: Vec<Vec<S>> = vec![Vec::with_capacity(x.m)];
    for i in 0..x.m {
        let lo = lower.get(i).cloned().unwrap_or_else(S::zero);
        let choices: Vec<S> = if !x.coord(i).is_strictly_positive() {
            if lo.is_strictly_positive() {
                return None;
            }
            vec![S::zero()]
        } else if ge(&lo, &S::one()) {
            vec![S::one()]
        } else {
            vec![lo, S::one()]
        };
        verts = verts
            .into_iter()
            .flat_map(|v| {
                choices.iter().map(move |c| {
                    let mut w = v.clone();
                    w.push(c.clone());
                    w
                })
            })
            .collect();
    }
    Some(verts)
}

/// Conic decomposition of `x` over the given atoms by an LP on its support.
fn decompose<S: Scalar>(x: &AppendixPoint<S>, atoms: &[Vec<S>]) -> Option<Vec<(usize, S)>> {
    let rows: Vec<usize> = (0..x.m).filter(|&i| x.coord(i).is_strictly_positive()).collect();
    let mut lp = LpProblem::new(atoms.len());
    for &i in &rows {
        lp.add_row(atoms.iter().map(|a| a[i].clone()).collect(), Relation::Eq, x.coord(i));
    }
    let LpSolution::Feasible { x: lambda, .. } = lp_feasible(&lp) else { return None };
    let support = caratheodory(atoms, &lambda);
    Some(support)
}

/// Membership in `cc(M_n) ∩ W_m`. A positive multiple of `x` lying in `M_n`
/// is tried first; otherwise an LP over the vertices of `U(l) ∩ W_m` with
/// `l_n = search_bound`.
#[allow(non_snake_case)]
pub fn in_ccMn<S: Scalar>(
    x: &AppendixPoint<S>,
    n: usize,
    search_bound: Option<usize>,
) -> Result<Option<ConicCombination<S>>, SeqError> {
    if (0..x.m).any(|i| x.coord(i).is_strictly_negative()) {
        return Ok(None);
    }
    if x.is_zero() {
        return Ok(Some(ConicCombination { coeffs: vec![], atoms: vec![], signatures: vec![] }));
    }
    let bound = search_bound.unwrap_or_else(|| default_search_bound(x));
    let s = x.max_coord();
    let a = x.scaled(&(S::one() / s.clone()));
    if let Some(sig) = in_Mn(&a, n, Some(bound)) {
        return Ok(Some(ConicCombination { coeffs: vec![s], atoms: vec![a], signatures: vec![sig] }));
    }
    // Every atom is positive on its first n coordinates.
    if (0..n.min(x.m)).any(|i| !x.coord(i).is_strictly_positive()) {
        return Ok(None);
    }
    let mut atoms = Vec::new();
    let mut sigs = Vec::new();
    for prefix in compositions(n, x.m) {
        let mut l = prefix.clone();
        l.push(bound);
        let sig = BlockSignature(l);
        if let Some(vs) = box_vertices(&sig.thresholds::<S>(), x) {
            for v in vs {
                atoms.push(v);
                sigs.push(sig.clone());
            }
        }
        if atoms.len() > MAX_ATOMS {
            return Err(SeqError::TooManyAtoms(atoms.len(), MAX_ATOMS));
        }
    }
    Ok(decompose(x, &atoms).map(|support| {
        let mut c = ConicCombination { coeffs: vec![], atoms: vec![], signatures: vec![] };
        for (i, coef) in support {
            c.coeffs.push(coef);
            c.atoms.push(AppendixPoint { coords: atoms[i].clone(), m: x.m });
            c.signatures.push(sigs[i].clone());
        }
        c
    }))
}

/// `x = Σ λ_j a_j` over closure-box vertices, with `x^k = Σ λ_j a_j^k ∈ cc(M_n)`
/// for the raised atoms `a_j^k ∈ U(prefix_j, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CcLimitWitness<S> {
    pub coeffs: Vec<S>,
    pub atoms: Vec<AppendixPoint<S>>,
    pub prefixes: Vec<Vec<usize>>,
    /// `(k, |x^k - x|_∞)`.
    pub distances: Vec<(usize, S)>,
}

/// Constructive test for `x ∈ cc(M_n)^‡ ∩ W_m`.
pub fn cc_limit_oracle<S: Scalar>(
    x: &AppendixPoint<S>,
    n: usize,
    schedule: &[usize],
) -> Result<Option<CcLimitWitness<S>>, SeqError> {
    if (0..x.m).any(|i| x.coord(i).is_strictly_negative()) || n == 0 {
        return Ok(None);
    }
    if x.is_zero() {
        let d = schedule.iter().map(|&k| (k, S::zero())).collect();
        return Ok(Some(CcLimitWitness { coeffs: vec![], atoms: vec![], prefixes: vec![], distances: d }));
    }
    let s = x.max_coord();
    let a = x.scaled(&(S::one() / s.clone()));
    let bound = default_search_bound(x);
    let single = limit_prefixes(n, x.m, bound).into_iter().find(|p| in_box(&a, &closure_thresholds::<S>(p)));
    let (coeffs, atoms, used): (Vec<S>, Vec<AppendixPoint<S>>, Vec<Vec<usize>>) = match single {
        Some(p) => (vec![s], vec![a], vec![p.clone()]),
        None => {
            let mut verts = Vec::new();
            let mut owner = Vec::new();
            // The widest closure box for each head contains the others.
            for p in limit_prefixes(n, x.m, bound).into_iter().filter(|p| p[n - 1] == bound) {
                if let Some(vs) = box_vertices(&closure_thresholds::<S>(&p), x) {
                    for v in vs {
                        verts.push(v);
                        owner.push(p.clone());
                    }
                }
                if verts.len() > MAX_ATOMS {
                    return Err(SeqError::TooManyAtoms(verts.len(), MAX_ATOMS));
                }
            }
            let Some(support) = decompose(x, &verts) else { return Ok(None) };
            let mut c = Vec::new();
            let mut at = Vec::new();
            let mut us = Vec::new();
            for (i, coef) in support {
                c.push(coef);
                at.push(AppendixPoint { coords: verts[i].clone(), m: x.m });
                us.push(owner[i].clone());
            }
            (c, at, us)
        }
    };
    let total = coeffs.iter().fold(S::zero(), |acc, c| acc + c.clone());
    let mut distances = Vec::with_capacity(schedule.len());
    for &k in schedule {
        let mut xk = ConicCombination { coeffs: coeffs.clone(), atoms: vec![], signatures: vec![] };
        for (a, p) in atoms.iter().zip(&used) {
            let ak = raise_last_block(a, p, k);
            let mut l = p.clone();
            l.push(k);
            let sig = BlockSignature(l);
            if !in_U(&ak, &sig) {
                return Ok(None);
            }
            xk.atoms.push(ak);
            xk.signatures.push(sig);
        }
        let m = xk.atoms.iter().map(|a| a.m).max().unwrap_or(x.m);
        let d = dist(&xk.sum(m), x);
        if d > total.clone() * recip::<S>(k) {
            return Ok(None);
        }
        distances.push((k, d));
    }
    Ok(Some(CcLimitWitness { coeffs, atoms, prefixes: used, distances }))
}

/// `cc(M_1) ∩ W_m = {0} ∪ {f >= 0 : f_0 > 0}`.
pub fn cc_m1_closed_form<S: Scalar>(x: &AppendixPoint<S>) -> bool {
    let nonneg = (0..x.m).all(|i| !x.coord(i).is_strictly_negative());
    nonneg && (x.is_zero() || x.coord(0).is_strictly_positive())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub coords: Vec<String>,
    /// Membership in the set one step down (`M_{n-1}` or `cc(M_{n-1})`).
    pub in_prev: bool,
    /// Limit detected for the set at level `n`.
    pub limit: bool,
    /// Membership at level `n` itself.
    pub in_n: bool,
    pub prev_signature: Option<Vec<usize>>,
    pub support: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeqStepReport {
    pub schema: &'static str,
    pub cone: bool,
    pub n: usize,
    pub m: usize,
    pub samples: usize,
    pub seed: u64,
    pub k_schedule: Vec<usize>,
    pub checked: usize,
    pub agreements: usize,
    pub in_prev: usize,
    pub discrepancies: Vec<PointRecord>,
    /// A sampled point in the level-`(n-1)` set but not the level-`n` set.
    pub strict_witness: Option<PointRecord>,
    /// Largest conic support seen; never above `m + 1`.
    pub max_support: usize,
    pub points: Vec<PointRecord>,
}

impl SeqStepReport {
    pub fn passed(&self) -> bool {
        self.discrepancies.is_empty() && self.strict_witness.is_some() && self.max_support <= self.m + 1
    }
}

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Random points of `[0, 1]^m` with small-denominator rational entries, mixed
/// with structured ones: zeros placed inside the first blocks, one-hot and
/// staircase vectors.
pub fn sample_points(n: usize, m: usize, samples: usize, seed: u64) -> Vec<AppendixPoint<BigRational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples + 2 * m + 2);
    // Staircases 1,…,1,0,…,0 separate consecutive levels.
    for ones in 0..=m {
        let c = (0..m).map(|i| if i < ones { q(1, 1) } else { q(0, 1) }).collect();
        out.push(AppendixPoint { coords: c, m });
    }
    for i in 0..m {
        let c = (0..m).map(|j| if i == j { q(1, 1) } else { q(0, 1) }).collect();
        out.push(AppendixPoint { coords: c, m });
    }
    let max_den = (2 * m).max(4) as i64;
    while out.len() < samples {
        let mode = rng.gen_range(0..4);
        let mut c: Vec<BigRational> = (0..m)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    q(0, 1)
                } else {
                    let den = rng.gen_range(1..=max_den);
                    q(rng.gen_range(1..=den), den)
                }
            })
            .collect();
        match mode {
            0 => {}
            1 => {
                let z = rng.gen_range(0..(n + 1).min(m));
                c[z] = q(0, 1);
            }
            2 => {
                let z = rng.gen_range(0..m);
                for v in c.iter_mut().skip(z) {
                    *v = q(0, 1);
                }
            }
            _ => {
                for v in c.iter_mut() {
                    if rng.gen_bool(0.5) {
                        *v = q(1, 1);
                    }
                }
            }
        }
        out.push(AppendixPoint { coords: c, m });
    }
    out.truncate(samples.max(2 * m + 1));
    out
}

fn coords_str(x: &AppendixPoint<BigRational>) -> Vec<String> {
    x.padded().iter().map(|c| c.to_string()).collect()
}

fn check_args(n: usize, m: usize, samples: usize, min_n: usize) -> Result<(), SeqError> {
    if n < min_n {
        return Err(SeqError::Precondition(format!("n = {n} must be at least {min_n}")));
    }
    if m < n {
        return Err(SeqError::Precondition(format!("m = {m} must be at least n = {n}")));
    }
    if samples == 0 {
        return Err(SeqError::Precondition("sample budget is 0".into()));
    }
    Ok(())
}

/// Compares `in_Mn(x, n-1)` with the limit oracle for `M_n` on sampled points.
pub fn seq_step_verify(n: usize, m: usize, samples: usize, seed: u64) -> Result<SeqStepReport, SeqError> {
    check_args(n, m, samples, 2)?;
    let mut report = new_report(false, n, m, samples, seed);
    for x in sample_points(n, m, samples, seed) {
        let prev = in_Mn(&x, n - 1, None);
        let limit = mn_limit_oracle(&x, n, &DEFAULT_K_SCHEDULE).is_some();
        let in_n = in_Mn(&x, n, None).is_some();
        let rec = PointRecord {
            coords: coords_str(&x),
            in_prev: prev.is_some(),
            limit,
            in_n,
            prev_signature: prev.map(|s| s.0),
            support: None,
        };
        record(&mut report, rec);
    }
    Ok(report)
}

/// Compares `in_ccMn(x, n-1)` with the limit oracle for `cc(M_n)`; sampled
/// points are rescaled by random positive factors.
pub fn cc_seq_step_verify(n: usize, m: usize, samples: usize, seed: u64) -> Result<SeqStepReport, SeqError> {
    check_args(n, m, samples, 2)?;
    let mut report = new_report(true, n, m, samples, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut points = sample_points(n, m, samples, seed);
    for x in points.iter_mut() {
        let s = q(rng.gen_range(1..=10), rng.gen_range(1..=3));
        *x = x.scaled(&s);
    }
    // Sums of two points from different levels exercise the LP path.
    let extra: Vec<_> = points.windows(2).step_by(7).map(|w| add(&w[0], &w[1])).collect();
    let keep = points.len().saturating_sub(extra.len());
    points.truncate(keep);
    points.extend(extra);
    for x in points {
        let prev = in_ccMn(&x, n - 1, None)?;
        let limit = cc_limit_oracle(&x, n, &DEFAULT_K_SCHEDULE)?.is_some();
        let in_n = in_ccMn(&x, n, None)?.is_some();
        let support = prev.as_ref().map(|c| c.support());
        let rec = PointRecord { coords: coords_str(&x), in_prev: prev.is_some(), limit, in_n, prev_signature: None, support };
        record(&mut report, rec);
    }
    Ok(report)
}

fn add(a: &AppendixPoint<BigRational>, b: &AppendixPoint<BigRational>) -> AppendixPoint<BigRational> {
    let m = a.m.max(b.m);
    AppendixPoint { coords: (0..m).map(|i| a.coord(i) + b.coord(i)).collect(), m }
}

fn new_report(cone: bool, n: usize, m: usize, samples: usize, seed: u64) -> SeqStepReport {
    SeqStepReport {
        schema: "qmclose/1",
        cone,
        n,
        m,
        samples,
        seed,
        k_schedule: DEFAULT_K_SCHEDULE.to_vec(),
        checked: 0,
        agreements: 0,
        in_prev: 0,
        discrepancies: Vec::new(),
        strict_witness: None,
        max_support: 0,
        points: Vec::new(),
    }
}

fn record(report: &mut SeqStepReport, rec: PointRecord) {
    report.checked += 1;
    report.max_support = report.max_support.max(rec.support.unwrap_or(0));
    if rec.in_prev {
        report.in_prev += 1;
    }
    if rec.in_prev == rec.limit {
        report.agreements += 1;
    } else {
        report.discrepancies.push(rec.clone());
    }
    if rec.in_prev && !rec.in_n && report.strict_witness.is_none() {
        report.strict_witness = Some(rec.clone());
    }
    report.points.push(rec);
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerminalReport {
    pub schema: &'static str,
    pub m: usize,
    pub samples: usize,
    pub seed: u64,
    /// Points where the `M_1` limit oracle disagrees with `[0, 1]^m`.
    pub box_discrepancies: Vec<Vec<String>>,
    /// Points where `in_ccMn(·, 1)` disagrees with `f_0 = 0 ⇒ f = 0`.
    pub cc_closed_form_discrepancies: Vec<Vec<String>>,
    /// Points where the `cc(M_1)` limit oracle disagrees with the orthant.
    pub orthant_discrepancies: Vec<Vec<String>>,
    /// Limit points of `[0, 1]^m` sampled along `x + (1/k)(y - x)` stay in it.
    pub idempotent: bool,
    /// A point of `M_1^‡ ∖ M_1`.
    pub strict_witness: Option<Vec<String>>,
}

impl TerminalReport {
    pub fn passed(&self) -> bool {
        self.box_discrepancies.is_empty()
            && self.cc_closed_form_discrepancies.is_empty()
            && self.orthant_discrepancies.is_empty()
            && self.idempotent
            && self.strict_witness.is_some()
    }
}

/// The `n = 1` end of the chain: `M_1^‡ ∩ W_m = [0, 1]^m`, `cc(M_1)` in closed
/// form, and `cc(M_1)^‡` the orthant.
pub fn terminal_verify(m: usize, samples: usize, seed: u64) -> Result<TerminalReport, SeqError> {
    check_args(1, m, samples, 1)?;
    let mut rep = TerminalReport {
        schema: "qmclose/1",
        m,
        samples,
        seed,
        box_discrepancies: vec![],
        cc_closed_form_discrepancies: vec![],
        orthant_discrepancies: vec![],
        idempotent: true,
        strict_witness: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = sample_points(1, m, samples, seed);
    for x in &pts {
        // Push some points out of the box or orthant.
        let mut y = x.clone();
        if rng.gen_bool(0.25) {
            let i = rng.gen_range(0..m);
            y.coords[i] = if rng.gen_bool(0.5) { q(-1, 3) } else { q(3, 2) };
        }
        let in_box = y.coords.iter().all(|c| !c.is_strictly_negative() && *c <= q(1, 1));
        if mn_limit_oracle(&y, 1, &DEFAULT_K_SCHEDULE).is_some() != in_box {
            rep.box_discrepancies.push(coords_str(&y));
        }
        if in_box && in_Mn(&y, 1, None).is_none() && rep.strict_witness.is_none() {
            rep.strict_witness = Some(coords_str(&y));
        }
        let scaled = y.scaled(&q(rng.gen_range(1..=9), 2));
        if in_ccMn(&scaled, 1, None)?.is_some() != cc_m1_closed_form(&scaled) {
            rep.cc_closed_form_discrepancies.push(coords_str(&scaled));
        }
        let orthant = scaled.coords.iter().all(|c| !c.is_strictly_negative());
        if cc_limit_oracle(&scaled, 1, &DEFAULT_K_SCHEDULE)?.is_some() != orthant {
            rep.orthant_discrepancies.push(coords_str(&scaled));
        }
    }
    // Closedness of the box: the limit oracle accepts limits of accepted points.
    for w in pts.windows(2).take(50) {
        let (a, b) = (&w[0], &w[1]);
        for k in [2i64, 10, 1000] {
            let p = AppendixPoint {
                coords: (0..m).map(|i| a.coord(i) + (b.coord(i) - a.coord(i)) * q(1, k)).collect(),
                m,
            };
            if mn_limit_oracle(&p, 1, &DEFAULT_K_SCHEDULE).is_none() {
                rep.idempotent = false;
            }
        }
    }
    Ok(rep)
}

/// Float view of a rational point, for display.
pub fn to_f64_point(x: &AppendixPoint<BigRational>) -> Vec<f64> {
    x.padded().iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
}

#[doc(hidden)]
pub fn zero_point<S: Scalar>(m: usize) -> AppendixPoint<S> {
    AppendixPoint { coords: vec![S::zero(); m], m }
}
