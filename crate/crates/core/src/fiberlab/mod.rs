//! Fibres of a quadratic module over a bounded coordinate, and the recursive
//! weak closure built from them.
//!
//! Intersections over an interval are sampled on a finite grid. Every positive
//! verdict here is qualified by that grid and by the truncation degree.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::coneengine::SeqVerdict;
use crate::polyring::{rat, Monomial, PolyError};
use crate::qmodule::{
    member, seq_member, support_probe, MemberOptions, MemberResult, MemberStatus, QPoly, QmError, QuadraticModuleSpec,
    SeqMemberResult,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiberError {
    #[error(transparent)]
    Qm(#[from] QmError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("grid needs at least one point")]
    EmptyGrid,
    #[error("interval [{0}, {1}] is empty")]
    BadInterval(String, String),
    #[error("unknown coordinate {0}")]
    UnknownCoordinate(String),
}

/// How one side of a bound was certified.
#[derive(Debug, Clone)]
pub enum SideCertificate {
    /// The difference lies in `M` at the working degree.
    Member(MemberResult),
    /// Every ε of the schedule passed, evidence for the sequential closure.
    Sequential(SeqMemberResult),
    Failed { status: MemberStatus, seq: Option<SeqVerdict> },
}

impl SideCertificate {
    pub fn certified(&self) -> bool {
        !matches!(self, SideCertificate::Failed { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            SideCertificate::Member(_) => "member",
            SideCertificate::Sequential(_) => "sequential",
            SideCertificate::Failed { .. } => "failed",
        }
    }
}

/// `a <= f <= b` with certificates for `b - f` and `f - a`.
#[derive(Debug, Clone)]
pub struct BoundedElementWitness {
    pub f: QPoly,
    pub a: BigRational,
    pub b: BigRational,
    pub upper: SideCertificate,
    pub lower: SideCertificate,
}

impl BoundedElementWitness {
    pub fn certified(&self) -> bool {
        self.upper.certified() && self.lower.certified()
    }
}

#[derive(Debug, Clone)]
pub struct BoundOptions {
    pub member: MemberOptions,
    /// ε values for the sequential fallback; empty disables it.
    pub schedule: Vec<BigRational>,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions { member: MemberOptions::default(), schedule: vec![rat(1, 10), rat(1, 100), rat(1, 1000)] }
    }
}

fn certify_side(g: &QPoly, m: &QuadraticModuleSpec, d: u32, opts: &BoundOptions) -> Result<SideCertificate, QmError> {
    let r = member(g, m, d, &opts.member)?;
    if r.is_member() {
        return Ok(SideCertificate::Member(r));
    }
    let e_min = g.degree() / 2 + 1;
    if opts.schedule.is_empty() || 2 * e_min > d {
        return Ok(SideCertificate::Failed { status: r.status, seq: None });
    }
    // Larger exponents give the perturbation more room at the same degree.
    let mut verdict = SeqVerdict::NotDetected;
    for e in e_min..=d / 2 {
        let s = seq_member(g, m, d, e, &opts.schedule, &opts.member)?;
        if s.verdict == SeqVerdict::InClosure {
            return Ok(SideCertificate::Sequential(s));
        }
        verdict = s.verdict;
    }
    Ok(SideCertificate::Failed { status: r.status, seq: Some(verdict) })
}

/// Tries to certify `b - f` and `f - a`, each in `M` or, failing that, along the
/// ε-schedule.
pub fn certify_bounds(
    f: &QPoly,
    m: &QuadraticModuleSpec,
    a: &BigRational,
    b: &BigRational,
    d: u32,
    opts: &BoundOptions,
) -> Result<BoundedElementWitness, FiberError> {
    if a > b {
        return Err(FiberError::BadInterval(a.to_string(), b.to_string()));
    }
    let f = if f.vars() == &m.vars { f.clone() } else { f.embed(m.vars.clone())? };
    let upper = certify_side(&(-&f).add_constant(b), m, d, opts)?;
    let lower = certify_side(&f.add_constant(&-a), m, d, opts)?;
    Ok(BoundedElementWitness { f, a: a.clone(), b: b.clone(), upper, lower })
}

/// `M + (x_i - λ)` realized over the remaining variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiber {
    pub lambda: BigRational,
    pub spec: QuadraticModuleSpec,
    /// Some generator became a negative constant, so `-1` lies in the fibre.
    pub improper: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberDecomposition {
    pub base: QuadraticModuleSpec,
    pub coordinate: String,
    pub interval: (BigRational, BigRational),
    pub grid: Vec<BigRational>,
    pub fibers: Vec<Fiber>,
}

/// Uniform grid with both endpoints; one point means `a`.
pub fn uniform_grid(a: &BigRational, b: &BigRational, points: usize) -> Result<Vec<BigRational>, FiberError> {
    if points == 0 {
        return Err(FiberError::EmptyGrid);
    }
    if a > b {
        return Err(FiberError::BadInterval(a.to_string(), b.to_string()));
    }
    if points == 1 || a == b {
        return Ok(vec![a.clone()]);
    }
    let steps = BigRational::from_integer((points - 1).into());
    Ok((0..points).map(|k| a + (b - a) * BigRational::from_integer(k.into()) / &steps).collect())
}

/// Substitutes `coordinate = λ` in every generator. The generator list is kept
/// verbatim (zero generators dropped).
pub fn fiber_at(m: &QuadraticModuleSpec, coordinate: &str, lambda: &BigRational) -> Result<Fiber, FiberError> {
    if !m.vars.iter().any(|v| v == coordinate) {
        return Err(FiberError::UnknownCoordinate(coordinate.into()));
    }
    let mut gens = Vec::with_capacity(m.generators.len());
    let mut improper = false;
    for g in &m.generators {
        let s = g.substitute(coordinate, lambda)?;
        if s.is_zero() {
            continue;
        }
        improper |= s.is_constant() && s.constant_term().is_negative();
        gens.push(s);
    }
    let vars = m.vars.iter().filter(|v| v.as_str() != coordinate).cloned().collect::<Vec<_>>();
    let spec = QuadraticModuleSpec::new(crate::polyring::var_list(vars), gens, m.kind)?;
    Ok(Fiber { lambda: lambda.clone(), spec, improper })
}

pub fn fiber_decompose(
    m: &QuadraticModuleSpec,
    coordinate: &str,
    a: &BigRational,
    b: &BigRational,
    grid_size: usize,
) -> Result<FiberDecomposition, FiberError> {
    let grid = uniform_grid(a, b, grid_size)?;
    let fibers = grid.iter().map(|l| fiber_at(m, coordinate, l)).collect::<Result<Vec<_>, _>>()?;
    Ok(FiberDecomposition {
        base: m.clone(),
        coordinate: coordinate.into(),
        interval: (a.clone(), b.clone()),
        grid,
        fibers,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberStatus {
    Member,
    /// `-1` is in the fibre, so everything is.
    Improper,
    NoCertificateAtD,
    InfeasibleAtD,
}

impl FiberStatus {
    pub fn passed(self) -> bool {
        matches!(self, FiberStatus::Member | FiberStatus::Improper)
    }

    fn from_member(s: MemberStatus) -> Self {
        match s {
            MemberStatus::Member => FiberStatus::Member,
            MemberStatus::NoCertificateAtD => FiberStatus::NoCertificateAtD,
            MemberStatus::InfeasibleAtD => FiberStatus::InfeasibleAtD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FiberAggregate {
    /// Member of every fibre on the grid; says nothing between grid points.
    MemberOnAllGridFibers,
    FailsAt(BigRational),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberMemberReport {
    pub coordinate: String,
    pub grid: Vec<BigRational>,
    pub per_fiber: Vec<(BigRational, FiberStatus)>,
    pub aggregate: FiberAggregate,
}

pub fn fiber_member(
    f_test: &QPoly,
    decomp: &FiberDecomposition,
    d: u32,
    opts: &MemberOptions,
) -> Result<FiberMemberReport, FiberError> {
    let f = if f_test.vars() == &decomp.base.vars { f_test.clone() } else { f_test.embed(decomp.base.vars.clone())? };
    let mut per_fiber = Vec::with_capacity(decomp.fibers.len());
    let mut aggregate = FiberAggregate::MemberOnAllGridFibers;
    for fib in &decomp.fibers {
        let status = if fib.improper {
            FiberStatus::Improper
        } else {
            let g = f.substitute(&decomp.coordinate, &fib.lambda)?;
            FiberStatus::from_member(member(&g, &fib.spec, d, opts)?.status)
        };
        if !status.passed() && aggregate == FiberAggregate::MemberOnAllGridFibers {
            aggregate = FiberAggregate::FailsAt(fib.lambda.clone());
        }
        per_fiber.push((fib.lambda.clone(), status));
    }
    Ok(FiberMemberReport { coordinate: decomp.coordinate.clone(), grid: decomp.grid.clone(), per_fiber, aggregate })
}

#[derive(Debug, Clone)]
pub struct WeakClosureOptions {
    pub depth_limit: usize,
    pub degree: u32,
    pub grid_size: usize,
    pub bounds: BoundOptions,
    /// Endpoints tried when searching bounds for a coordinate, besides roots of
    /// linear generators in that coordinate alone.
    pub endpoints: Vec<BigRational>,
}

impl Default for WeakClosureOptions {
    fn default() -> Self {
        WeakClosureOptions {
            depth_limit: 4,
            degree: 4,
            grid_size: 33,
            bounds: BoundOptions::default(),
            endpoints: [-4, -2, -1, 0, 1, 2, 4].iter().map(|&k| rat(k, 1)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakVerdict {
    /// Member at every leaf reached; qualified by grid and degree.
    MemberOnGrid,
    NotCertified,
    DepthExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeCase {
    /// `-1 ∈ M`, so the weak closure is everything.
    Improper,
    /// No eligible bounded coordinate: the weak closure is `M` here.
    NoBoundedElement,
    Fibered,
    DepthExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceNode {
    pub vars: Vec<String>,
    pub generators: Vec<String>,
    pub case: NodeCase,
    pub coordinate: Option<String>,
    pub interval: Option<(String, String)>,
    pub grid: Vec<String>,
    /// Bound and support probe outcomes, in the order tried.
    pub notes: Vec<String>,
    pub leaf_status: Option<MemberStatus>,
    pub children: Vec<(String, TraceNode)>,
    pub verdict: WeakVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakClosureResult {
    pub verdict: WeakVerdict,
    pub degree: u32,
    pub grid_size: usize,
    pub depth_limit: usize,
    /// The coordinate at each node is the lowest-index eligible one; other
    /// choices are not explored.
    pub choice_rule: &'static str,
    pub trace: TraceNode,
}

/// Roots of generators that are linear in `x_i` alone.
fn linear_roots(m: &QuadraticModuleSpec, i: usize) -> Vec<BigRational> {
    let n = m.nvars();
    let xi = Monomial::var(n, i);
    m.generators
        .iter()
        .filter(|g| g.degree() == 1 && g.terms().all(|(mo, _)| mo.is_one() || *mo == xi))
        .filter_map(|g| {
            let c = g.coeff(&xi);
            (!c.is_zero()).then(|| -g.constant_term() / c)
        })
        .collect()
}

/// Tightest certified `[a, b]` for coordinate `i` among the candidate endpoints.
fn coordinate_bounds(
    m: &QuadraticModuleSpec,
    i: usize,
    opts: &WeakClosureOptions,
    notes: &mut Vec<String>,
) -> Result<Option<(BigRational, BigRational)>, FiberError> {
    let name = &m.vars[i];
    let x = QPoly::var_index(m.vars.clone(), i);
    let mut cands = opts.endpoints.clone();
    cands.extend(linear_roots(m, i));
    cands.sort();
    cands.dedup();
    let d = opts.degree;
    let upper_ok = |b: &BigRational| -> Result<bool, QmError> {
        Ok(certify_side(&(-&x).add_constant(b), m, d, &opts.bounds)?.certified())
    };
    let lower_ok =
        |a: &BigRational| -> Result<bool, QmError> { Ok(certify_side(&x.add_constant(&-a), m, d, &opts.bounds)?.certified()) };
    // Constants lie in M, so certification is monotone in each endpoint: test
    // the loosest one first, then tighten.
    let Some(hi) = cands.last() else { return Ok(None) };
    if !upper_ok(hi)? {
        notes.push(format!("{name}: no upper bound <= {hi}"));
        return Ok(None);
    }
    let lo = &cands[0];
    if !lower_ok(lo)? {
        notes.push(format!("{name}: no lower bound >= {lo}"));
        return Ok(None);
    }
    let mut b = hi.clone();
    for c in &cands {
        if c < &b && upper_ok(c)? {
            b = c.clone();
            break;
        }
    }
    let mut a = lo.clone();
    for c in cands.iter().rev() {
        if c > &a && c <= &b && lower_ok(c)? {
            a = c.clone();
            break;
        }
    }
    notes.push(format!("{name}: certified in [{a}, {b}]"));
    Ok(Some((a, b)))
}

/// A coordinate is ineligible when `x_i - λ` is certified in `M ∩ -M` for some
/// probe λ, unless the interval collapses to that λ (then the fibre is a quotient).
fn eligible(
    m: &QuadraticModuleSpec,
    i: usize,
    a: &BigRational,
    b: &BigRational,
    opts: &WeakClosureOptions,
    notes: &mut Vec<String>,
) -> Result<bool, FiberError> {
    if a == b {
        notes.push(format!("{}: collapsed interval, fibre is a quotient", m.vars[i]));
        return Ok(true);
    }
    let x = QPoly::var_index(m.vars.clone(), i);
    let mid = (a + b) / BigRational::from_integer(2.into());
    let cands: Vec<QPoly> = [a.clone(), mid, b.clone()].iter().map(|l| x.add_constant(&-l)).collect();
    let found = support_probe(m, opts.degree, &cands, &opts.bounds.member)?;
    if let Some(h) = found.first() {
        notes.push(format!("{}: {h} lies in the support, not eligible", m.vars[i]));
        return Ok(false);
    }
    notes.push(format!("{}: support probe found nothing, treated as eligible", m.vars[i]));
    Ok(true)
}

fn node(f: &QPoly, m: &QuadraticModuleSpec, depth: usize, opts: &WeakClosureOptions) -> Result<TraceNode, FiberError> {
    let mut t = TraceNode {
        vars: m.vars.to_vec(),
        generators: m.generators.iter().map(|g| g.to_string()).collect(),
        case: NodeCase::NoBoundedElement,
        coordinate: None,
        interval: None,
        grid: Vec::new(),
        notes: Vec::new(),
        leaf_status: None,
        children: Vec::new(),
        verdict: WeakVerdict::NotCertified,
    };
    let minus_one = QPoly::constant(m.vars.clone(), rat(-1, 1));
    let improper = m.generators.iter().any(|g| g.is_constant() && g.constant_term().is_negative())
        || member(&minus_one, m, opts.degree, &opts.bounds.member)?.is_member();
    if improper {
        t.case = NodeCase::Improper;
        t.verdict = WeakVerdict::MemberOnGrid;
        return Ok(t);
    }
    let mut chosen = None;
    for i in 0..m.nvars() {
        if let Some((a, b)) = coordinate_bounds(m, i, opts, &mut t.notes)? {
            if eligible(m, i, &a, &b, opts, &mut t.notes)? {
                chosen = Some((i, a, b));
                break;
            }
        }
    }
    let Some((i, a, b)) = chosen else {
        let r = member(f, m, opts.degree, &opts.bounds.member)?;
        t.leaf_status = Some(r.status);
        t.verdict = if r.is_member() { WeakVerdict::MemberOnGrid } else { WeakVerdict::NotCertified };
        return Ok(t);
    };
    let name = m.vars[i].clone();
    t.coordinate = Some(name.clone());
    t.interval = Some((a.to_string(), b.to_string()));
    if depth >= opts.depth_limit {
        t.case = NodeCase::DepthExhausted;
        t.verdict = WeakVerdict::DepthExhausted;
        return Ok(t);
    }
    t.case = NodeCase::Fibered;
    let decomp = fiber_decompose(m, &name, &a, &b, opts.grid_size)?;
    t.grid = decomp.grid.iter().map(|l| l.to_string()).collect();
    let mut verdict = WeakVerdict::MemberOnGrid;
    for fib in &decomp.fibers {
        let g = f.substitute(&name, &fib.lambda)?;
        let child = node(&g, &fib.spec, depth + 1, opts)?;
        verdict = match (verdict, child.verdict) {
            (WeakVerdict::NotCertified, _) | (_, WeakVerdict::NotCertified) => WeakVerdict::NotCertified,
            (WeakVerdict::DepthExhausted, _) | (_, WeakVerdict::DepthExhausted) => WeakVerdict::DepthExhausted,
            _ => WeakVerdict::MemberOnGrid,
        };
        t.children.push((fib.lambda.to_string(), child));
    }
    t.verdict = verdict;
    Ok(t)
}

/// Recursive weak-closure membership: fibre over the first certified bounded
/// coordinate, stop where none exists and test membership in the module itself.
pub fn weak_closure_member(
    f_test: &QPoly,
    m: &QuadraticModuleSpec,
    opts: &WeakClosureOptions,
) -> Result<WeakClosureResult, FiberError> {
    if opts.grid_size == 0 {
        return Err(FiberError::EmptyGrid);
    }
    let f = if f_test.vars() == &m.vars { f_test.clone() } else { f_test.embed(m.vars.clone())? };
    let trace = node(&f, m, 0, opts)?;
    Ok(WeakClosureResult {
        verdict: trace.verdict,
        degree: opts.degree,
        grid_size: opts.grid_size,
        depth_limit: opts.depth_limit,
        choice_rule: "lowest-index eligible bounded coordinate",
        trace,
    })
}
