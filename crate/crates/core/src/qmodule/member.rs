use num_rational::BigRational;
use serde::Serialize;

use super::gram::{CertBlock, GramOutcome, GramSystem, MembershipCertificate};
use super::{sum_of_squares_of_vars, MemberOptions, PseudoMoments, QPoly, QmError, QuadraticModuleSpec};
use crate::coneengine::SeqVerdict;
use crate::polyring::perturber;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberStatus {
    Member,
    NoCertificateAtD,
    InfeasibleAtD,
}

#[derive(Debug, Clone)]
pub struct MemberResult {
    pub status: MemberStatus,
    pub degree: u32,
    pub certificate: Option<MembershipCertificate>,
    /// Separating pseudo-moments when infeasible at this degree.
    pub dual: Option<PseudoMoments>,
    pub margin: Option<f64>,
    pub reason: Option<String>,
}

impl MemberResult {
    fn from_outcome(outcome: GramOutcome, degree: u32) -> Self {
        match outcome {
            GramOutcome::Certified(c) => MemberResult {
                status: MemberStatus::Member,
                degree,
                certificate: Some(c),
                dual: None,
                margin: None,
                reason: None,
            },
            GramOutcome::Infeasible { moments, margin } => MemberResult {
                status: MemberStatus::InfeasibleAtD,
                degree,
                certificate: None,
                dual: Some(moments),
                margin: Some(margin),
                reason: None,
            },
            GramOutcome::NoCertificate { reason } => MemberResult {
                status: MemberStatus::NoCertificateAtD,
                degree,
                certificate: None,
                dual: None,
                margin: None,
                reason: Some(reason),
            },
        }
    }

    pub fn is_member(&self) -> bool {
        self.status == MemberStatus::Member
    }
}

fn over_module_vars(f: &QPoly, m: &QuadraticModuleSpec) -> Result<QPoly, QmError> {
    Ok(if f.vars() == &m.vars { f.clone() } else { f.embed(m.vars.clone())? })
}

/// Searches `f = σ_0 + Σ σ_i g_i` with every term of degree `<= d`.
pub fn member(f: &QPoly, m: &QuadraticModuleSpec, d: u32, opts: &MemberOptions) -> Result<MemberResult, QmError> {
    let f = over_module_vars(f, m)?;
    let mut sys = GramSystem::new(m.vars.clone(), f, d)?;
    for g in m.multipliers(d) {
        sys.add_block(g, 1, opts.max_basis)?;
    }
    Ok(MemberResult::from_outcome(sys.solve(opts)?, d))
}

#[derive(Debug, Clone)]
pub struct SeqMemberResult {
    pub verdict: SeqVerdict,
    pub exponent: u32,
    pub per_eps: Vec<(BigRational, MemberResult)>,
}

/// `member(f + ε (1 + Σ x_i²)^e)` for each ε in the schedule. One-sided.
pub fn seq_member(
    f: &QPoly,
    m: &QuadraticModuleSpec,
    d: u32,
    e: u32,
    schedule: &[BigRational],
    opts: &MemberOptions,
) -> Result<SeqMemberResult, QmError> {
    let f = over_module_vars(f, m)?;
    if 2 * e <= f.degree() {
        return Err(QmError::Precondition(format!("2e = {} must exceed deg f = {}", 2 * e, f.degree())));
    }
    if 2 * e > d {
        return Err(QmError::DegreeTooHigh { what: "perturber".into(), degree: 2 * e, limit: d });
    }
    let q: QPoly = perturber(m.vars.clone(), e);
    let mut verdict = SeqVerdict::InClosure;
    let mut per_eps = Vec::with_capacity(schedule.len());
    for eps in schedule {
        let r = member(&(&f + &q.scale(eps)), m, d, opts)?;
        match r.status {
            MemberStatus::Member => {}
            MemberStatus::InfeasibleAtD => verdict = SeqVerdict::NotDetected,
            MemberStatus::NoCertificateAtD if verdict == SeqVerdict::InClosure => verdict = SeqVerdict::Inconclusive,
            MemberStatus::NoCertificateAtD => {}
        }
        per_eps.push((eps.clone(), r));
    }
    Ok(SeqMemberResult { verdict, exponent: e, per_eps })
}

/// `p · f = f^{2m} + q` with `p` SOS and `q ∈ M`.
#[derive(Debug, Clone)]
pub struct PosYCertificate {
    pub exponent: u32,
    pub p: CertBlock,
    /// Blocks of `q`, stored with sign `-1` as they enter `p·f - q`.
    pub q: Vec<CertBlock>,
    pub residual: f64,
    pub inner: MembershipCertificate,
}

impl PosYCertificate {
    pub fn p_poly(&self) -> QPoly {
        let mut b = self.p.clone();
        b.multiplier = QPoly::one(b.multiplier.vars().clone());
        b.expand()
    }

    pub fn q_poly(&self) -> QPoly {
        self.q.iter().fold(QPoly::zero(self.p.multiplier.vars().clone()), |acc, b| &acc - &b.expand())
    }
}

#[derive(Debug, Clone)]
pub struct PosYResult {
    pub status: MemberStatus,
    pub exponent: u32,
    pub certificate: Option<PosYCertificate>,
    pub reason: Option<String>,
}

/// Searches the Positivstellensatz identity for a fixed exponent `m`.
pub fn pos_semiordering(
    f: &QPoly,
    m: &QuadraticModuleSpec,
    exponent: u32,
    d: u32,
    opts: &MemberOptions,
) -> Result<PosYResult, QmError> {
    let f = over_module_vars(f, m)?;
    let target = f.pow(2 * exponent);
    if target.degree() > d {
        return Err(QmError::DegreeTooHigh { what: "f^(2m)".into(), degree: target.degree(), limit: d });
    }
    let mut sys = GramSystem::new(m.vars.clone(), target, d)?;
    if !sys.add_block(f.clone(), 1, opts.max_basis)? {
        return Err(QmError::DegreeTooHigh { what: "f".into(), degree: f.degree(), limit: d });
    }
    for g in m.multipliers(d) {
        sys.add_block(g, -1, opts.max_basis)?;
    }
    let r = MemberResult::from_outcome(sys.solve(opts)?, d);
    let certificate = r.certificate.map(|c| PosYCertificate {
        exponent,
        p: c.blocks[0].clone(),
        q: c.blocks[1..].to_vec(),
        residual: c.residual,
        inner: c,
    });
    Ok(PosYResult { status: r.status, exponent, certificate, reason: r.reason })
}

/// Tries `m = 1..=m_max`, skipping exponents whose target exceeds `d`.
pub fn pos_semiordering_search(
    f: &QPoly,
    m: &QuadraticModuleSpec,
    m_max: u32,
    d: u32,
    opts: &MemberOptions,
) -> Result<PosYResult, QmError> {
    let mut last = None;
    for e in 1..=m_max {
        if f.degree() * 2 * e > d {
            break;
        }
        let r = pos_semiordering(f, m, e, d, opts)?;
        if r.status == MemberStatus::Member {
            return Ok(r);
        }
        last = Some(r);
    }
    last.ok_or_else(|| QmError::DegreeTooHigh { what: "f^2".into(), degree: 2 * f.degree(), limit: d })
}

#[derive(Debug, Clone)]
pub enum ArchimedeanStatus {
    /// `k - Σ x_i² ∈ M` with a verified certificate.
    Certified { k: BigRational, certificate: MembershipCertificate },
    /// No certificate for any `k` tried; says nothing about non-archimedeanity.
    Unknown { tried: Vec<(BigRational, MemberStatus)> },
}

pub fn archimedean_probe(
    m: &QuadraticModuleSpec,
    k_schedule: &[BigRational],
    d: u32,
    opts: &MemberOptions,
) -> Result<ArchimedeanStatus, QmError> {
    let s = sum_of_squares_of_vars(&m.vars);
    let mut tried = Vec::new();
    for k in k_schedule {
        let r = member(&(-&s).add_constant(k), m, d, opts)?;
        if let Some(certificate) = r.certificate {
            return Ok(ArchimedeanStatus::Certified { k: k.clone(), certificate });
        }
        tried.push((k.clone(), r.status));
    }
    Ok(ArchimedeanStatus::Unknown { tried })
}

/// Candidates `h` with both `h` and `-h` certified in `M` at degree `d`.
pub fn support_probe(
    m: &QuadraticModuleSpec,
    d: u32,
    candidates: &[QPoly],
    opts: &MemberOptions,
) -> Result<Vec<QPoly>, QmError> {
    let mut out = Vec::new();
    for h in candidates {
        if member(h, m, d, opts)?.is_member() && member(&-h, m, d, opts)?.is_member() {
            out.push(h.clone());
        }
    }
    Ok(out)
}

/// `M + (radical_gens)`, written as the module with `±h` added for each `h`.
pub fn stable_closure(m: &QuadraticModuleSpec, radical_gens: &[QPoly]) -> Result<QuadraticModuleSpec, QmError> {
    let mut gens = m.generators.clone();
    for h in radical_gens {
        let h = over_module_vars(h, m)?;
        gens.push(h.clone());
        gens.push(-h);
    }
    QuadraticModuleSpec::new(m.vars.clone(), gens, m.kind)
}
