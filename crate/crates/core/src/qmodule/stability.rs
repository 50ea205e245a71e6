//! Stability for modules generated by polynomials of degree at most one,
//! decided with exact LPs over `K_M`.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use super::{QPoly, QmError, QuadraticModuleSpec};
use crate::numkernel::{lp_feasible, strict_positive_direction, LpProblem, LpSolution, Relation};
use crate::polyring::Monomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityStatus {
    Stable,
    HypothesisFailed,
    NotApplicable,
    /// `K_M` is empty.
    Empty,
}

impl StabilityStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityStatus::Stable => "stable",
            StabilityStatus::HypothesisFailed => "hypothesis_failed",
            StabilityStatus::NotApplicable => "not_applicable",
            StabilityStatus::Empty => "empty",
        }
    }
}

/// A non-constant linear form with `lower <= form <= upper` on `K_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedWitness {
    pub form: QPoly,
    pub lower: BigRational,
    pub upper: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub status: StabilityStatus,
    pub base_point: Option<Vec<BigRational>>,
    /// Generators vanishing identically on `K_M`; they lie in `M ∩ -M`.
    pub equalities: Vec<usize>,
    /// Direction on which every other non-constant generator is strictly increasing.
    pub direction: Option<Vec<BigRational>>,
    pub witness: Option<BoundedWitness>,
    /// Farkas data when the LP for the direction is infeasible.
    pub gordan: Option<Vec<BigRational>>,
    pub reason: String,
}

impl StabilityReport {
    fn new(status: StabilityStatus, reason: impl Into<String>) -> Self {
        StabilityReport {
            status,
            base_point: None,
            equalities: Vec::new(),
            direction: None,
            witness: None,
            gordan: None,
            reason: reason.into(),
        }
    }

    pub fn to_json(&self) -> Value {
        let vec = |v: &Option<Vec<BigRational>>| v.as_ref().map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>());
        json!({
            "status": self.status.as_str(),
            "base_point": vec(&self.base_point),
            "equalities": self.equalities,
            "direction": vec(&self.direction),
            "witness": self.witness.as_ref().map(|w| json!({
                "form": w.form.to_string(),
                "lower": w.lower.to_string(),
                "upper": w.upper.to_string(),
            })),
            "gordan": vec(&self.gordan),
            "reason": self.reason,
        })
    }
}

struct Region {
    n: usize,
    /// `(a, b)` for each generator `a·x + b >= 0`.
    gens: Vec<(Vec<BigRational>, BigRational)>,
}

impl Region {
    fn lp(&self) -> LpProblem<BigRational> {
        let mut lp = LpProblem::with_free_vars(self.n);
        for (a, b) in &self.gens {
            lp.add_row(a.clone(), Relation::Ge, -b);
        }
        lp
    }

    /// Exact `min a·x` over the region, `None` when unbounded below.
    fn minimum(&self, a: &[BigRational]) -> Option<BigRational> {
        let mut lp = self.lp();
        lp.set_objective(a.to_vec());
        match lp.solve() {
            LpSolution::Feasible { value, .. } => value,
            _ => None,
        }
    }

    fn range(&self, a: &[BigRational]) -> (Option<BigRational>, Option<BigRational>) {
        let neg: Vec<BigRational> = a.iter().map(|x| -x).collect();
        (self.minimum(a), self.minimum(&neg).map(|v| -v))
    }
}

fn linear_parts(p: &QPoly, n: usize) -> Vec<BigRational> {
    (0..n).map(|i| p.coeff(&Monomial::var(n, i))).collect()
}

fn linear_form(m: &QuadraticModuleSpec, a: &[BigRational]) -> QPoly {
    let mut p = QPoly::zero(m.vars.clone());
    for (i, c) in a.iter().enumerate() {
        if !c.is_zero() {
            p.add_term(Monomial::var(a.len(), i), c.clone());
        }
    }
    p
}

/// Decides stability of a module generated by linear polynomials. `probes` are
/// extra linear forms checked for boundedness on `K_M`, on top of the
/// coordinates and the generators.
pub fn poly_stability(m: &QuadraticModuleSpec, probes: &[QPoly]) -> Result<StabilityReport, QmError> {
    if let Some(g) = m.generators.iter().find(|g| g.degree() > 1) {
        return Ok(StabilityReport::new(StabilityStatus::NotApplicable, format!("generator {g} has degree > 1")));
    }
    let n = m.nvars();
    let gens: Vec<_> = m.generators.iter().map(|g| (linear_parts(g, n), g.constant_term())).collect();
    let region = Region { n, gens };

    let base = match lp_feasible(&region.lp()) {
        LpSolution::Infeasible { .. } => return Ok(StabilityReport::new(StabilityStatus::Empty, "K_M is empty")),
        sol => sol.point().expect("feasible").to_vec(),
    };

    // A generator with maximum zero on K_M is an implicit equality.
    let mut equalities = Vec::new();
    for (i, (a, b)) in region.gens.iter().enumerate() {
        if let (_, Some(hi)) = region.range(a) {
            if (hi + b).is_zero() {
                equalities.push(i);
            }
        }
    }

    let mut forms: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::from_integer(1.into()) } else { BigRational::zero() }).collect())
        .collect();
    forms.extend(region.gens.iter().map(|(a, _)| a.clone()));
    for p in probes {
        if p.degree() > 1 {
            return Err(QmError::Precondition(format!("probe {p} is not linear")));
        }
        let p = if p.vars() == &m.vars { p.clone() } else { p.embed(m.vars.clone())? };
        forms.push(linear_parts(&p, n));
    }
    let mut constant_forms = vec![false; region.gens.len()];
    for (k, a) in forms.iter().enumerate() {
        if a.iter().all(Zero::is_zero) {
            continue;
        }
        let (lo, hi) = region.range(a);
        if let (Some(lo), Some(hi)) = (lo, hi) {
            if lo < hi {
                let mut r = StabilityReport::new(
                    StabilityStatus::HypothesisFailed,
                    "a non-constant linear form is bounded on K_M",
                );
                r.base_point = Some(base);
                r.equalities = equalities;
                r.witness = Some(BoundedWitness { form: linear_form(m, a), lower: lo, upper: hi });
                return Ok(r);
            }
            if k >= n && k < n + region.gens.len() {
                constant_forms[k - n] = true;
            }
        }
    }

    let mut strict = Vec::new();
    let mut strict_idx = Vec::new();
    let mut equal = Vec::new();
    for (i, (a, _)) in region.gens.iter().enumerate() {
        if a.iter().all(Zero::is_zero) {
            continue;
        }
        if equalities.contains(&i) || constant_forms[i] {
            equal.push(a.clone());
        } else {
            strict.push(a.clone());
            strict_idx.push(i);
        }
    }
    let mut report = StabilityReport::new(StabilityStatus::Stable, "");
    report.base_point = Some(base);
    report.equalities = equalities;
    match strict_positive_direction(&strict, &equal, n) {
        Ok(d) => {
            report.reason = "non-constant generators admit a common strictly increasing direction".into();
            report.direction = Some(d);
        }
        Err(lambda) => {
            let i = lambda.iter().position(|l| l.is_positive()).expect("Gordan multipliers are nonzero");
            let a = &strict[i];
            let (lo, hi) = region.range(a);
            report.status = StabilityStatus::HypothesisFailed;
            report.reason = format!("generator {} is bounded on K_M", strict_idx[i]);
            report.gordan = Some(lambda.clone());
            report.witness = match (lo, hi) {
                (Some(lower), Some(upper)) => Some(BoundedWitness { form: linear_form(m, a), lower, upper }),
                _ => None,
            };
        }
    }
    Ok(report)
}
