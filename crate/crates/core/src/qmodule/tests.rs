use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::*;
use crate::coneengine::SeqVerdict;
use crate::polyring::{monomial_basis, rat, Monomial};

fn poly(m: &QuadraticModuleSpec, s: &str) -> QPoly {
    parse_polynomial(s, Some(m.vars.clone())).unwrap()
}

fn module(vars: &[&str], gens: &[&str]) -> QuadraticModuleSpec {
    QuadraticModuleSpec::parse(vars, gens, ModuleKind::QuadraticModule).unwrap()
}

fn opts() -> MemberOptions {
    MemberOptions::default()
}

/// Exact re-expansion done here, independent of the library's residual.
fn assert_certificate(c: &MembershipCertificate, f: &QPoly) {
    let diff = f - &c.expand();
    let worst = diff.terms().map(|(_, v)| v.clone()).fold(0.0f64, |a, v| a.max(num_traits::ToPrimitive::to_f64(&v).unwrap().abs()));
    assert!(worst <= c.tol_feas, "residual {worst}");
    for b in c.blocks.iter().filter(|b| !b.basis.is_empty()) {
        let g = b.gram_f64();
        let eig = g.symmetric_eigen().eigenvalues.min();
        assert!(eig >= -c.tol_psd, "eigenvalue {eig}");
    }
}

/// Moment matrix `[L(m_r m_c)]` built directly from the values.
fn hankel(l: &PseudoMoments, half: u32) -> DMatrix<f64> {
    let basis = monomial_basis(l.vars.len(), half);
    DMatrix::from_fn(basis.len(), basis.len(), |r, c| *l.values.get(&basis[r].mul(&basis[c])).unwrap_or(&0.0))
}

#[test]
fn one_is_a_member() {
    let m = module(&["x"], &["x"]);
    let r = member(&QPoly::one(m.vars.clone()), &m, 2, &opts()).unwrap();
    assert_eq!(r.status, MemberStatus::Member);
    assert_certificate(r.certificate.as_ref().unwrap(), &QPoly::one(m.vars.clone()));
}

#[test]
fn interval_product_is_a_member() {
    let m = module(&["x"], &["x", "1 - x"]);
    let f = poly(&m, "x*(1 - x)");
    // x²(1 - x) + x(1 - x)² = x(1 - x)
    let lhs = &(&poly(&m, "x^2") * &poly(&m, "1 - x")) + &(&poly(&m, "(1 - x)^2") * &poly(&m, "x"));
    assert_eq!(lhs, f);
    let r = member(&f, &m, 3, &opts()).unwrap();
    assert!(r.is_member(), "{:?}", r.reason);
    assert_certificate(r.certificate.as_ref().unwrap(), &f);
    // Monotone in the degree.
    for d in [4, 5] {
        assert!(member(&f, &m, d, &opts()).unwrap().is_member());
    }
}

#[test]
fn couex_x_is_infeasible_at_every_tested_degree() {
    let n = example_couex();
    let x = poly(&n, "x");
    for d in [4, 6, 8] {
        let r = member(&x, &n, d, &opts()).unwrap();
        assert_eq!(r.status, MemberStatus::InfeasibleAtD, "d = {d}");
        let l = r.dual.unwrap();
        let margin = verify_separation(&l, &n, &x, d, 1e-6).unwrap();
        assert!(margin.is_some(), "dual ray does not separate at d = {d}");
        // Moment matrix PSD, checked from the raw values.
        let eig = hankel(&l, d / 2).symmetric_eigen().eigenvalues.min();
        assert!(eig >= -1e-6);
        assert!(*l.values.get(&Monomial::var(2, 0)).unwrap_or(&0.0) < 0.0);
    }
}

#[test]
fn motzkin_is_not_sos() {
    let m = QuadraticModuleSpec::qm(crate::polyring::var_list(["x", "y"]), vec![]).unwrap();
    let f = poly(&m, "x^4*y^2 + x^2*y^4 - 3*x^2*y^2 + 1");
    let r = member(&f, &m, 6, &opts()).unwrap();
    assert_eq!(r.status, MemberStatus::InfeasibleAtD);
    let l = r.dual.unwrap();
    let eig = hankel(&l, 3).symmetric_eigen().eigenvalues.min();
    let lf: f64 = f.terms().map(|(mono, c)| num_traits::ToPrimitive::to_f64(c).unwrap() * l.values.get(mono).unwrap_or(&0.0)).sum();
    assert!(eig >= -1e-6, "moment matrix eigenvalue {eig}");
    assert!(lf < 0.0, "L(f) = {lf}");
}

#[test]
fn seq_member_on_existing_member() {
    let m = module(&["x"], &["x", "1 - x"]);
    let f = poly(&m, "x*(1 - x)");
    let sched = [rat(1, 1), rat(1, 10), rat(1, 100)];
    let r = seq_member(&f, &m, 4, 2, &sched, &opts()).unwrap();
    assert_eq!(r.verdict, SeqVerdict::InClosure);
    assert_eq!(r.per_eps.len(), 3);
}

#[test]
fn seq_member_cubic_generator_threshold() {
    // At d = 4: σ₁ is a constant c and σ₀ has zero x⁴ coefficient, so σ₀ is
    // quadratic, c = 0, and x + ε(1 + x²) must itself be SOS: εx² + x + ε >= 0
    // iff 4ε² >= 1.
    let m = module(&["x"], &["x^3"]);
    let f = poly(&m, "x");
    let oracle = |eps: &BigRational| eps * eps * rat(4, 1) >= BigRational::one();
    for eps in [rat(1, 4), rat(1, 3), rat(1, 1), rat(2, 1)] {
        let r = seq_member(&f, &m, 4, 1, std::slice::from_ref(&eps), &opts()).unwrap();
        let got = r.per_eps[0].1.is_member();
        assert_eq!(got, oracle(&eps), "ε = {eps}");
        if !got {
            assert_eq!(r.verdict, SeqVerdict::NotDetected);
        }
    }
}

#[test]
fn seq_member_rejects_small_exponent() {
    let m = module(&["x"], &["x"]);
    let f = poly(&m, "x^3");
    assert!(matches!(seq_member(&f, &m, 4, 1, &[rat(1, 2)], &opts()), Err(QmError::Precondition(_))));
}

#[test]
fn ball_perturbations_are_members() {
    let m = ball(2);
    let f = poly(&m, "1 - x1");
    for eps in [rat(1, 10), rat(1, 100)] {
        let g = f.add_constant(&eps);
        let r = member(&g, &m, 2, &opts()).unwrap();
        assert!(r.is_member(), "ε = {eps}");
        assert_certificate(r.certificate.as_ref().unwrap(), &g);
    }
}

#[test]
fn pos_semiordering_examples() {
    let m = module(&["x"], &["x", "1 - x"]);
    let r = pos_semiordering(&QPoly::one(m.vars.clone()), &m, 1, 2, &opts()).unwrap();
    assert_eq!(r.status, MemberStatus::Member);

    // p = 1, q = x - x² = x(1 - x) ∈ M.
    let x = poly(&m, "x");
    let r = pos_semiordering(&x, &m, 1, 4, &opts()).unwrap();
    assert_eq!(r.status, MemberStatus::Member, "{:?}", r.reason);
    let c = r.certificate.unwrap();
    let identity = &(&c.p_poly() * &x) - &(&x.pow(2) + &c.q_poly());
    assert!(num_traits::ToPrimitive::to_f64(&identity.max_abs_coeff()).unwrap() <= 1e-8);

    // ℓ = 2, f = x: M = QM(4 - x²), 4(4 - x²) - (4 - x²)² = x²(4 - x²).
    let m = module(&["x"], &["4 - x^2"]);
    let g = poly(&m, "4 - x^2");
    let r = pos_semiordering(&g, &m, 1, 4, &opts()).unwrap();
    assert_eq!(r.status, MemberStatus::Member);
    let found = pos_semiordering_search(&g, &m, 3, 4, &opts()).unwrap();
    assert_eq!(found.exponent, 1);
}

#[test]
fn pos_semiordering_degree_overflow() {
    let m = module(&["x"], &["x"]);
    let x = poly(&m, "x");
    assert!(matches!(pos_semiordering(&x, &m, 2, 3, &opts()), Err(QmError::DegreeTooHigh { .. })));
}

#[test]
fn bounded_powers_expand_exactly() {
    let vars = crate::polyring::var_list(["x"]);
    let p = QPoly::one(vars.clone());
    let x = QPoly::var_index(vars.clone(), 0);
    let q = (-&x.pow(2)).add_constant(&rat(3, 1));
    let certs = bounded_power_certificates(&p, &q, &x, &rat(2, 1), 3).unwrap();
    assert_eq!(certs.len(), 6);
    for c in &certs {
        assert_eq!(c.expand(&p, &q), c.target);
    }
    // A_2 = 16 - x⁴ = 4(4 - x²) + x²(4 - x²).
    let a2 = certs.iter().find(|c| c.i == 2 && c.claim == 1).unwrap();
    assert_eq!(a2.target, (-&x.pow(4)).add_constant(&rat(16, 1)));
    let by_hand = &(&(-&x.pow(2)).add_constant(&rat(4, 1)) * &x.pow(2).add_constant(&rat(4, 1)));
    assert_eq!(&a2.target, by_hand);
    // B_1 = ℓ⁴p - f² = ℓ²(ℓ²p - f²p) + f²(ℓ²p - 1).
    let b1 = certs.iter().find(|c| c.i == 1 && c.claim == 2).unwrap();
    assert_eq!(b1.target, (-&x.pow(2)).add_constant(&rat(16, 1)));

    // ℓ = 1, q = -x²: A_1 = 1 - x².
    let q1 = -&x.pow(2);
    let certs = bounded_power_certificates(&p, &q1, &x, &rat(1, 1), 1).unwrap();
    assert_eq!(certs[0].target, q1.add_constant(&rat(1, 1)));

    assert!(bounded_power_certificates(&p, &q, &x, &rat(3, 1), 1).is_err());
}

#[test]
fn archimedean_probes() {
    let m = ball(2);
    match archimedean_probe(&m, &[rat(1, 1)], 2, &opts()).unwrap() {
        ArchimedeanStatus::Certified { k, certificate } => {
            assert_eq!(k, rat(1, 1));
            assert_certificate(&certificate, &poly(&m, "1 - x1^2 - x2^2"));
        }
        other => panic!("{other:?}"),
    }
    // Box [1, 3]²: 10 - x² = 2(x - 1)(3 - x) + (x - 4)², so k = 20 certifies.
    let b = module(&["x1", "x2"], &["x1 - 1", "x2 - 1", "(x1 - 1)*(3 - x1)", "(x2 - 1)*(3 - x2)"]);
    match archimedean_probe(&b, &[rat(20, 1), rat(100, 1)], 2, &opts()).unwrap() {
        ArchimedeanStatus::Certified { k, certificate } => {
            let target = poly(&b, "-x1^2 - x2^2").add_constant(&k);
            assert_certificate(&certificate, &target);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn example_3_3_is_not_certified_archimedean() {
    let m = example_3_3(2, rat(1, 1));
    for d in [2, 4, 6] {
        let s = archimedean_probe(&m, &[rat(1, 1), rat(10, 1), rat(100, 1)], d, &opts()).unwrap();
        assert!(matches!(s, ArchimedeanStatus::Unknown { .. }), "d = {d}");
    }
}

#[test]
fn support_and_stable_closure() {
    let m = module(&["x"], &["x", "-x"]);
    assert_eq!(support_probe(&m, 2, &[poly(&m, "x")], &opts()).unwrap().len(), 1);

    let m = module(&["x", "y"], &["x^2 + y^2", "-(x^2 + y^2)"]);
    let got = support_probe(&m, 2, &[poly(&m, "x^2 + y^2"), poly(&m, "x")], &opts()).unwrap();
    assert_eq!(got, vec![poly(&m, "x^2 + y^2")]);

    let m = module(&["x"], &["-x^2"]);
    assert_eq!(stable_closure(&m, &[]).unwrap(), m);
    let s = stable_closure(&m, &[poly(&m, "x")]).unwrap();
    assert_eq!(s.generators, vec![poly(&m, "-x^2"), poly(&m, "x"), poly(&m, "-x")]);
    assert!(member(&poly(&m, "x"), &s, 2, &opts()).unwrap().is_member());
}

#[test]
fn polyhedral_stability() {
    let q = module(&["x", "y"], &["x", "y"]);
    let r = poly_stability(&q, &[]).unwrap();
    assert_eq!(r.status, StabilityStatus::Stable);
    let d = r.direction.unwrap();
    assert!(d.iter().all(|v| *v > BigRational::zero()));

    let r = poly_stability(&module(&["x", "y"], &["x", "-x", "y"]), &[]).unwrap();
    assert_eq!(r.status, StabilityStatus::Stable);
    assert_eq!(r.equalities, vec![0, 1]);

    let r = poly_stability(&module(&["x", "y"], &["x", "1 - x", "y"]), &[]).unwrap();
    assert_eq!(r.status, StabilityStatus::HypothesisFailed);
    let w = r.witness.unwrap();
    assert_eq!(w.form, QPoly::var_index(q.vars.clone(), 0));
    assert_eq!((w.lower, w.upper), (rat(0, 1), rat(1, 1)));

    let r = poly_stability(&module(&["x"], &["x^2"]), &[]).unwrap();
    assert_eq!(r.status, StabilityStatus::NotApplicable);
    let r = poly_stability(&module(&["x"], &["x - 1", "-x"]), &[]).unwrap();
    assert_eq!(r.status, StabilityStatus::Empty);

    // A user form bounded on a strip.
    let s = module(&["x", "y"], &["x + y", "1 - x - y"]);
    let r = poly_stability(&s, &[]).unwrap();
    assert_eq!(r.status, StabilityStatus::HypothesisFailed);
}

#[test]
fn moment_checks() {
    let m = module(&["x"], &["x", "1 - x"]);
    let dirac = PseudoMoments::dirac(m.vars.clone(), 4, &[0.5]);
    assert!(dual_moment_check(&dirac, &m, 2, 1e-9).unwrap().passed());

    let mut vals = BTreeMap::new();
    vals.insert(Monomial::one(1), 1.0);
    vals.insert(Monomial::new(vec![2]), -1.0);
    let bad = PseudoMoments::new(m.vars.clone(), 2, vals);
    let free = module(&["x"], &[]);
    match dual_moment_check(&bad, &free, 1, 1e-9).unwrap() {
        MomentCheck::PsdFail(w) => assert!(w.value < 0.0),
        other => panic!("{other:?}"),
    }

    // Lebesgue measure on [0, 1]: L(x^k) = 1/(k+1).
    let vals = (0..=4u32).map(|k| (Monomial::new(vec![k]), 1.0 / (k as f64 + 1.0))).collect();
    let leb = PseudoMoments::new(m.vars.clone(), 4, vals);
    assert!(dual_moment_check(&leb, &m, 2, 1e-9).unwrap().passed());
    assert!(dual_moment_check(&leb, &m, 3, 1e-9).is_err());
}

#[test]
fn duality_consistency() {
    let m = module(&["x"], &["x", "1 - x"]);
    let f = poly(&m, "x*(1 - x)");
    assert!(member(&f, &m, 4, &opts()).unwrap().is_member());
    for t in [0.0, 0.2, 0.7, 1.0] {
        let l = PseudoMoments::dirac(m.vars.clone(), 4, &[t]);
        assert!(dual_moment_check(&l, &m, 2, 1e-9).unwrap().passed());
        assert!(l.apply(&f).unwrap() >= -1e-9 * num_traits::ToPrimitive::to_f64(&f.l1_norm()).unwrap());
    }
}

#[test]
fn preordering_matches_explicit_products() {
    let pre = QuadraticModuleSpec::parse(&["x", "y"], &["x", "y", "1 - x - y"], ModuleKind::Preordering).unwrap();
    let expl = pre.expand_preordering(4);
    assert_eq!(expl.generators.len(), 7);
    for s in ["x*y", "x*y*(1 - x - y)", "1 - x", "x - y", "x^2*y + 1/10", "-x*y"] {
        let f = poly(&pre, s);
        let a = member(&f, &pre, 4, &opts()).unwrap().status;
        let b = member(&f, &expl, 4, &opts()).unwrap().status;
        assert_eq!(a, b, "{s}");
    }
}

#[test]
fn named_instances_and_json() {
    let m = example_3_4(3, rat(1, 2));
    assert_eq!(m.generators.len(), 3 + 1 + 2);
    assert_eq!(m.generators[5], poly(&m, "x1*x2*x3^2"));
    let m33 = example_3_3(2, rat(1, 1));
    assert_eq!(m33.generators[2], poly(&m33, "1 - x1*x2"));
    assert_eq!(example_4_2().multipliers(8).len(), 2);

    let j = serde_json::to_string(&example_couex().to_json()).unwrap();
    let back: ModuleJson = serde_json::from_str(&j).unwrap();
    assert_eq!(QuadraticModuleSpec::from_json(&back).unwrap(), example_couex());
    assert!(serde_json::from_str::<ModuleJson>(r#"{"vars":["x"],"kind":"cone","generators":[]}"#).is_err());
}

#[test]
fn degree_overflow() {
    let m = module(&["x"], &["x"]);
    assert!(matches!(member(&poly(&m, "x^5"), &m, 4, &opts()), Err(QmError::DegreeTooHigh { .. })));
    let big = MemberOptions { max_basis: 2, ..opts() };
    assert!(matches!(member(&poly(&m, "x"), &m, 4, &big), Err(QmError::TooLarge { .. })));
}
