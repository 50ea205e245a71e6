use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use super::*;

type Q = BigRational;

fn p(text: &str, vars: &VarList) -> Polynomial<Q> {
    parse_polynomial(text, Some(vars.clone())).unwrap()
}

#[test]
fn difference_of_squares_and_annihilator() {
    let v = var_list(["x"]);
    assert_eq!(&p("x+1", &v) * &p("x-1", &v), p("x^2-1", &v));
    assert!((&p("x^3+2", &v) * &Polynomial::zero(v.clone())).is_zero());
}

#[test]
fn bernstein_style_identity() {
    // x^2(1-x) + x(1-x)^2 expanded by hand: x^2 - x^3 + x - 2x^2 + x^3 = x - x^2
    let v = var_list(["x"]);
    let lhs = &(&p("x^2", &v) * &p("1-x", &v)) + &(&p("x", &v) * &p("1-x", &v).pow(2));
    let expected = Polynomial::from_terms(v.clone(), [(vec![1], rat(1, 1)), (vec![2], rat(-1, 1))]).unwrap();
    assert_eq!(lhs, expected);
    assert_eq!(lhs, p("x*(1-x)", &v));
}

#[test]
fn mismatched_variables_error() {
    let a = p("x", &var_list(["x"]));
    let b = p("y", &var_list(["y"]));
    assert!(matches!(a.checked_add(&b), Err(PolyError::VariableMismatch { .. })));
    assert!(a.checked_mul(&b).is_err());
}

#[test]
fn substitution_examples() {
    let v = var_list(["x1", "x2"]);
    let s = p("x1*x2^2", &v).substitute("x1", &rat(2, 1)).unwrap();
    assert_eq!(s, p("2*x2^2", &var_list(["x2"])));
    let z = p("1-x1", &v).substitute("x1", &rat(1, 1)).unwrap();
    assert!(z.is_zero());
    assert!(matches!(p("x1", &v).substitute("x9", &rat(0, 1)), Err(PolyError::UnknownVariable(_))));
}

#[test]
fn zero_fiber_of_product_minus_constant_is_negative() {
    // prod x_i - c at x1 = 0 collapses to -c
    let v = indexed_vars("x", 3);
    let c = rat(1, 4);
    let g = &p("x1*x2*x3", &v) - &Polynomial::constant(v.clone(), c.clone());
    let fiber = g.substitute("x1", &Q::zero()).unwrap();
    assert!(fiber.is_constant());
    assert_eq!(fiber.constant_term(), -c);
}

#[test]
fn basis_examples() {
    let b = monomial_basis(2, 1);
    assert_eq!(b, vec![Monomial::new(vec![0, 0]), Monomial::new(vec![1, 0]), Monomial::new(vec![0, 1])]);
    let b = monomial_basis(1, 4);
    assert_eq!(b.iter().map(|m| m.exps()[0]).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    assert_eq!(monomial_basis(3, 2).len(), 10);
    assert_eq!(monomial_count(3, 2), 10);
    // graded order within degree 2
    let b = monomial_basis(2, 2);
    assert_eq!(b[3].exps(), &[2, 0]);
    assert_eq!(b[4].exps(), &[1, 1]);
    assert_eq!(b[5].exps(), &[0, 2]);
    assert!(b.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn basis_counts_match_binomials() {
    for n in 1..5 {
        for d in 0..6 {
            assert_eq!(monomial_basis(n, d).len(), monomial_count(n, d), "n={n} d={d}");
        }
    }
    assert_eq!(monomial_basis(0, 3), vec![Monomial::new(vec![])]);
}

#[test]
fn perturber_examples() {
    let v1 = var_list(["x"]);
    assert_eq!(perturber::<Q>(v1.clone(), 1), p("1+x^2", &v1));
    assert_eq!(perturber::<Q>(v1.clone(), 2), p("1+2*x^2+x^4", &v1));
    let v2 = var_list(["x", "y"]);
    assert_eq!(perturber::<Q>(v2.clone(), 1), p("1+x^2+y^2", &v2));
}

#[test]
fn display_is_parseable() {
    let v = var_list(["x", "y"]);
    let q = p("3/4*x^2*y - x + 2", &v);
    assert_eq!(q.to_string(), "3/4*x^2*y - x + 2");
    assert_eq!(parse_polynomial(&q.to_string(), Some(v)).unwrap(), q);
}

/// Nested Horner evaluation over the first variable, written independently of `eval`.
fn horner(poly: &Polynomial<f64>, point: &[f64]) -> f64 {
    if poly.nvars() == 0 {
        return poly.constant_term();
    }
    let maxe = poly.terms().map(|(m, _)| m.exps()[0]).max().unwrap_or(0);
    let rest_vars: VarList = poly.vars()[1..].to_vec().into();
    let mut acc = 0.0;
    for e in (0..=maxe).rev() {
        let mut slice = Polynomial::<f64>::zero(rest_vars.clone());
        for (m, c) in poly.terms() {
            if m.exps()[0] == e {
                slice.add_term(Monomial::new(m.exps()[1..].to_vec()), *c);
            }
        }
        acc = acc * point[0] + horner(&slice, &point[1..]);
    }
    acc
}

fn arb_poly(nvars: usize) -> impl Strategy<Value = Polynomial<Q>> {
    prop::collection::vec((prop::collection::vec(0u32..3, nvars), -5i64..6, 1i64..4), 0..6).prop_map(
        move |terms| {
            let vars = indexed_vars("x", nvars);
            Polynomial::from_terms(vars, terms.into_iter().map(|(e, n, d)| (e, rat(n, d)))).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn ring_axioms(a in arb_poly(2), b in arb_poly(2), c in arb_poly(2)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert!((&a - &a).is_zero());
        if !a.is_zero() && !b.is_zero() {
            prop_assert_eq!((&a * &b).degree(), a.degree() + b.degree());
        }
    }

    #[test]
    fn substitution_is_multiplicative(a in arb_poly(3), b in arb_poly(3), var in 0usize..3, n in -4i64..5, d in 1i64..4) {
        let name = format!("x{}", var + 1);
        let val = rat(n, d);
        let lhs = (&a * &b).substitute(&name, &val).unwrap();
        let rhs = &a.substitute(&name, &val).unwrap() * &b.substitute(&name, &val).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn eval_matches_horner(a in arb_poly(3), pt in prop::collection::vec(-2.0f64..2.0, 3)) {
        let f = a.to_f64();
        let direct = f.eval(&pt).unwrap();
        let h = horner(&f, &pt);
        prop_assert!((direct - h).abs() <= 1e-12 * (1.0 + h.abs()));
        // exact mode agrees with the float evaluation at rational points
        let qpt: Vec<Q> = pt.iter().map(|x| Q::from_float(*x).unwrap()).collect();
        let exact = a.eval(&qpt).unwrap();
        prop_assert!((exact.to_f64_lossy() - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
    }

    #[test]
    fn perturber_degree(n in 1usize..4, e in 1u32..4) {
        let g = perturber::<Q>(indexed_vars("x", n), e);
        prop_assert_eq!(g.degree(), 2 * e);
        prop_assert_eq!(g.constant_term(), rat(1, 1));
    }

    #[test]
    fn json_roundtrip(a in arb_poly(3)) {
        let s = serde_json::to_string(&a.to_json()).unwrap();
        let back: PolynomialJson = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(Polynomial::<Q>::from_json(&back).unwrap(), a);
    }
}
