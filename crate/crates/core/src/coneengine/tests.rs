use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use super::*;

type Q = BigRational;

fn v(xs: &[i64]) -> Vec<Q> {
    xs.iter().map(|&x| Q::from_integer(x.into())).collect()
}

fn gens(rows: &[&[i64]]) -> TruncatedCone<Q> {
    let d = rows.first().map_or(2, |r| r.len());
    TruncatedCone::from_generators(d, rows.iter().map(|r| v(r)).collect()).unwrap()
}

/// Independent oracle: membership in cone(G) in dim 2 by checking the sign
/// of both cross products against the extreme generators.
fn planar_cone_contains(g: &[Vec<Q>], x: &[Q]) -> bool {
    let cross = |a: &[Q], b: &[Q]| a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone();
    if x.iter().all(|c| c.is_zero()) {
        return true;
    }
    // pointed cone spanned by exactly two generators
    let (a, b) = (&g[0], &g[1]);
    let (a, b) = if cross(a, b) >= Q::zero() { (a, b) } else { (b, a) };
    cross(a, x) >= Q::zero() && cross(x, b) >= Q::zero()
}

#[test]
fn orthant_is_self_dual() {
    let c = TruncatedCone::<Q>::orthant(2);
    let d = c.dual_cone().unwrap();
    assert!(d.same_closure(&c).unwrap());
}

#[test]
fn zero_cone_dual_is_everything() {
    let zero = TruncatedCone::<Q>::from_generators(2, vec![]).unwrap();
    let d = zero.dual_cone().unwrap();
    for p in [v(&[1, 0]), v(&[-3, 7]), v(&[0, -1])] {
        assert!(d.contains(&p).unwrap());
    }
}

#[test]
fn ray_dual_is_halfplane() {
    let ray = gens(&[&[1, 1]]);
    let d = ray.dual_cone().unwrap();
    let h = d.h_form().unwrap();
    assert!(h.equalities.is_empty());
    assert_eq!(h.inequalities.len(), 1);
    let n = &h.inequalities[0];
    assert_eq!(n[0], n[1]);
    assert!(n[0] > Q::zero());
    assert!(d.contains(&v(&[1, -1])).unwrap() && !d.contains(&v(&[-1, -1])).unwrap());
}

#[test]
fn interior_examples() {
    let o = TruncatedCone::<Q>::orthant(2);
    assert!(o.is_interior(&v(&[1, 1])).unwrap().interior);
    let r = o.is_interior(&v(&[1, 0])).unwrap();
    assert!(!r.interior);
    assert_eq!(r.witness.unwrap(), v(&[0, 1]));
    let c = gens(&[&[1, 0], &[1, 1]]);
    assert!(c.is_interior(&v(&[2, 1])).unwrap().interior);
    let h = c.h_form().unwrap();
    let mut normals = h.inequalities.clone();
    normals.sort();
    let mut expect = vec![v(&[0, 1]), v(&[1, -1])];
    expect.sort();
    assert_eq!(normals, expect);
}

#[test]
fn interior_shift_examples() {
    let o = TruncatedCone::<Q>::orthant(2);
    assert!(o.interior_shift(&v(&[1, 1]), &v(&[1, 0]), &Q::new(1.into(), 2.into())).unwrap());
    assert!(o.interior_shift(&v(&[1, 1]), &v(&[0, 0]), &Q::new(1.into(), 1_000_000.into())).unwrap());
    let c = gens(&[&[1, 0], &[1, 1]]);
    assert!(c.interior_shift(&v(&[2, 1]), &v(&[1, 1]), &Q::new(1.into(), 10.into())).unwrap());
    // precondition failures are distinct errors
    assert!(matches!(o.interior_shift(&v(&[1, 0]), &v(&[1, 1]), &Q::one()), Err(ConeError::Precondition(_))));
    assert!(matches!(o.interior_shift(&v(&[1, 1]), &v(&[-1, 0]), &Q::one()), Err(ConeError::Precondition(_))));
}

#[test]
fn seq_closure_examples() {
    let o = TruncatedCone::<Q>::orthant(2);
    let sched: Vec<Q> = vec![Q::one(), Q::new(1.into(), 10.into()), Q::new(1.into(), 100.into())];
    let (verdict, w) = seq_closure_member(&o, &v(&[0, 1]), &v(&[1, 1]), &sched).unwrap();
    assert_eq!(verdict, SeqVerdict::InClosure);
    assert_eq!(w.schedule.len(), 3);

    // open right half-plane plus the origin
    let open = |x: &[Q]| {
        if x[0] > Q::zero() || x.iter().all(|c| c.is_zero()) {
            Membership::Member
        } else {
            Membership::NonMember
        }
    };
    let (verdict, _) = seq_closure_member(&open, &v(&[0, 1]), &v(&[1, 0]), &default_schedule::<Q>()).unwrap();
    assert_eq!(verdict, SeqVerdict::InClosure);
    assert_eq!(open(&v(&[0, 1])), Membership::NonMember);
    let (verdict, _) = seq_closure_member(&open, &v(&[-1, 1]), &v(&[1, 0]), &default_schedule::<Q>()).unwrap();
    assert_eq!(verdict, SeqVerdict::NotDetected);
}

#[test]
fn seq_closure_rejects_bad_schedules() {
    let o = TruncatedCone::<Q>::orthant(2);
    let bad = [v(&[]), v(&[1, 1]), v(&[1, 2]), v(&[1, 0])];
    for s in bad {
        assert!(matches!(seq_closure_member(&o, &v(&[0, 0]), &v(&[1, 1]), &s), Err(ConeError::BadSchedule(_))));
    }
    let unknown = |_: &[Q]| Membership::Unknown;
    let (verdict, _) = seq_closure_member(&unknown, &v(&[0]), &v(&[1]), &[Q::one()]).unwrap();
    assert_eq!(verdict, SeqVerdict::Inconclusive);
}

#[test]
fn semispace_examples() {
    let upper = TruncatedCone::<Q>::from_halfspaces(2, vec![v(&[0, 1])]).unwrap();
    let r = semispace_closed(&upper).unwrap();
    assert!(r.closed);
    assert_eq!(r.quotient_dim, 1);
    let all = TruncatedCone::<Q>::from_halfspaces(2, vec![]).unwrap();
    let r = semispace_closed(&all).unwrap();
    assert!(r.closed && r.quotient_dim == 0);
    let lex = TruncatedCone::<Q>::lexicographic(2, vec![v(&[0, 1]), v(&[1, 0])]).unwrap();
    let r = semispace_closed(&lex).unwrap();
    assert!(!r.closed);
    assert_eq!(r.quotient_dim, 2);
    let (p, u) = r.limit_witness.unwrap();
    assert_eq!(p, v(&[-1, 0]));
    assert!(!lex.contains(&p).unwrap());
    for eps in default_schedule::<Q>() {
        assert!(lex.contains(&dd::axpy(&p, &eps, &u)).unwrap());
    }
    let o = TruncatedCone::<Q>::orthant(2);
    assert!(matches!(semispace_closed(&o), Err(ConeError::HypothesisFailed(_))));
}

#[test]
fn json_round_trip() {
    let c = TruncatedCone::<Q>::from_generators(2, vec![vec![Q::new(1.into(), 2.into()), Q::one()]]).unwrap();
    let j = c.to_json().unwrap();
    let s = serde_json::to_string(&j).unwrap();
    assert_eq!(s, r#"{"dim":2,"kind":"generators","vectors":[["1/2","1"]]}"#);
    let back = TruncatedCone::<Q>::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
    assert!(back.same_closure(&c).unwrap());
}

#[test]
fn float_cones_agree_with_exact() {
    let c = TruncatedCone::<f64>::from_generators(2, vec![vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
    assert!(c.is_interior(&[2.0, 1.0]).unwrap().interior);
    assert!(!c.contains(&[0.0, 1.0]).unwrap());
}

fn small_vec(dim: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, dim)
}

fn cone_strategy() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (2usize..=4).prop_flat_map(|d| (Just(d), prop::collection::vec(small_vec(d), 1..=6)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn double_dual_is_closure((d, g) in cone_strategy()) {
        let c = TruncatedCone::<Q>::from_generators(d, g.iter().map(|r| v(r)).collect()).unwrap();
        let dd = c.dual_cone().unwrap().dual_cone().unwrap();
        prop_assert!(dd.same_closure(&c).unwrap());
        // generators stay inside the double dual
        for r in &g {
            prop_assert!(dd.contains(&v(r)).unwrap());
        }
    }

    #[test]
    fn planar_membership_matches_cross_products(a in small_vec(2), b in small_vec(2), x in small_vec(2)) {
        let (a, b, x) = (v(&a), v(&b), v(&x));
        let cross = a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone();
        prop_assume!(!cross.is_zero());
        let c = TruncatedCone::from_generators(2, vec![a.clone(), b.clone()]).unwrap();
        prop_assert_eq!(c.contains(&x).unwrap(), planar_cone_contains(&[a, b], &x));
    }

    #[test]
    fn interior_shift_holds((d, g) in cone_strategy(), w in prop::collection::vec(0i64..=3, 6)) {
        let gq: Vec<Vec<Q>> = g.iter().map(|r| v(r)).collect();
        let c = TruncatedCone::<Q>::from_generators(d, gq.clone()).unwrap();
        let q = gq.iter().fold(vec![Q::zero(); d], |acc, r| dd::axpy(&acc, &Q::one(), r));
        prop_assume!(c.is_interior(&q).unwrap().interior);
        let p = gq.iter().zip(&w).fold(vec![Q::zero(); d], |acc, (r, k)| dd::axpy(&acc, &Q::from_integer((*k).into()), r));
        for eps in [Q::one(), Q::new(1.into(), 10.into()), Q::new(1.into(), 100.into())] {
            prop_assert!(c.interior_shift(&q, &p, &eps).unwrap());
        }
    }

    #[test]
    fn shorter_schedule_keeps_in_closure((d, g) in cone_strategy(), x in small_vec(4), cut in 1usize..7) {
        let c = TruncatedCone::<Q>::from_generators(d, g.iter().map(|r| v(r)).collect()).unwrap();
        let q = g.iter().fold(vec![Q::zero(); d], |acc, r| dd::axpy(&acc, &Q::one(), &v(r)));
        let p = v(&x[..d]);
        let full = default_schedule::<Q>();
        let (a, _) = seq_closure_member(&c, &p, &q, &full).unwrap();
        let (b, _) = seq_closure_member(&c, &p, &q, &full[..cut]).unwrap();
        if a == SeqVerdict::InClosure {
            prop_assert_eq!(b, SeqVerdict::InClosure);
        }
    }

    #[test]
    fn interior_perturbation_finds_closure_points((d, g) in cone_strategy(), x in small_vec(4)) {
        let gq: Vec<Vec<Q>> = g.iter().map(|r| v(r)).collect();
        let c = TruncatedCone::<Q>::from_generators(d, gq.clone()).unwrap();
        let q = gq.iter().fold(vec![Q::zero(); d], |acc, r| dd::axpy(&acc, &Q::one(), r));
        prop_assume!(c.is_interior(&q).unwrap().interior);
        let p = v(&x[..d]);
        if c.dual_cone().unwrap().dual_cone().unwrap().contains(&p).unwrap() {
            let (verdict, _) = seq_closure_member(&c, &p, &q, &default_schedule::<Q>()).unwrap();
            prop_assert_eq!(verdict, SeqVerdict::InClosure);
        }
    }

    #[test]
    fn caratheodory_support_is_bounded_by_rank((d, g) in cone_strategy(), w in prop::collection::vec(0i64..=3, 6)) {
        let gq: Vec<Vec<Q>> = g.iter().map(|r| v(r)).collect();
        let lam: Vec<Q> = w.iter().take(gq.len()).map(|k| Q::from_integer((*k).into())).collect();
        let target = gq.iter().zip(&lam).fold(vec![Q::zero(); d], |acc, (r, l)| dd::axpy(&acc, l, r));
        let red = caratheodory(&gq, &lam);
        prop_assert!(red.len() <= d);
        let back = red.iter().fold(vec![Q::zero(); d], |acc, (i, l)| dd::axpy(&acc, l, &gq[*i]));
        prop_assert_eq!(back, target);
    }
}

/// Independent membership oracle for `cone(G) + span(L)`: exact LP feasibility.
fn lp_cone_member(g: &[Vec<Q>], l: &[Vec<Q>], x: &[Q]) -> bool {
    use crate::numkernel::{lp_feasible, LpProblem, Relation};
    let n = g.len() + l.len();
    let mut lp = LpProblem::<Q>::new(n);
    for j in g.len()..n {
        lp.free[j] = true;
    }
    for (i, xi) in x.iter().enumerate() {
        let row = g.iter().chain(l).map(|v| v[i].clone()).collect();
        lp.add_row(row, Relation::Eq, xi.clone());
    }
    lp_feasible(&lp).is_feasible()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn halfspace_to_generator_conversion_matches_lp((d, a) in cone_strategy(), x in small_vec(4)) {
        let c = TruncatedCone::<Q>::from_halfspaces(d, a.iter().map(|r| v(r)).collect()).unwrap();
        let vf = c.v_form().unwrap();
        let p = v(&x[..d]);
        prop_assert_eq!(c.contains(&p).unwrap(), lp_cone_member(&vf.rays, &vf.lineality, &p));
    }

    #[test]
    fn generator_to_halfspace_conversion_matches_lp((d, g) in cone_strategy(), x in small_vec(4)) {
        let gq: Vec<Vec<Q>> = g.iter().map(|r| v(r)).collect();
        let c = TruncatedCone::<Q>::from_generators(d, gq.clone()).unwrap();
        let p = v(&x[..d]);
        prop_assert_eq!(c.contains(&p).unwrap(), lp_cone_member(&gq, &[], &p));
        // the dual's facets are the original generators' extreme directions
        let dual = c.dual_cone().unwrap();
        for r in dual.v_form().unwrap().rays {
            prop_assert!(gq.iter().all(|gi| dd::dot(gi, &r) >= Q::zero()));
        }
    }
}
