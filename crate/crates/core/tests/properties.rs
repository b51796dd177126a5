use num_traits::Zero;
use proptest::prelude::*;

use qes_core::gens::{self, solve_alpha, GenContext, MultiIndex};
use qes_core::polyspace::monomials_up_to;
use qes_core::rational::{frac, int};
use qes_core::verify::matrix_of;
use qes_core::{DiffOp, Monomial, Poly, Rational, SpaceSpec};

fn small_rational() -> impl Strategy<Value = Rational> {
    (-5i64..=5, 1i64..=3).prop_map(|(n, d)| frac(n, d))
}

fn poly(vars: usize, degree: u32) -> impl Strategy<Value = Poly> {
    let monos = monomials_up_to(vars, degree);
    proptest::collection::vec((0..monos.len(), small_rational()), 0..6).prop_map(move |terms| {
        let mut p = Poly::zero(vars);
        for (i, c) in terms {
            p.add_term(monos[i].clone(), c);
        }
        p
    })
}

fn diff_op(vars: usize) -> impl Strategy<Value = DiffOp> {
    let term = (proptest::collection::vec(0u32..=2, vars), proptest::collection::vec(0u32..=2, vars), small_rational());
    proptest::collection::vec(term, 0..4).prop_map(move |terms| {
        terms.into_iter().fold(DiffOp::zero(vars), |acc, (m, d, c)| {
            &acc + &DiffOp::term(vars, Monomial::new(m), qes_core::DerivMulti::new(d), c)
        })
    })
}

/// Random element of the enveloping algebra of `gl(V+1)` at degree `N`.
fn enveloping(vars: usize, degree: u32) -> impl Strategy<Value = DiffOp> {
    let word = proptest::collection::vec((0..=vars, 0..=vars), 0..=2);
    proptest::collection::vec((-2i64..=2, word), 1..=3).prop_map(move |terms| {
        terms.into_iter().fold(DiffOp::zero(vars), |acc, (c, word)| {
            let w = word
                .into_iter()
                .fold(DiffOp::identity(vars), |p, (a, b)| p.compose(&gens::j_scalar(a, b, degree, vars).unwrap()));
            &acc + &w.scale(&int(c))
        })
    })
}

proptest! {
    #[test]
    fn compose_is_action_composition(a in diff_op(2), b in diff_op(2), p in poly(2, 4)) {
        prop_assert_eq!(a.compose(&b).apply(&p), a.apply(&b.apply(&p)));
    }

    #[test]
    fn compose_is_associative(a in diff_op(2), b in diff_op(2), c in diff_op(2)) {
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
    }

    #[test]
    fn jacobi_identity(a in diff_op(1), b in diff_op(1), c in diff_op(1)) {
        let s = &(&a.commutator(&b.commutator(&c)) + &b.commutator(&c.commutator(&a))) + &c.commutator(&a.commutator(&b));
        prop_assert!(s.is_zero());
    }

    #[test]
    fn matrix_of_is_a_homomorphism((n, a, b) in (0u32..=3).prop_flat_map(|n| (Just(n), enveloping(2, n), enveloping(2, n)))) {
        let spec = SpaceSpec::scalar(2, n).unwrap();
        let ma = matrix_of(&a.clone().into(), &spec).unwrap().matrix;
        let mb = matrix_of(&b.clone().into(), &spec).unwrap().matrix;
        let mab = matrix_of(&a.compose(&b).into(), &spec).unwrap().matrix;
        prop_assert_eq!(mab, &ma * &mb);
    }

    #[test]
    fn casimirs_are_central(v in 1usize..=2, n in 0u32..=3, p in 1u32..=3, a in 0usize..=2, b in 0usize..=2) {
        prop_assume!(a <= v && b <= v);
        let c = gens::casimir(p, n, v);
        let j = gens::j_scalar(a, b, n, v).unwrap();
        let spec = SpaceSpec::scalar(v, n).unwrap();
        let comm = matrix_of(&c.commutator(&j).into(), &spec).unwrap().matrix;
        prop_assert!(comm.is_zero());
    }

    #[test]
    fn sl_generators_are_traceless(v in 1usize..=3, n in 0u32..=3) {
        let spec = SpaceSpec::scalar(v, n).unwrap();
        let trace = (0..=v).fold(DiffOp::zero(v), |acc, a| &acc + &gens::j_sl(a, a, n, v).unwrap());
        prop_assert!(matrix_of(&trace.into(), &spec).unwrap().matrix.is_zero());
    }

    #[test]
    fn alpha_expansion_reproduces_the_product(delta in 1u32..=10, y in small_rational()) {
        let a = solve_alpha(delta);
        let t = &y + &frac(delta as i64 - 1, 2);
        let lhs = (0..delta).fold(int(1), |acc, j| acc * (&y + int(j as i64)));
        let rhs = a.values.iter().rev().fold(Rational::zero(), |acc, c| acc * &t + c);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn q_and_qbar_are_nilpotent_pairs(v in 1usize..=2, d in 1u32..=2, extra in 0u32..=2, i in 0usize..16, j in 0usize..16) {
        let ctx = GenContext::new(v, d + extra, d).unwrap();
        let all = MultiIndex::all(v, d as usize);
        let (a, b) = (&all[i % all.len()], &all[j % all.len()]);
        let q = gens::q_gen(a, &ctx).unwrap().compose(&gens::q_gen(b, &ctx).unwrap());
        let qb = gens::qbar_gen(a, &ctx).unwrap().compose(&gens::qbar_gen(b, &ctx).unwrap());
        prop_assert!(q.is_zero() && qb.is_zero());
    }
}
