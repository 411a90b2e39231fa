mod common;

use std::collections::BTreeSet;

use cattsa_core::reduction::def_eq;
use cattsa_core::syntax::{
    alpha_eq_term, apply_term, apply_type, build::*, canonical_term, compose, dim_term, support_term, term_boundary,
    type_boundary, Ctx, Sign, Term, Type,
};
use cattsa_core::typecheck::{infer_term, Mode};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn substitution_commutes_with_arrows(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        for (gamma, t) in common::random_terms(seed, 3) {
            let delta = common::random_pasting(&mut rng);
            let Some(rho) = common::random_sub_into(&mut rng, &gamma, &delta, 2) else { continue };
            let ty = infer_term(&gamma, &t, Mode::CattSa).unwrap();
            let applied = apply_type(&ty, &rho).unwrap();
            match (ty.as_arrow(), applied.as_arrow()) {
                (Some(a), Some(b)) => {
                    prop_assert_eq!(&b.src, &apply_term(&a.src, &rho).unwrap());
                    prop_assert_eq!(&b.tgt, &apply_term(&a.tgt, &rho).unwrap());
                    prop_assert_eq!(&b.base, &apply_type(&a.base, &rho).unwrap());
                }
                (None, None) => {}
                _ => prop_assert!(false, "arrow shape changed under {rho}"),
            }
        }
    }

    #[test]
    fn applying_a_composite_is_applying_in_sequence(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        for (gamma, t) in common::random_terms(seed, 3) {
            let delta = common::random_pasting(&mut rng);
            let epsilon = common::random_pasting(&mut rng);
            let (Some(s1), Some(s2)) = (
                common::random_sub_into(&mut rng, &gamma, &delta, 2),
                common::random_sub_into(&mut rng, &delta, &epsilon, 2),
            ) else { continue };
            let step = apply_term(&apply_term(&t, &s1).unwrap(), &s2).unwrap();
            let once = apply_term(&t, &compose(&s1, &s2).unwrap()).unwrap();
            prop_assert_eq!(step, once);
        }
    }
}

#[test]
fn identity_substitution_is_neutral() {
    for (gamma, t) in common::random_terms(10, 100) {
        assert_eq!(apply_term(&t, &gamma.identity()).unwrap(), t);
    }
}

#[test]
fn composition_is_associative() {
    let mut rng = common::rng(11);
    let mut checked = 0;
    for _ in 0..200 {
        let g: Vec<Ctx> = (0..4).map(|_| common::random_pasting(&mut rng)).collect();
        let (Some(a), Some(b), Some(c)) = (
            common::random_sub_into(&mut rng, &g[0], &g[1], 2),
            common::random_sub_into(&mut rng, &g[1], &g[2], 2),
            common::random_sub_into(&mut rng, &g[2], &g[3], 2),
        ) else {
            continue;
        };
        let left = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        let right = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        assert_eq!(left, right);
        checked += 1;
    }
    assert!(checked > 20, "only {checked} composable triples");
}

#[test]
fn support_and_dimension_under_substitution() {
    let mut rng = common::rng(12);
    let mut checked = 0;
    for (gamma, t) in common::random_terms(12, 200) {
        let delta = common::random_pasting(&mut rng);
        let Some(rho) = common::random_sub_into(&mut rng, &gamma, &delta, 3) else { continue };
        let applied = apply_term(&t, &rho).unwrap();
        let mut expected = BTreeSet::new();
        for x in support_term(&gamma, &t).unwrap() {
            expected.extend(support_term(&delta, rho.get(&x).unwrap()).unwrap());
        }
        let found: BTreeSet<_> = support_term(&delta, &applied).unwrap().into_iter().collect();
        assert_eq!(found, expected, "{t}");
        assert_eq!(dim_term(&delta, &applied).unwrap(), dim_term(&gamma, &t).unwrap());
        checked += 1;
    }
    assert!(checked > 50, "only {checked} substitutions");
}

#[test]
fn term_boundaries_agree_with_type_boundaries() {
    for (gamma, t) in common::random_terms(13, 150) {
        let ty = infer_term(&gamma, &t, Mode::CattSa).unwrap();
        for n in 0..ty.dim() {
            for sign in Sign::BOTH {
                let from_term = term_boundary(&gamma, &t, n, sign).unwrap();
                let from_type = type_boundary(&ty, n, sign).unwrap();
                assert!(def_eq(&gamma, &from_term, &from_type).unwrap(), "δ^{sign}_{n}({t})");
            }
        }
    }
}

#[test]
fn variables_have_their_declared_dimension() {
    let c = ctx(&[
        ("x", Type::Star),
        ("y", Type::Star),
        ("f", arr0("x", "y")),
        ("g", arr0("x", "y")),
        ("a", arr(v("f"), arr0("x", "y"), v("g"))),
    ]);
    for (name, d) in [("x", 0), ("f", 1), ("a", 2)] {
        assert_eq!(dim_term(&c, &Term::var(name)).unwrap(), d);
    }
    let s = support_term(&c, &v("a")).unwrap();
    assert_eq!(s.len(), 5);
}

#[test]
fn canonical_forms_decide_alpha_equivalence() {
    for (_, t) in common::random_terms(14, 100) {
        assert!(alpha_eq_term(&t, &canonical_term(&t)));
        assert_eq!(canonical_term(&canonical_term(&t)), canonical_term(&t));
    }
}
