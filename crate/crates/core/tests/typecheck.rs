mod common;

use cattsa_core::reduction::{def_eq_type, nf_term, nf_type};
use cattsa_core::syntax::{alpha_eq_type, apply_type, build::*, Ctx, Sub, Term, Type};
use cattsa_core::typecheck::{
    check_ctx, check_sub, check_term, check_type, complete_sub, infer_term, is_globular, Mode, TypeError,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn catt_typing_implies_sa_typing() {
    let mut both = 0;
    for (gamma, t) in common::random_terms(61, 300) {
        let sa = infer_term(&gamma, &t, Mode::CattSa).unwrap();
        if let Ok(catt) = infer_term(&gamma, &t, Mode::Catt) {
            assert!(alpha_eq_type(&catt, &sa), "{t}: {catt} vs {sa}");
            both += 1;
        }
    }
    assert!(both > 30, "{both}");
}

#[test]
fn identity_between_bracketings_needs_strict_associativity() {
    let c = common::chain(3);
    let b = common::bracketings(&c, 1, 3);
    let ty = Type::arr(b[0].clone(), arr0("x0", "x3"), b[1].clone());
    for mode in [Mode::Catt, Mode::CattSa] {
        check_type(&c, &ty, mode).unwrap();
    }
    let (d, id_ty) = common::identity_head(1);
    let sub = complete_sub(&d, vec![b[0].clone()], &c).unwrap();
    let id = Term::coh(d, id_ty, sub);
    check_term(&c, &id, &ty, Mode::CattSa).unwrap();
    assert!(matches!(check_term(&c, &id, &ty, Mode::Catt), Err(TypeError::TypeMismatch { .. })));
    // the associator itself is a coherence in both theories
    let assoc = Term::coh(c.clone(), ty.clone(), c.identity());
    for mode in [Mode::Catt, Mode::CattSa] {
        check_term(&c, &assoc, &ty, mode).unwrap();
    }
}

#[test]
fn inference_is_stable_under_normalization() {
    for (gamma, t) in common::random_terms(62, 200) {
        let ty = infer_term(&gamma, &t, Mode::CattSa).unwrap();
        let n = nf_term(&t, common::cfg());
        let nty = infer_term(&gamma, &n, Mode::CattSa).unwrap();
        assert!(def_eq_type(&gamma, &ty, &nty).unwrap(), "{t}");
        check_term(&gamma, &t, &nf_type(&ty, common::cfg()), Mode::CattSa).unwrap();
        check_term(&gamma, &n, &ty, Mode::CattSa).unwrap();
    }
}

/// Oracle for substitution typing: each argument's inferred type must be
/// definitionally equal to the declared type pushed along the earlier
/// arguments.
fn sub_oracle(gamma: &Ctx, sub: &Sub, source: &Ctx) -> bool {
    let mut prefix = Sub::new();
    for ((x, a), (y, t)) in source.entries().iter().zip(sub.entries()) {
        assert_eq!(x, y);
        let Ok(found) = infer_term(gamma, t, Mode::CattSa) else { return false };
        let want = apply_type(a, &prefix).unwrap();
        if !def_eq_type(gamma, &found, &want).unwrap() {
            return false;
        }
        prefix.push(x.clone(), t.clone()).unwrap();
    }
    true
}

#[test]
fn mutated_arguments_are_judged_like_the_oracle() {
    let mut rng = common::rng(63);
    let (mut accepted, mut rejected) = (0, 0);
    for (gamma, t) in common::random_terms(63, 400) {
        let Term::Coh(c) = &t else { continue };
        let i = rng.gen_range(0..c.sub.len());
        let d = c.ctx.entries()[i].1.dim();
        let same_dim: Vec<_> = gamma.entries().iter().filter(|(_, ty)| ty.dim() == d).collect();
        let Some((name, _)) = same_dim.choose(&mut rng) else { continue };
        let sub = c.sub.with_term(i, Term::Var(name.clone()));
        let expected = sub_oracle(&gamma, &sub, &c.ctx);
        let found = check_sub(&gamma, &sub, &c.ctx, Mode::CattSa).is_ok();
        assert_eq!(found, expected, "{t} with argument {i} := {name}");
        let mutated = Term::coh(c.ctx.clone(), c.ty.clone(), sub);
        assert_eq!(infer_term(&gamma, &mutated, Mode::CattSa).is_ok(), expected);
        if expected {
            accepted += 1;
        } else {
            rejected += 1;
        }
    }
    assert!(accepted > 20 && rejected > 20, "{accepted} accepted, {rejected} rejected");
}

#[test]
fn contexts_are_checked_in_order() {
    let good = ctx(&[("x", Type::Star), ("y", Type::Star), ("f", arr0("x", "y"))]);
    check_ctx(&good, Mode::Catt).unwrap();
    assert!(is_globular(&good));
    let forward = ctx(&[("f", arr0("x", "y")), ("x", Type::Star), ("y", Type::Star)]);
    assert!(matches!(check_ctx(&forward, Mode::Catt), Err(TypeError::UnknownVariable(_))));
    let dup = ctx(&[("x", Type::Star), ("x", Type::Star)]);
    assert!(matches!(check_ctx(&dup, Mode::Catt), Err(TypeError::DuplicateVariable(_))));
    let mixed = ctx(&[("x", Type::Star), ("y", Type::Star), ("f", arr0("x", "y")), ("a", arr(v("x"), arr0("x", "y"), v("f")))]);
    assert!(check_ctx(&mixed, Mode::CattSa).is_err());
}

#[test]
fn coherences_need_pasting_contexts_and_full_support() {
    let two = ctx(&[("x", Type::Star), ("y", Type::Star)]);
    let bad = Term::coh(two.clone(), arr0("x", "y"), two.identity());
    assert!(matches!(infer_term(&two, &bad, Mode::CattSa), Err(TypeError::NotPasting(_))));

    // x -f-> y -g-> z  with type x -> y misses g
    let b = common::binary();
    let partial = Term::coh(b.clone(), arr0("x", "y"), b.identity());
    assert!(matches!(infer_term(&b, &partial, Mode::Catt), Err(TypeError::SupportViolation(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn inferred_types_are_well_formed(seed in any::<u64>()) {
        for (gamma, t) in common::random_terms(seed, 4) {
            let ty = infer_term(&gamma, &t, Mode::CattSa).unwrap();
            prop_assert!(check_type(&gamma, &ty, Mode::CattSa).is_ok());
            prop_assert!(check_term(&gamma, &t, &ty, Mode::CattSa).is_ok());
        }
    }
}
