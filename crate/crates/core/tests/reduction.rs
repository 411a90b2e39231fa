mod common;

use cattsa_core::insertion::{insert_ctx, InsertionProblem};
use cattsa_core::pasting::{is_disc, locally_maximal, unbiased_term, unbiased_type};
use cattsa_core::reduction::{
    def_eq, def_eq_type, is_regular, nf_term, nf_term_traced, raw_steps_term, regular_height, Height, RedexRule,
    ReductionConfig,
};
use cattsa_core::syntax::{alpha_eq_term, apply_term, dim_term, support_term, Ctx, Term};
use cattsa_core::tree::{trees_with_labels, Tree};
use cattsa_core::typecheck::{infer_term, Mode};
use proptest::prelude::*;

#[test]
fn every_step_preserves_the_type() {
    let mut steps = 0;
    for (gamma, t) in common::random_terms(51, 400) {
        let ty = infer_term(&gamma, &t, Mode::CattSa).unwrap();
        for (redex, r) in raw_steps_term(&t, common::cfg()) {
            let rty = infer_term(&gamma, &r, Mode::CattSa)
                .unwrap_or_else(|e| panic!("{t} ⇝ {r} at {}: {e}", redex.position));
            assert!(def_eq_type(&gamma, &ty, &rty).unwrap(), "{t} ⇝ {r}");
            assert!(def_eq(&gamma, &t, &r).unwrap());
            steps += 1;
        }
    }
    assert!(steps > 100, "{steps} steps");
}

#[test]
fn normalization_is_idempotent() {
    for (gamma, t) in common::random_terms(52, 150) {
        let n = nf_term(&t, common::cfg());
        assert!(raw_steps_term(&n, common::cfg()).is_empty(), "{n} is not normal");
        assert_eq!(nf_term(&n, common::cfg()), n);
        assert_eq!(dim_term(&gamma, &n).unwrap(), dim_term(&gamma, &t).unwrap());
    }
}

#[test]
fn traces_replay_to_the_normal_form() {
    for (_, t) in common::random_terms(53, 80) {
        let (n, trace) = nf_term_traced(&t, common::cfg());
        assert_eq!(n, nf_term(&t, common::cfg()));
        if trace.is_empty() {
            assert!(raw_steps_term(&t, common::cfg()).is_empty());
        }
        for step in &trace {
            assert!(step.before.as_coh().is_some(), "{step}");
            assert_ne!(step.before, step.after);
        }
    }
}

#[test]
fn normal_forms_are_stable_under_substitution() {
    let mut rng = common::rng(54);
    let mut checked = 0;
    for (gamma, t) in common::random_terms(54, 150) {
        let delta = common::random_pasting(&mut rng);
        let Some(rho) = common::random_sub_into(&mut rng, &gamma, &delta, 3) else { continue };
        let direct = nf_term(&apply_term(&t, &rho).unwrap(), common::cfg());
        let via = nf_term(&apply_term(&nf_term(&t, common::cfg()), &rho).unwrap(), common::cfg());
        assert!(alpha_eq_term(&direct, &via), "{t} under {rho}");
        checked += 1;
    }
    assert!(checked > 40, "{checked}");
}

/// Unbiased composites over `Δ` pushed along `κ` for every insertion of an
/// unbiased composite, and once more into the result.
fn subdivided_composites() -> Vec<(Ctx, Term)> {
    let trees: Vec<Tree> = (3..=9).step_by(2).flat_map(trees_with_labels).collect();
    let subdivide = |delta: &Ctx, t: &Term| -> Vec<(Ctx, Term)> {
        let mut out = Vec::new();
        for x in locally_maximal(delta).unwrap() {
            let d = delta.lookup(&x).unwrap().dim();
            for inner in &trees {
                let inner = inner.to_ctx();
                if inner.dim() as usize != d {
                    continue;
                }
                let prob = InsertionProblem { outer: delta.clone(), x: x.clone(), inner_type: unbiased_type(&inner).unwrap(), inner };
                if let Ok(res) = insert_ctx(&prob) {
                    out.push((res.inserted.clone(), apply_term(t, &res.kappa).unwrap()));
                }
            }
        }
        out
    };
    let mut out = Vec::new();
    for delta in &trees {
        let delta = delta.to_ctx();
        let first = subdivide(&delta, &unbiased_term(&delta).unwrap());
        for (i, (g, t)) in first.iter().enumerate() {
            if i % 5 == 0 && g.len() <= 11 {
                out.extend(subdivide(g, t));
            }
        }
        out.extend(first);
    }
    out
}

#[test]
fn regularity_of_known_terms() {
    let c = common::chain(3);
    // a binary composite has linear height 0, so nesting one at branching
    // height 0 is not regular
    for t in common::bracketings(&c, 1, 3) {
        assert!(!is_regular(&c, &t).unwrap(), "{t}");
    }
    let u = unbiased_term(&c).unwrap();
    assert_eq!(regular_height(&c, &u).unwrap(), Some(Height::Finite(0)));
    assert_eq!(regular_height(&c, &Term::var("f1")).unwrap(), Some(Height::Infinite));
    let (d, ty) = common::identity_head(1);
    let id = Term::coh(d.clone(), ty, d.identity());
    assert!(!is_regular(&d, &id).unwrap());
}

#[test]
fn regular_terms_normalize_to_the_unbiased_composite_of_their_support() {
    let mut regular = 0;
    for (gamma, t) in subdivided_composites() {
        if !is_regular(&gamma, &t).unwrap() {
            continue;
        }
        assert_eq!(support_term(&gamma, &t).unwrap(), gamma.var_set());
        let n = nf_term(&t, common::cfg());
        assert!(alpha_eq_term(&n, &unbiased_term(&gamma).unwrap()), "{t} ⇝ {n}");
        regular += 1;
    }
    assert!(regular >= 40, "{regular} regular terms");
}

#[test]
fn disabling_disc_insertion_only_removes_disc_redexes() {
    let no_disc = ReductionConfig { allow_disc_insertion: false };
    for (_, t) in common::random_terms(56, 100) {
        let all = raw_steps_term(&t, common::cfg());
        let some = raw_steps_term(&t, no_disc);
        assert!(some.len() <= all.len());
        for (r, _) in &some {
            assert!(!is_disc(&r.site.inner), "{t}");
            assert!(matches!(
                r.rule,
                RedexRule::Insertion | RedexRule::ArgumentReduction | RedexRule::CellReduction | RedexRule::TypeComponent
                    | RedexRule::SubComponent
            ));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn definitional_equality_is_an_equivalence(seed in any::<u64>()) {
        let terms = common::random_terms(seed, 6);
        let (gamma, a) = &terms[0];
        prop_assert!(def_eq(gamma, a, a).unwrap());
        for (g, b) in &terms[1..] {
            if g != gamma || infer_term(g, b, Mode::CattSa).unwrap().dim() != infer_term(gamma, a, Mode::CattSa).unwrap().dim() {
                continue;
            }
            prop_assert_eq!(def_eq(gamma, a, b).unwrap(), def_eq(gamma, b, a).unwrap());
            let n = nf_term(b, common::cfg());
            prop_assert!(def_eq(gamma, b, &n).unwrap());
            prop_assert_eq!(def_eq(gamma, a, b).unwrap(), def_eq(gamma, a, &n).unwrap());
        }
    }
}
