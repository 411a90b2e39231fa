#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};
use std::path::PathBuf;

use cattsa_core::pasting::{disc_context, disc_name, unbiased_type};
use cattsa_core::reduction::{convertible_term, raw_steps_term, ReductionConfig};
use cattsa_core::syntax::{build::*, canonical_term, dim_term, Ctx, Name, Sign, Term, Type};
use cattsa_core::tree::trees_with_labels;
use cattsa_core::typecheck::{check_sub, complete_sub, explicit_vars, infer_term, Mode};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn cfg() -> ReductionConfig {
    ReductionConfig::default()
}

/// `(x : *) (y : *) (f : x -> y) (z : *) (g : y -> z)`.
pub fn binary() -> Ctx {
    ctx(&[("x", Type::Star), ("y", Type::Star), ("f", arr0("x", "y")), ("z", Type::Star), ("g", arr0("y", "z"))])
}

/// `x0 -f1-> x1 -f2-> ... -fn-> xn` in context order.
pub fn chain(n: usize) -> Ctx {
    let mut c = Ctx::new().with("x0", Type::Star);
    for i in 1..=n {
        c.push(format!("x{i}").as_str(), Type::Star);
        c.push(format!("f{i}").as_str(), arr0(&format!("x{}", i - 1), &format!("x{i}")));
    }
    c
}

/// The binary composite of two composable terms of `ctx`.
pub fn comp(ctx: &Ctx, a: Term, b: Term) -> Term {
    let bin = binary();
    let sub = complete_sub(&bin, vec![a, b], ctx).expect("composable");
    Term::coh(bin, arr0("x", "z"), sub)
}

/// The unbiased composite of a pasting context applied to explicit
/// arguments.
pub fn unbiased_app(head: &Ctx, args: Vec<Term>, ctx: &Ctx) -> Term {
    let sub = complete_sub(head, args, ctx).expect("arguments fit");
    Term::coh(head.clone(), unbiased_type(head).unwrap(), sub)
}

/// Every bracketing of the 1-cells `f_i ... f_j` of `chain(n)` by binary
/// composites.
pub fn bracketings(ctx: &Ctx, i: usize, j: usize) -> Vec<Term> {
    if i == j {
        return vec![v(&format!("f{i}"))];
    }
    let mut out = Vec::new();
    for k in i..j {
        for l in bracketings(ctx, i, k) {
            for r in bracketings(ctx, k + 1, j) {
                out.push(comp(ctx, l.clone(), r));
            }
        }
    }
    out
}

/// The identity coherence on the top cell of `D_n`.
pub fn identity_head(n: usize) -> (Ctx, Type) {
    let d = disc_context(n).ctx;
    let top = Term::Var(disc_name(n, Sign::Src));
    let base = d.lookup(&disc_name(n, Sign::Src)).unwrap().clone();
    (d, Type::arr(top.clone(), base, top))
}

/// Coherence heads used by the random generator: unbiased composites over
/// trees of depth ≤ 3 with ≤ 5 labels and identities on cells of dim ≤ 2.
pub fn heads() -> Vec<(Ctx, Type)> {
    let mut out = Vec::new();
    for n in 1..=7 {
        for t in trees_with_labels(n) {
            if t.depth() <= 3 {
                let c = t.to_ctx();
                let ty = unbiased_type(&c).unwrap();
                out.push((c, ty));
            }
        }
    }
    for n in 0..=2 {
        out.push(identity_head(n));
    }
    out
}

/// A random pasting context of dimension ≤ 2.
pub fn random_pasting(rng: &mut StdRng) -> Ctx {
    let n = *[3, 5, 5, 7, 7, 9].choose(rng).unwrap();
    let trees: Vec<_> = trees_with_labels(n).into_iter().filter(|t| t.depth() <= 2).collect();
    trees.choose(rng).unwrap().to_ctx()
}

#[derive(Clone)]
struct Typed {
    term: Term,
    ty: Type,
    dim: usize,
}

/// Picks arguments for the explicit variables of `head` from `pool`,
/// keeping every endpoint consistent with earlier choices.
fn fit_head(rng: &mut StdRng, head: &Ctx, pool: &[Typed], gamma: &Ctx) -> Option<Term> {
    let mut known: HashMap<Name, Term> = HashMap::new();
    let mut args = Vec::new();
    for x in explicit_vars(head) {
        let pattern = head.lookup(&x).unwrap().clone();
        let fits: Vec<&Typed> = pool
            .iter()
            .filter(|c| c.dim == pattern.dim() && consistent(&pattern, &c.ty, &known))
            .collect();
        let cohs: Vec<&Typed> = fits.iter().copied().filter(|c| !c.term.is_var()).collect();
        let pick = if !cohs.is_empty() && rng.gen_bool(0.6) { *cohs.choose(rng)? } else { *fits.choose(rng)? };
        let pick = pick.clone();
        record(&pattern, &pick.ty, &mut known);
        known.insert(x.clone(), pick.term.clone());
        args.push(pick.term);
    }
    let sub = complete_sub(head, args, gamma).ok()?;
    check_sub(gamma, &sub, head, Mode::CattSa).ok()?;
    Some(Term::coh(head.clone(), Type::Star, sub))
}

fn consistent(pattern: &Type, found: &Type, known: &HashMap<Name, Term>) -> bool {
    match (pattern.as_arrow(), found.as_arrow()) {
        (None, None) => true,
        (Some(p), Some(f)) => {
            for (pe, fe) in [(&p.src, &f.src), (&p.tgt, &f.tgt)] {
                if let Term::Var(x) = pe {
                    if let Some(k) = known.get(x) {
                        if !convertible_term(k, fe, cfg()) {
                            return false;
                        }
                    }
                }
            }
            consistent(&p.base, &f.base, known)
        }
        _ => false,
    }
}

fn record(pattern: &Type, found: &Type, known: &mut HashMap<Name, Term>) {
    if let (Some(p), Some(f)) = (pattern.as_arrow(), found.as_arrow()) {
        for (pe, fe) in [(&p.src, &f.src), (&p.tgt, &f.tgt)] {
            if let Term::Var(x) = pe {
                known.entry(x.clone()).or_insert_with(|| fe.clone());
            }
        }
        record(&p.base, &f.base, known);
    }
}

/// Builds `count` well-typed coherence terms over `gamma` by repeatedly
/// applying random heads to earlier terms.
pub fn random_terms_in(rng: &mut StdRng, gamma: &Ctx, count: usize, heads: &[(Ctx, Type)]) -> Vec<Term> {
    let mut pool: Vec<Typed> = gamma
        .entries()
        .iter()
        .map(|(n, ty)| Typed { term: Term::Var(n.clone()), ty: ty.clone(), dim: ty.dim() })
        .collect();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < count * 40 {
        attempts += 1;
        let (head, head_ty) = heads.choose(rng).unwrap();
        let Some(t) = fit_head(rng, head, &pool, gamma) else { continue };
        let t = match t {
            Term::Coh(c) => Term::coh(c.ctx.clone(), head_ty.clone(), c.sub.clone()),
            Term::Var(_) => unreachable!(),
        };
        let Ok(ty) = infer_term(gamma, &t, Mode::CattSa) else { continue };
        let dim = dim_term(gamma, &t).unwrap();
        if dim > 3 || t.size() > 60 {
            continue;
        }
        pool.push(Typed { term: t.clone(), ty, dim });
        out.push(t);
    }
    out
}

/// `count` random well-typed terms of dim ≤ 3, each with its context.
pub fn random_terms(seed: u64, count: usize) -> Vec<(Ctx, Term)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let heads = heads();
    let mut out = Vec::new();
    while out.len() < count {
        let gamma = random_pasting(&mut rng);
        let k = rng.gen_range(4..12);
        for t in random_terms_in(&mut rng, &gamma, k, &heads) {
            if out.len() < count {
                out.push((gamma.clone(), t));
            }
        }
    }
    out
}

/// Every globular context with at most `max` variables, named `c0, c1, …`.
pub fn globular_contexts(max: usize) -> Vec<Ctx> {
    let mut out = vec![Ctx::new()];
    let mut frontier = vec![Ctx::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for c in &frontier {
            let name = format!("c{}", c.len());
            let mut options = vec![Type::Star];
            for (a, ta) in c.entries() {
                for (b, tb) in c.entries() {
                    if ta == tb {
                        options.push(Type::arr(Term::Var(a.clone()), ta.clone(), Term::Var(b.clone())));
                    }
                }
            }
            for ty in options {
                next.push(c.clone().with(name.as_str(), ty));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Exhaustive search of the reduction graph from `t`. Returns the distinct
/// normal forms reached, or `None` when more than `limit` terms are visited.
pub fn reachable_normal_forms(t: &Term, limit: usize) -> Option<Vec<Term>> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    let mut normal = Vec::new();
    seen.insert(canonical_term(t));
    queue.push_back(t.clone());
    while let Some(u) = queue.pop_front() {
        let steps = raw_steps_term(&u, cfg());
        if steps.is_empty() {
            if !normal.iter().any(|n| canonical_term(n) == canonical_term(&u)) {
                normal.push(u);
            }
            continue;
        }
        for (_, r) in steps {
            if seen.insert(canonical_term(&r)) {
                if seen.len() > limit {
                    return None;
                }
                queue.push_back(r);
            }
        }
    }
    Some(normal)
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("corpus")
}

pub fn read_corpus(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).expect("corpus file")
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn coin(rng: &mut StdRng) -> bool {
    rng.gen_bool(0.5)
}

/// A random well-typed substitution out of a pasting context `src` into
/// `gamma`, drawing arguments from the variables of `gamma` and `extra`
/// random terms over it.
pub fn random_sub_into(rng: &mut StdRng, src: &Ctx, gamma: &Ctx, extra: usize) -> Option<cattsa_core::syntax::Sub> {
    let heads = heads();
    let mut pool: Vec<Typed> = gamma
        .entries()
        .iter()
        .map(|(n, ty)| Typed { term: Term::Var(n.clone()), ty: ty.clone(), dim: ty.dim() })
        .collect();
    for t in random_terms_in(rng, gamma, extra, &heads) {
        let ty = infer_term(gamma, &t, Mode::CattSa).ok()?;
        let dim = ty.dim();
        pool.push(Typed { term: t, ty, dim });
    }
    match fit_head(rng, src, &pool, gamma)? {
        Term::Coh(c) => Some(c.sub.clone()),
        Term::Var(_) => None,
    }
}
