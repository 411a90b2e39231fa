//! One-step reduction, innermost-leftmost normalization, definitional
//! equality, the graded relation `=_n`, and regularity.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::insertion::{insert_ctx, insert_sub, InsertionError, InsertionProblem};
use crate::pasting::{is_disc, is_unbiased, locally_maximal, unbiased_type};
use crate::syntax::{
    alpha_eq_ctx, alpha_eq_term, alpha_eq_type, apply_type, dim_term, rename_type, Coh, Ctx, Name, Sub,
    SyntaxError, Term, Type,
};
use crate::tree::Tree;
use crate::typecheck::{self, Mode, TypeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("ill-typed input: {0}")]
    IllTyped(Box<TypeError>),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Insertion(#[from] InsertionError),
}

impl From<TypeError> for ReductionError {
    fn from(e: TypeError) -> Self {
        ReductionError::IllTyped(Box::new(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReductionConfig {
    /// Fire insertion redexes whose inner context is a disc.
    pub allow_disc_insertion: bool,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig { allow_disc_insertion: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PosStep {
    Arg(usize),
    Ty,
    Src,
    Base,
    Tgt,
}

/// A path from the root of a term, type or substitution to a subterm.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Position(pub Vec<PosStep>);

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|s| match s {
                PosStep::Arg(i) => format!("arg{i}"),
                PosStep::Ty => "ty".into(),
                PosStep::Src => "src".into(),
                PosStep::Base => "base".into(),
                PosStep::Tgt => "tgt".into(),
            })
            .collect();
        f.write_str(&parts.join("."))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RedexRule {
    Insertion,
    CellReduction,
    ArgumentReduction,
    TypeComponent,
    SubComponent,
}

impl fmt::Display for RedexRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RedexRule::Insertion => "insertion",
            RedexRule::CellReduction => "cell",
            RedexRule::ArgumentReduction => "argument",
            RedexRule::TypeComponent => "type",
            RedexRule::SubComponent => "substitution",
        })
    }
}

/// The insertion underlying a redex: `σ(x) = Coh Θ B τ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InsertionSite {
    pub x: Name,
    pub inner: Ctx,
    pub inner_type: Type,
    pub args: Sub,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Redex {
    /// Outermost rule used to reach the insertion.
    pub rule: RedexRule,
    pub position: Position,
    pub site: InsertionSite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub redex: Redex,
    /// The subterm at the redex position before and after the step.
    pub before: Term,
    pub after: Term,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {} ⇝ {}", self.redex.rule, self.redex.position, self.before, self.after)
    }
}

#[derive(Clone, Copy)]
enum Root {
    Term,
    Type,
    Sub,
}

fn rule_for(root: Root, pos: &[PosStep]) -> RedexRule {
    match (root, pos.first()) {
        (Root::Term, None) => RedexRule::Insertion,
        (Root::Term, Some(PosStep::Arg(_))) => RedexRule::ArgumentReduction,
        (Root::Term, Some(_)) => RedexRule::CellReduction,
        (Root::Type, _) => RedexRule::TypeComponent,
        (Root::Sub, _) => RedexRule::SubComponent,
    }
}

/// A step found inside some syntax: where, what, the rewritten subterm at
/// that position, and the rewritten whole.
struct Found<T> {
    pos: Vec<PosStep>,
    site: InsertionSite,
    before: Term,
    after: Term,
    whole: T,
}

impl<T> Found<T> {
    fn map<U>(self, step: PosStep, f: impl FnOnce(T) -> U) -> Found<U> {
        let mut pos = vec![step];
        pos.extend(self.pos);
        Found { pos, site: self.site, before: self.before, after: self.after, whole: f(self.whole) }
    }

    fn redex(&self, root: Root) -> Redex {
        Redex { rule: rule_for(root, &self.pos), position: Position(self.pos.clone()), site: self.site.clone() }
    }
}

// ---------------------------------------------------------------------------
// the insertion redex

/// Insertion redexes at the root of `Coh Δ A σ`, in context order of `x`.
fn root_insertions(c: &Coh, cfg: ReductionConfig, first_only: bool) -> Vec<(InsertionSite, Term)> {
    let mut out = Vec::new();
    let Ok(tree) = Tree::from_ctx(&c.ctx) else {
        return out;
    };
    let Ok(lm) = locally_maximal(&c.ctx) else {
        return out;
    };
    for x in c.ctx.names().filter(|n| lm.contains(*n)) {
        let Some(Term::Coh(inner)) = c.sub.get(x) else {
            continue;
        };
        if !cfg.allow_disc_insertion && is_disc(&inner.ctx) {
            continue;
        }
        if !is_unbiased(c.sub.get(x).expect("present")) {
            continue;
        }
        let (Ok(bh), Ok(inner_tree)) = (tree.branching_height(x), Tree::from_ctx(&inner.ctx)) else {
            continue;
        };
        if bh > inner_tree.linear_height() {
            continue;
        }
        let Ok(result) = insert_at(c, x, inner) else {
            continue;
        };
        out.push((
            InsertionSite { x: x.clone(), inner: inner.ctx.clone(), inner_type: inner.ty.clone(), args: inner.sub.clone() },
            result,
        ));
        if first_only {
            break;
        }
    }
    out
}

/// `Coh (Δ ▷_x Θ) (A[κ]) (σ ▷_x τ)` for `σ(x) = Coh Θ B τ`.
fn insert_at(c: &Coh, x: &Name, inner: &Coh) -> Result<Term, ReductionError> {
    let res = insert_ctx(&InsertionProblem {
        outer: c.ctx.clone(),
        x: x.clone(),
        inner: inner.ctx.clone(),
        inner_type: inner.ty.clone(),
    })?;
    let ty = apply_type(&c.ty, &res.kappa)?;
    let sub = insert_sub(&c.sub, x, &inner.sub, &res)?;
    Ok(Term::coh(res.inserted, ty, sub))
}

// ---------------------------------------------------------------------------
// enumeration of one-step reducts (raw relation)

fn all_term(t: &Term, cfg: ReductionConfig, out: &mut Vec<Found<Term>>) {
    let Term::Coh(c) = t else {
        return;
    };
    for (i, u) in c.sub.terms().enumerate() {
        let mut inner = Vec::new();
        all_term(u, cfg, &mut inner);
        out.extend(
            inner
                .into_iter()
                .map(|f| f.map(PosStep::Arg(i), |r| Term::coh(c.ctx.clone(), c.ty.clone(), c.sub.with_term(i, r)))),
        );
    }
    let mut inner = Vec::new();
    all_type(&c.ty, cfg, &mut inner);
    out.extend(inner.into_iter().map(|f| f.map(PosStep::Ty, |r| Term::coh(c.ctx.clone(), r, c.sub.clone()))));
    for (site, result) in root_insertions(c, cfg, false) {
        out.push(Found { pos: vec![], site, before: t.clone(), after: result.clone(), whole: result });
    }
}

fn all_type(ty: &Type, cfg: ReductionConfig, out: &mut Vec<Found<Type>>) {
    let Some(a) = ty.as_arrow() else {
        return;
    };
    let mut inner = Vec::new();
    all_term(&a.src, cfg, &mut inner);
    out.extend(inner.into_iter().map(|f| f.map(PosStep::Src, |r| Type::arr(r, a.base.clone(), a.tgt.clone()))));
    let mut inner = Vec::new();
    all_type(&a.base, cfg, &mut inner);
    out.extend(inner.into_iter().map(|f| f.map(PosStep::Base, |r| Type::arr(a.src.clone(), r, a.tgt.clone()))));
    let mut inner = Vec::new();
    all_term(&a.tgt, cfg, &mut inner);
    out.extend(inner.into_iter().map(|f| f.map(PosStep::Tgt, |r| Type::arr(a.src.clone(), a.base.clone(), r))));
}

fn all_sub(sub: &Sub, cfg: ReductionConfig, out: &mut Vec<Found<Sub>>) {
    for (i, u) in sub.terms().enumerate() {
        let mut inner = Vec::new();
        all_term(u, cfg, &mut inner);
        out.extend(inner.into_iter().map(|f| f.map(PosStep::Arg(i), |r| sub.with_term(i, r))));
    }
}

/// Every one-step reduct of a raw term, in innermost-leftmost order.
pub fn raw_steps_term(t: &Term, cfg: ReductionConfig) -> Vec<(Redex, Term)> {
    let mut found = Vec::new();
    all_term(t, cfg, &mut found);
    found.into_iter().map(|f| (f.redex(Root::Term), f.whole)).collect()
}

pub fn raw_steps_type(ty: &Type, cfg: ReductionConfig) -> Vec<(Redex, Type)> {
    let mut found = Vec::new();
    all_type(ty, cfg, &mut found);
    found.into_iter().map(|f| (f.redex(Root::Type), f.whole)).collect()
}

pub fn raw_steps_sub(sub: &Sub, cfg: ReductionConfig) -> Vec<(Redex, Sub)> {
    let mut found = Vec::new();
    all_sub(sub, cfg, &mut found);
    found.into_iter().map(|f| (f.redex(Root::Sub), f.whole)).collect()
}

// ---------------------------------------------------------------------------
// innermost-leftmost step

fn first_term(t: &Term, cfg: ReductionConfig) -> Option<Found<Term>> {
    let Term::Coh(c) = t else {
        return None;
    };
    for (i, u) in c.sub.terms().enumerate() {
        if let Some(f) = first_term(u, cfg) {
            return Some(f.map(PosStep::Arg(i), |r| Term::coh(c.ctx.clone(), c.ty.clone(), c.sub.with_term(i, r))));
        }
    }
    if let Some(f) = first_type(&c.ty, cfg) {
        return Some(f.map(PosStep::Ty, |r| Term::coh(c.ctx.clone(), r, c.sub.clone())));
    }
    root_insertions(c, cfg, true)
        .into_iter()
        .next()
        .map(|(site, result)| Found { pos: vec![], site, before: t.clone(), after: result.clone(), whole: result })
}

fn first_type(ty: &Type, cfg: ReductionConfig) -> Option<Found<Type>> {
    let a = ty.as_arrow()?;
    if let Some(f) = first_term(&a.src, cfg) {
        return Some(f.map(PosStep::Src, |r| Type::arr(r, a.base.clone(), a.tgt.clone())));
    }
    if let Some(f) = first_type(&a.base, cfg) {
        return Some(f.map(PosStep::Base, |r| Type::arr(a.src.clone(), r, a.tgt.clone())));
    }
    first_term(&a.tgt, cfg).map(|f| f.map(PosStep::Tgt, |r| Type::arr(a.src.clone(), a.base.clone(), r)))
}

/// The innermost-leftmost step: the first redex met in a post-order walk
/// visiting arguments left to right, then the type, then the node itself.
pub fn raw_first_step_term(t: &Term, cfg: ReductionConfig) -> Option<(TraceStep, Term)> {
    first_term(t, cfg).map(|f| {
        let step = TraceStep { redex: f.redex(Root::Term), before: f.before.clone(), after: f.after.clone() };
        (step, f.whole)
    })
}

pub fn raw_first_step_type(ty: &Type, cfg: ReductionConfig) -> Option<(TraceStep, Type)> {
    first_type(ty, cfg).map(|f| {
        let step = TraceStep { redex: f.redex(Root::Type), before: f.before.clone(), after: f.after.clone() };
        (step, f.whole)
    })
}

// ---------------------------------------------------------------------------
// normalization

thread_local! {
    static NF: RefCell<HashMap<(bool, Term), Term>> = RefCell::new(HashMap::new());
}

/// `N(t)` on raw syntax, computed bottom-up.
pub fn nf_term(t: &Term, cfg: ReductionConfig) -> Term {
    let Term::Coh(c) = t else {
        return t.clone();
    };
    let key = (cfg.allow_disc_insertion, t.clone());
    if let Some(hit) = NF.with(|m| m.borrow().get(&key).cloned()) {
        return hit;
    }
    let sub = c.sub.map_terms(|u| Ok::<_, ()>(nf_term(u, cfg))).expect("infallible");
    let ty = nf_type(&c.ty, cfg);
    let reduced = Term::coh(c.ctx.clone(), ty, sub);
    let c2 = reduced.as_coh().expect("coherence");
    let result = match root_insertions(c2, cfg, true).into_iter().next() {
        Some((_, next)) => nf_term(&next, cfg),
        None => reduced,
    };
    NF.with(|m| {
        let mut m = m.borrow_mut();
        if m.len() > 1 << 16 {
            m.clear();
        }
        m.insert(key, result.clone());
    });
    result
}

pub fn nf_type(ty: &Type, cfg: ReductionConfig) -> Type {
    match ty.as_arrow() {
        None => Type::Star,
        Some(a) => Type::arr(nf_term(&a.src, cfg), nf_type(&a.base, cfg), nf_term(&a.tgt, cfg)),
    }
}

pub fn nf_sub(sub: &Sub, cfg: ReductionConfig) -> Sub {
    sub.map_terms(|u| Ok::<_, ()>(nf_term(u, cfg))).expect("infallible")
}

/// `N(t)` by iterating the innermost-leftmost step, recording each step.
pub fn nf_term_traced(t: &Term, cfg: ReductionConfig) -> (Term, Vec<TraceStep>) {
    let mut cur = t.clone();
    let mut trace = Vec::new();
    while let Some((step, next)) = raw_first_step_term(&cur, cfg) {
        trace.push(step);
        cur = next;
    }
    (cur, trace)
}

pub fn nf_type_traced(ty: &Type, cfg: ReductionConfig) -> (Type, Vec<TraceStep>) {
    let mut cur = ty.clone();
    let mut trace = Vec::new();
    while let Some((step, next)) = raw_first_step_type(&cur, cfg) {
        trace.push(step);
        cur = next;
    }
    (cur, trace)
}

/// Equality of normal forms up to renaming, with no typing check.
pub fn convertible_term(a: &Term, b: &Term, cfg: ReductionConfig) -> bool {
    alpha_eq_term(a, b) || alpha_eq_term(&nf_term(a, cfg), &nf_term(b, cfg))
}

pub fn convertible_type(a: &Type, b: &Type, cfg: ReductionConfig) -> bool {
    alpha_eq_type(a, b) || alpha_eq_type(&nf_type(a, cfg), &nf_type(b, cfg))
}

pub fn convertible_sub(a: &Sub, b: &Sub, cfg: ReductionConfig) -> bool {
    a.len() == b.len() && a.terms().zip(b.terms()).all(|(s, t)| convertible_term(s, t, cfg))
}

// ---------------------------------------------------------------------------
// typed interface

fn ensure_term(ctx: &Ctx, t: &Term, cfg: ReductionConfig) -> Result<Type, ReductionError> {
    typecheck::check_ctx_with(ctx, Mode::CattSa, cfg)?;
    Ok(typecheck::infer_term_with(ctx, t, Mode::CattSa, cfg)?)
}

fn ensure_type(ctx: &Ctx, ty: &Type, cfg: ReductionConfig) -> Result<(), ReductionError> {
    typecheck::check_ctx_with(ctx, Mode::CattSa, cfg)?;
    typecheck::check_type_with(ctx, ty, Mode::CattSa, cfg)?;
    Ok(())
}

/// The one-step reducts of a well-typed term.
pub fn step_candidates(ctx: &Ctx, t: &Term) -> Result<Vec<(Redex, Term)>, ReductionError> {
    step_candidates_with(ctx, t, ReductionConfig::default())
}

pub fn step_candidates_with(ctx: &Ctx, t: &Term, cfg: ReductionConfig) -> Result<Vec<(Redex, Term)>, ReductionError> {
    ensure_term(ctx, t, cfg)?;
    Ok(raw_steps_term(t, cfg))
}

pub fn step_candidates_type(ctx: &Ctx, ty: &Type) -> Result<Vec<(Redex, Type)>, ReductionError> {
    let cfg = ReductionConfig::default();
    ensure_type(ctx, ty, cfg)?;
    Ok(raw_steps_type(ty, cfg))
}

pub fn normalize(ctx: &Ctx, t: &Term) -> Result<Term, ReductionError> {
    normalize_with(ctx, t, ReductionConfig::default())
}

pub fn normalize_with(ctx: &Ctx, t: &Term, cfg: ReductionConfig) -> Result<Term, ReductionError> {
    ensure_term(ctx, t, cfg)?;
    Ok(nf_term(t, cfg))
}

pub fn normalize_type(ctx: &Ctx, ty: &Type) -> Result<Type, ReductionError> {
    let cfg = ReductionConfig::default();
    ensure_type(ctx, ty, cfg)?;
    Ok(nf_type(ty, cfg))
}

pub fn def_eq(ctx: &Ctx, a: &Term, b: &Term) -> Result<bool, ReductionError> {
    def_eq_with(ctx, a, b, ReductionConfig::default())
}

pub fn def_eq_with(ctx: &Ctx, a: &Term, b: &Term, cfg: ReductionConfig) -> Result<bool, ReductionError> {
    ensure_term(ctx, a, cfg)?;
    ensure_term(ctx, b, cfg)?;
    Ok(alpha_eq_term(&nf_term(a, cfg), &nf_term(b, cfg)))
}

pub fn def_eq_type(ctx: &Ctx, a: &Type, b: &Type) -> Result<bool, ReductionError> {
    let cfg = ReductionConfig::default();
    ensure_type(ctx, a, cfg)?;
    ensure_type(ctx, b, cfg)?;
    Ok(alpha_eq_type(&nf_type(a, cfg), &nf_type(b, cfg)))
}

// ---------------------------------------------------------------------------
// =_n

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EqLevel(pub usize);

/// `a =_n b` on well-typed terms.
pub fn eq_at_level(ctx: &Ctx, a: &Term, b: &Term, n: EqLevel) -> Result<bool, ReductionError> {
    let cfg = ReductionConfig::default();
    ensure_term(ctx, a, cfg)?;
    ensure_term(ctx, b, cfg)?;
    eq_n_term(ctx, a, b, n.0, cfg)
}

fn eq_n_term(ctx: &Ctx, a: &Term, b: &Term, n: usize, cfg: ReductionConfig) -> Result<bool, ReductionError> {
    let (da, db) = (dim_term(ctx, a)?, dim_term(ctx, b)?);
    if da < n && db < n {
        return Ok(convertible_term(a, b, cfg));
    }
    if da < n {
        return Ok(false);
    }
    match (a, b) {
        (Term::Var(_), _) => Ok(alpha_eq_term(a, b)),
        (Term::Coh(c), Term::Coh(d)) => {
            if !alpha_eq_ctx(&c.ctx, &d.ctx) {
                return Ok(false);
            }
            let map: HashMap<Name, Name> = d.ctx.names().cloned().zip(c.ctx.names().cloned()).collect();
            let d_ty = rename_type(&d.ty, &map);
            Ok(eq_n_type(&c.ctx, &c.ty, &d_ty, n, cfg)? && eq_n_sub(ctx, &c.sub, &d.sub, n, cfg)?)
        }
        (Term::Coh(_), Term::Var(_)) => Ok(false),
    }
}

fn eq_n_type(ctx: &Ctx, a: &Type, b: &Type, n: usize, cfg: ReductionConfig) -> Result<bool, ReductionError> {
    match (a.as_arrow(), b.as_arrow()) {
        (None, None) => Ok(true),
        (Some(x), Some(y)) => Ok(eq_n_term(ctx, &x.src, &y.src, n, cfg)?
            && eq_n_term(ctx, &x.tgt, &y.tgt, n, cfg)?
            && eq_n_type(ctx, &x.base, &y.base, n, cfg)?),
        _ => Ok(false),
    }
}

fn eq_n_sub(ctx: &Ctx, a: &Sub, b: &Sub, n: usize, cfg: ReductionConfig) -> Result<bool, ReductionError> {
    if a.len() != b.len() {
        return Ok(false);
    }
    for (s, t) in a.terms().zip(b.terms()) {
        if !eq_n_term(ctx, s, t, n, cfg)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `a =_n b` on raw syntax, used where both sides are known to be typed.
pub fn eq_at_level_unchecked(ctx: &Ctx, a: &Term, b: &Term, n: usize) -> Result<bool, ReductionError> {
    eq_n_term(ctx, a, b, n, ReductionConfig::default())
}

// ---------------------------------------------------------------------------
// regularity

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Height {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Finite(n) => write!(f, "{n}"),
            Height::Infinite => f.write_str("∞"),
        }
    }
}

/// The regular height of a term, or `None` when it is not regular.
pub fn regular_height_raw(t: &Term) -> Option<Height> {
    let Term::Coh(c) = t else {
        return Some(Height::Infinite);
    };
    if is_disc(&c.ctx) {
        return None;
    }
    if !unbiased_type(&c.ctx).is_ok_and(|u| alpha_eq_type(&u, &c.ty)) {
        return None;
    }
    let tree = Tree::from_ctx(&c.ctx).ok()?;
    let lm = locally_maximal(&c.ctx).ok()?;
    let mut heights = HashMap::new();
    for (x, u) in c.sub.entries() {
        heights.insert(x.clone(), regular_height_raw(u)?);
    }
    for x in &lm {
        let bh = tree.branching_height(x).ok()?;
        if Height::Finite(bh) >= heights[x] {
            return None;
        }
    }
    Some(Height::Finite(tree.linear_height()))
}

pub fn is_regular(ctx: &Ctx, t: &Term) -> Result<bool, ReductionError> {
    Ok(regular_height(ctx, t)?.is_some())
}

pub fn regular_height(ctx: &Ctx, t: &Term) -> Result<Option<Height>, ReductionError> {
    ensure_term(ctx, t, ReductionConfig::default())?;
    Ok(regular_height_raw(t))
}
