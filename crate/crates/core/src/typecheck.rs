//! Typing judgements for contexts, types, substitutions and terms, in Catt
//! (syntactic equality) or Catt_sa (equality by normalization).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::pasting::{boundary_ctx, check_pd, PdError};
use crate::reduction::{convertible_term, convertible_type, ReductionConfig};
use crate::syntax::{
    alpha_eq_term, alpha_eq_type, apply_term, apply_type, dim_term, support_term, support_type, term_boundary, Ctx,
    Name, Sign, Sub, SyntaxError, Term, Type, VarSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    Catt,
    #[default]
    CattSa,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Catt => "catt",
            Mode::CattSa => "sa",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "catt" => Ok(Mode::Catt),
            "sa" | "catt-sa" => Ok(Mode::CattSa),
            other => Err(format!("unknown mode `{other}` (expected `catt` or `sa`)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(Name),
    #[error("unknown variable `{0}`")]
    UnknownVariable(Name),
    #[error("coherence over a non-pasting context: {0}")]
    NotPasting(PdError),
    #[error("endpoint `{term}` has type `{found}` but the arrow is over `{expected}`")]
    EndpointTypeMismatch { term: Term, expected: Type, found: Type },
    #[error("`{term}` has type `{found}`, expected `{expected}`")]
    TypeMismatch { term: Term, expected: Type, found: Type },
    #[error("substitution has {found} entries for a context with {expected} variables")]
    ArityMismatch { expected: usize, found: usize },
    #[error("substitution entry `{found}` where `{expected}` was expected")]
    DomainMismatch { expected: Name, found: Name },
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("context is not globular: {0}")]
    NotGlobular(String),
    #[error("globularity violation at `{var}`: {reason}")]
    GlobularityViolation { var: Name, reason: String },
    #[error("expected {full} arguments (or {explicit} explicit ones), found {found}")]
    ArgumentCount { full: usize, explicit: usize, found: usize },
    #[error("cannot recover the argument for `{0}`")]
    Unrecoverable(Name),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Judgement {
    Ctx,
    Type,
    Sub,
    Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    CtxEmpty,
    CtxExt(Name),
    TyStar,
    TyArr,
    SubEmpty,
    SubExt(Name),
    Var(Name),
    Comp,
    Coh,
    Conv,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::CtxEmpty => f.write_str("ctx-empty"),
            Rule::CtxExt(x) => write!(f, "ctx-ext {x}"),
            Rule::TyStar => f.write_str("ty-star"),
            Rule::TyArr => f.write_str("ty-arr"),
            Rule::SubEmpty => f.write_str("sub-empty"),
            Rule::SubExt(x) => write!(f, "sub-ext {x}"),
            Rule::Var(x) => write!(f, "var {x}"),
            Rule::Comp => f.write_str("comp"),
            Rule::Coh => f.write_str("coh"),
            Rule::Conv => f.write_str("conv"),
        }
    }
}

/// Result of a successful judgement: the rules applied, in post-order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypingReport {
    pub judgement: Judgement,
    pub subject: String,
    pub inferred: Option<Type>,
    pub trace: Vec<Rule>,
}

struct Checker {
    mode: Mode,
    cfg: ReductionConfig,
    trace: Vec<Rule>,
}

impl Checker {
    fn new(mode: Mode, cfg: ReductionConfig) -> Checker {
        Checker { mode, cfg, trace: Vec::new() }
    }

    fn report(self, judgement: Judgement, subject: String, inferred: Option<Type>) -> TypingReport {
        TypingReport { judgement, subject, inferred, trace: self.trace }
    }

    fn eq_type(&self, a: &Type, b: &Type) -> bool {
        match self.mode {
            Mode::Catt => alpha_eq_type(a, b),
            Mode::CattSa => convertible_type(a, b, self.cfg),
        }
    }

    fn ctx(&mut self, ctx: &Ctx) -> Result<(), TypeError> {
        self.trace.push(Rule::CtxEmpty);
        let mut seen = VarSet::new();
        for (i, (x, ty)) in ctx.entries().iter().enumerate() {
            if !seen.insert(x.clone()) {
                return Err(TypeError::DuplicateVariable(x.clone()));
            }
            self.ty(&ctx.prefix(i), ty)?;
            self.trace.push(Rule::CtxExt(x.clone()));
        }
        Ok(())
    }

    fn ty(&mut self, ctx: &Ctx, ty: &Type) -> Result<(), TypeError> {
        let Some(a) = ty.as_arrow() else {
            self.trace.push(Rule::TyStar);
            return Ok(());
        };
        self.ty(ctx, &a.base)?;
        for end in [&a.src, &a.tgt] {
            let found = self.infer(ctx, end)?;
            if !self.eq_type(&found, &a.base) {
                return Err(TypeError::EndpointTypeMismatch { term: end.clone(), expected: a.base.clone(), found });
            }
        }
        self.trace.push(Rule::TyArr);
        Ok(())
    }

    /// `target ⊢ sub : source`
    fn sub(&mut self, target: &Ctx, sub: &Sub, source: &Ctx) -> Result<(), TypeError> {
        if sub.len() != source.len() {
            return Err(TypeError::ArityMismatch { expected: source.len(), found: sub.len() });
        }
        self.trace.push(Rule::SubEmpty);
        for ((x, a), (y, t)) in source.entries().iter().zip(sub.entries()) {
            if x != y {
                return Err(TypeError::DomainMismatch { expected: x.clone(), found: y.clone() });
            }
            let expected = apply_type(a, sub)?;
            self.check(target, t, &expected)?;
            self.trace.push(Rule::SubExt(x.clone()));
        }
        Ok(())
    }

    fn check(&mut self, ctx: &Ctx, t: &Term, expected: &Type) -> Result<(), TypeError> {
        let found = self.infer(ctx, t)?;
        if alpha_eq_type(&found, expected) {
            return Ok(());
        }
        if self.eq_type(&found, expected) {
            self.trace.push(Rule::Conv);
            return Ok(());
        }
        Err(TypeError::TypeMismatch { term: t.clone(), expected: expected.clone(), found })
    }

    fn infer(&mut self, ctx: &Ctx, t: &Term) -> Result<Type, TypeError> {
        match t {
            Term::Var(x) => {
                let ty = ctx.lookup(x).ok_or_else(|| TypeError::UnknownVariable(x.clone()))?;
                self.trace.push(Rule::Var(x.clone()));
                Ok(ty.clone())
            }
            Term::Coh(c) => {
                check_pd(&c.ctx).map_err(TypeError::NotPasting)?;
                self.ty(&c.ctx, &c.ty)?;
                self.sub(ctx, &c.sub, &c.ctx)?;
                let rule = head_rule(&c.ctx, &c.ty)?;
                self.trace.push(rule);
                Ok(apply_type(&c.ty, &c.sub)?)
            }
        }
    }
}

/// Decides between `(coh)` and `(comp)` from the support conditions.
fn head_rule(ctx: &Ctx, ty: &Type) -> Result<Rule, TypeError> {
    let all = ctx.var_set();
    let full = support_type(ctx, ty)?;
    if full == all {
        return Ok(Rule::Coh);
    }
    let mut reasons = vec![format!("type support {} is not the whole context", show(&full))];
    match ty.as_arrow() {
        None => reasons.push("a composite needs an arrow type".into()),
        Some(_) if ctx.dim() < 1 => reasons.push("a composite needs a context of dimension at least 1".into()),
        Some(a) => {
            for (sign, end, label) in [(Sign::Src, &a.src, "source"), (Sign::Tgt, &a.tgt, "target")] {
                let boundary = boundary_ctx(ctx, sign).map_err(TypeError::NotPasting)?.var_set();
                let supp = support_term(ctx, end)?;
                if supp != boundary {
                    let which = if sign == Sign::Src { "∂⁻" } else { "∂⁺" };
                    reasons.push(format!(
                        "{label} support {} differs from {which} {}",
                        show(&supp),
                        show(&boundary)
                    ));
                }
            }
            if reasons.len() == 1 {
                return Ok(Rule::Comp);
            }
        }
    }
    Err(TypeError::SupportViolation(reasons.join("; ")))
}

fn show(set: &VarSet) -> String {
    let names: Vec<&str> = set.iter().map(Name::as_str).collect();
    format!("{{{}}}", names.join(", "))
}

pub fn check_ctx(ctx: &Ctx, mode: Mode) -> Result<TypingReport, TypeError> {
    check_ctx_with(ctx, mode, ReductionConfig::default())
}

pub fn check_ctx_with(ctx: &Ctx, mode: Mode, cfg: ReductionConfig) -> Result<TypingReport, TypeError> {
    let mut c = Checker::new(mode, cfg);
    c.ctx(ctx)?;
    Ok(c.report(Judgement::Ctx, ctx.to_string(), None))
}

pub fn check_type(ctx: &Ctx, ty: &Type, mode: Mode) -> Result<TypingReport, TypeError> {
    check_type_with(ctx, ty, mode, ReductionConfig::default())
}

pub fn check_type_with(ctx: &Ctx, ty: &Type, mode: Mode, cfg: ReductionConfig) -> Result<TypingReport, TypeError> {
    let mut c = Checker::new(mode, cfg);
    c.ty(ctx, ty)?;
    Ok(c.report(Judgement::Type, ty.to_string(), None))
}

/// `target ⊢ sub : source`.
pub fn check_sub(target: &Ctx, sub: &Sub, source: &Ctx, mode: Mode) -> Result<TypingReport, TypeError> {
    check_sub_with(target, sub, source, mode, ReductionConfig::default())
}

pub fn check_sub_with(
    target: &Ctx,
    sub: &Sub,
    source: &Ctx,
    mode: Mode,
    cfg: ReductionConfig,
) -> Result<TypingReport, TypeError> {
    let mut c = Checker::new(mode, cfg);
    c.sub(target, sub, source)?;
    Ok(c.report(Judgement::Sub, sub.to_string(), None))
}

pub fn check_term(ctx: &Ctx, t: &Term, ty: &Type, mode: Mode) -> Result<TypingReport, TypeError> {
    check_term_with(ctx, t, ty, mode, ReductionConfig::default())
}

pub fn check_term_with(
    ctx: &Ctx,
    t: &Term,
    ty: &Type,
    mode: Mode,
    cfg: ReductionConfig,
) -> Result<TypingReport, TypeError> {
    let mut c = Checker::new(mode, cfg);
    c.check(ctx, t, ty)?;
    Ok(c.report(Judgement::Term, t.to_string(), Some(ty.clone())))
}

/// The substituted head type of a coherence, or the declared type of a
/// variable. Not normalized.
pub fn infer_term(ctx: &Ctx, t: &Term, mode: Mode) -> Result<Type, TypeError> {
    infer_term_with(ctx, t, mode, ReductionConfig::default())
}

pub fn infer_term_with(ctx: &Ctx, t: &Term, mode: Mode, cfg: ReductionConfig) -> Result<Type, TypeError> {
    Checker::new(mode, cfg).infer(ctx, t)
}

pub fn infer_report(ctx: &Ctx, t: &Term, mode: Mode) -> Result<TypingReport, TypeError> {
    let mut c = Checker::new(mode, ReductionConfig::default());
    let ty = c.infer(ctx, t)?;
    Ok(c.report(Judgement::Term, t.to_string(), Some(ty)))
}

/// A context all of whose types mention only variables.
pub fn is_globular(ctx: &Ctx) -> bool {
    fn type_ok(ty: &Type) -> bool {
        ty.as_arrow().is_none_or(|a| a.src.is_var() && a.tgt.is_var() && type_ok(&a.base))
    }
    ctx.entries().iter().all(|(_, ty)| type_ok(ty))
}

/// Checks that `sub : source → target` sends each variable to a
/// well-typed term of the same dimension and commutes with boundaries.
pub fn check_well_formed_sub(source: &Ctx, sub: &Sub, target: &Ctx) -> Result<(), TypeError> {
    check_well_formed_sub_with(source, sub, target, ReductionConfig::default())
}

pub fn check_well_formed_sub_with(
    source: &Ctx,
    sub: &Sub,
    target: &Ctx,
    cfg: ReductionConfig,
) -> Result<(), TypeError> {
    if !is_globular(source) {
        return Err(TypeError::NotGlobular(source.to_string()));
    }
    if sub.len() != source.len() {
        return Err(TypeError::ArityMismatch { expected: source.len(), found: sub.len() });
    }
    for ((x, a), (y, u)) in source.entries().iter().zip(sub.entries()) {
        if x != y {
            return Err(TypeError::DomainMismatch { expected: x.clone(), found: y.clone() });
        }
        infer_term_with(target, u, Mode::CattSa, cfg)?;
        let d = dim_term(target, u)?;
        if d != a.dim() {
            return Err(TypeError::GlobularityViolation {
                var: x.clone(),
                reason: format!("image has dimension {d}, variable has dimension {}", a.dim()),
            });
        }
        let Some(arrow) = a.as_arrow() else {
            continue;
        };
        for (sign, end) in [(Sign::Src, &arrow.src), (Sign::Tgt, &arrow.tgt)] {
            let boundary = term_boundary(target, u, d - 1, sign)?;
            let image = apply_term(end, sub)?;
            if !alpha_eq_term(&boundary, &image) && !convertible_term(&boundary, &image, cfg) {
                return Err(TypeError::GlobularityViolation {
                    var: x.clone(),
                    reason: format!("δ{sign}({u}) = {boundary} but the endpoint is sent to {image}"),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pasting::{unbiased_term, unbiased_type};
    use crate::syntax::build::*;

    fn arrow() -> Ctx {
        ctx(&[("x", Type::Star), ("y", Type::Star), ("f", arr0("x", "y"))])
    }

    fn binary() -> Ctx {
        arrow().with("z", Type::Star).with("g", arr0("y", "z"))
    }

    #[test]
    fn contexts() {
        assert!(check_ctx(&Ctx::new(), Mode::Catt).is_ok());
        assert!(check_ctx(&arrow(), Mode::Catt).is_ok());
        let unbound = ctx(&[("x", Type::Star), ("f", arr0("x", "y"))]);
        assert_eq!(check_ctx(&unbound, Mode::Catt), Err(TypeError::UnknownVariable(Name::new("y"))));
        let dup = ctx(&[("x", Type::Star), ("x", Type::Star)]);
        assert_eq!(check_ctx(&dup, Mode::Catt), Err(TypeError::DuplicateVariable(Name::new("x"))));
    }

    #[test]
    fn types() {
        assert!(check_type(&arrow(), &Type::Star, Mode::Catt).is_ok());
        assert!(check_type(&arrow(), &arr0("x", "y"), Mode::Catt).is_ok());
        let bad = Type::arr(v("x"), Type::Star, v("f"));
        assert!(matches!(check_type(&arrow(), &bad, Mode::Catt), Err(TypeError::EndpointTypeMismatch { .. })));
    }

    #[test]
    fn substitutions() {
        assert!(check_sub(&arrow(), &Sub::new(), &Ctx::new(), Mode::Catt).is_ok());
        assert!(check_sub(&binary(), &binary().identity(), &binary(), Mode::Catt).is_ok());
        let short = sub(&[("x", v("x"))]);
        assert!(matches!(check_sub(&arrow(), &short, &arrow(), Mode::Catt), Err(TypeError::ArityMismatch { .. })));
    }

    #[test]
    fn terms() {
        let x = ctx(&[("x", Type::Star)]);
        assert!(check_term(&x, &v("x"), &Type::Star, Mode::Catt).is_ok());
        let comp = unbiased_term(&binary()).unwrap();
        assert_eq!(infer_term(&binary(), &comp, Mode::Catt).unwrap(), arr0("x", "z"));
        let report = infer_report(&binary(), &comp, Mode::Catt).unwrap();
        assert_eq!(report.trace.last(), Some(&Rule::Comp));
    }

    #[test]
    fn identity_uses_coh_rule() {
        let x = ctx(&[("x", Type::Star)]);
        let id = Term::coh(x.clone(), arr0("x", "x"), x.identity());
        let report = infer_report(&x, &id, Mode::Catt).unwrap();
        assert_eq!(report.trace.last(), Some(&Rule::Coh));
    }

    #[test]
    fn support_violation() {
        // A 1-cell composite f·g claimed to go from x to y.
        let bad = Term::coh(binary(), arr0("x", "y"), binary().identity());
        assert!(matches!(infer_term(&binary(), &bad, Mode::Catt), Err(TypeError::SupportViolation(_))));
        let not_pd = ctx(&[("x", Type::Star), ("y", Type::Star)]);
        let bad = Term::coh(not_pd.clone(), arr0("x", "y"), not_pd.identity());
        assert!(matches!(infer_term(&not_pd, &bad, Mode::Catt), Err(TypeError::NotPasting(_))));
    }

    #[test]
    fn unbiased_terms_infer_unbiased_types() {
        let theta = crate::tree::Tree::parse("[x [f [α] g [β] h] y]").unwrap().to_ctx();
        for c in [binary(), theta] {
            let t = unbiased_term(&c).unwrap();
            for mode in [Mode::Catt, Mode::CattSa] {
                assert_eq!(infer_term(&c, &t, mode).unwrap(), unbiased_type(&c).unwrap());
            }
        }
    }

    #[test]
    fn well_formed_identity() {
        assert!(check_well_formed_sub(&binary(), &binary().identity(), &binary()).is_ok());
        let swapped = sub(&[("x", v("y")), ("y", v("x")), ("f", v("f"))]);
        assert!(matches!(
            check_well_formed_sub(&arrow(), &swapped, &arrow()),
            Err(TypeError::GlobularityViolation { .. })
        ));
    }

    #[test]
    fn modes() {
        assert_eq!("catt".parse::<Mode>().unwrap(), Mode::Catt);
        assert_eq!("sa".parse::<Mode>().unwrap(), Mode::CattSa);
        assert!("x".parse::<Mode>().is_err());
    }
}

/// Variables of a context that occur in no variable's type. For a pasting
/// context these are the locally maximal ones.
pub fn explicit_vars(tele: &Ctx) -> Vec<Name> {
    let mut implicit = VarSet::new();
    for (_, ty) in tele.entries() {
        if let Ok(s) = support_type(tele, ty) {
            implicit.extend(s);
        }
    }
    tele.names().filter(|n| !implicit.contains(*n)).cloned().collect()
}

/// Builds a substitution out of `tele` from either all of its arguments or
/// only the explicit ones, recovering the rest from the inferred types of
/// the explicit arguments in `ctx`.
pub fn complete_sub(tele: &Ctx, args: Vec<Term>, ctx: &Ctx) -> Result<Sub, TypeError> {
    if args.len() == tele.len() {
        return Ok(Sub::over(tele, args)?);
    }
    let explicit = explicit_vars(tele);
    if args.len() != explicit.len() {
        return Err(TypeError::ArgumentCount { full: tele.len(), explicit: explicit.len(), found: args.len() });
    }
    let mut known: std::collections::HashMap<Name, Term> = std::collections::HashMap::new();
    for (x, t) in explicit.iter().zip(args) {
        let found = infer_term(ctx, &t, Mode::CattSa)?;
        let pattern = tele.lookup(x).expect("telescope variable");
        known.insert(x.clone(), t);
        unify(pattern, &found, &mut known);
    }
    let mut sub = Sub::new();
    for x in tele.names() {
        let t = known.get(x).ok_or_else(|| TypeError::Unrecoverable(x.clone()))?;
        sub.push(x.clone(), t.clone())?;
    }
    Ok(sub)
}

fn unify(pattern: &Type, found: &Type, known: &mut std::collections::HashMap<Name, Term>) {
    let (Some(p), Some(f)) = (pattern.as_arrow(), found.as_arrow()) else {
        return;
    };
    for (pe, fe) in [(&p.src, &f.src), (&p.tgt, &f.tgt)] {
        if let Term::Var(x) = pe {
            known.entry(x.clone()).or_insert_with(|| fe.clone());
        }
    }
    unify(&p.base, &f.base, known);
}
