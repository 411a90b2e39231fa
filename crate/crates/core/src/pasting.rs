//! Pasting contexts: the `⊢pd` judgement, boundary contexts, disc contexts,
//! unbiased composites and locally maximal variables.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::{
    alpha_eq_type, support_type, term_boundary, Ctx, Name, Sign, Sub, SyntaxError, Term, Type, VarSet,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PdError {
    #[error("not a pasting context (entry {position}): {reason}")]
    NotPasting { position: usize, reason: String },
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

fn not_pasting(position: usize, reason: impl Into<String>) -> PdError {
    PdError::NotPasting { position, reason: reason.into() }
}

/// One rule application in a `⊢pd` derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PdRule {
    /// `x : ⋆ ⊢pd x : ⋆`
    Start(Name),
    /// `⇑`: extend with a target `y` and a cell `f : x → y`.
    Up { target: Name, cell: Name },
    /// `⇓`: move from `f : x → y` to `y`.
    Down,
    /// `✓`: close a derivation whose dangling variable is 0-dimensional.
    Done,
}

/// A rule application together with the dangling judgement `Γ ⊢pd x : A`
/// it produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdStep {
    pub rule: PdRule,
    pub dangling: Option<(Name, Type)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdDerivation {
    pub steps: Vec<PdStep>,
}

impl PdDerivation {
    /// Rebuilds the judged context from the rule applications alone.
    pub fn replay(&self) -> Option<Ctx> {
        let mut ctx = Ctx::new();
        let mut dangling: Option<(Name, Type)> = None;
        for step in &self.steps {
            match &step.rule {
                PdRule::Start(x) => {
                    ctx.push(x.clone(), Type::Star);
                    dangling = Some((x.clone(), Type::Star));
                }
                PdRule::Up { target, cell } => {
                    let (x, a) = dangling.take()?;
                    ctx.push(target.clone(), a.clone());
                    let fty = Type::arr(Term::Var(x), a, Term::Var(target.clone()));
                    ctx.push(cell.clone(), fty.clone());
                    dangling = Some((cell.clone(), fty));
                }
                PdRule::Down => {
                    let (_, a) = dangling.take()?;
                    let arrow = a.as_arrow()?;
                    dangling = Some((arrow.tgt.as_var()?.clone(), arrow.base.clone()));
                }
                PdRule::Done => {
                    if dangling.as_ref()?.1 != Type::Star {
                        return None;
                    }
                }
            }
        }
        Some(ctx)
    }
}

impl fmt::Display for PdDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for step in &self.steps {
            match &step.rule {
                PdRule::Start(x) => write!(f, "⋆({x})")?,
                PdRule::Up { target, cell } => write!(f, " ⇑({target},{cell})")?,
                PdRule::Down => f.write_str(" ⇓")?,
                PdRule::Done => f.write_str(" ✓")?,
            }
        }
        Ok(())
    }
}

/// Decides `Γ ⊢pd`. Each extension step is forced by the next two entries,
/// so the derivation, when it exists, is unique.
pub fn check_pd(ctx: &Ctx) -> Result<PdDerivation, PdError> {
    let entries = ctx.entries();
    let Some((x0, t0)) = entries.first() else {
        return Err(not_pasting(0, "the empty context is not a pasting diagram"));
    };
    if *t0 != Type::Star {
        return Err(not_pasting(0, "the first variable must have type *"));
    }
    let mut seen = VarSet::new();
    seen.insert(x0.clone());
    let mut steps = vec![PdStep { rule: PdRule::Start(x0.clone()), dangling: Some((x0.clone(), Type::Star)) }];
    let mut dangling = (x0.clone(), Type::Star);

    let mut i = 1;
    while i < entries.len() {
        if i + 1 >= entries.len() {
            return Err(not_pasting(i, "a target variable must be followed by a cell"));
        }
        let (y, b) = &entries[i];
        let (f, c) = &entries[i + 1];
        for (pos, name) in [(i, y), (i + 1, f)] {
            if !seen.insert(name.clone()) {
                return Err(not_pasting(pos, format!("`{name}` is not fresh")));
            }
        }
        let Some(arrow) = c.as_arrow() else {
            return Err(not_pasting(i + 1, format!("`{f}` must be an arrow")));
        };
        let (Some(src), Some(tgt)) = (arrow.src.as_var(), arrow.tgt.as_var()) else {
            return Err(not_pasting(i + 1, format!("the endpoints of `{f}` must be variables")));
        };
        if tgt != y || arrow.base != *b {
            return Err(not_pasting(i + 1, format!("`{f}` must be a cell into `{y}` over the type of `{y}`")));
        }
        while dangling.1.dim() > b.dim() {
            dangling = down(&dangling.1);
            steps.push(PdStep { rule: PdRule::Down, dangling: Some(dangling.clone()) });
        }
        if dangling.0 != *src || dangling.1 != *b {
            return Err(not_pasting(
                i + 1,
                format!("the source of `{f}` must be `{}`, the current dangling variable", dangling.0),
            ));
        }
        dangling = (f.clone(), c.clone());
        steps.push(PdStep {
            rule: PdRule::Up { target: y.clone(), cell: f.clone() },
            dangling: Some(dangling.clone()),
        });
        i += 2;
    }
    while dangling.1.dim() > 0 {
        dangling = down(&dangling.1);
        steps.push(PdStep { rule: PdRule::Down, dangling: Some(dangling.clone()) });
    }
    steps.push(PdStep { rule: PdRule::Done, dangling: Some(dangling) });
    Ok(PdDerivation { steps })
}

fn down(ty: &Type) -> (Name, Type) {
    let a = ty.as_arrow().expect("positive dimension");
    (a.tgt.as_var().expect("pasting cells have variable endpoints").clone(), a.base.clone())
}

pub fn is_pasting(ctx: &Ctx) -> bool {
    check_pd(ctx).is_ok()
}

fn require_pd(ctx: &Ctx) -> Result<(), PdError> {
    check_pd(ctx).map(|_| ())
}

/// The `i`-dimensional source or target of a pasting context. Returns the
/// context itself when `i ≥ dim`.
pub fn boundary_at(ctx: &Ctx, i: usize, sign: Sign) -> Result<Ctx, PdError> {
    require_pd(ctx)?;
    let entries = ctx.entries();
    let mut out: Vec<(Name, Type)> = vec![entries[0].clone()];
    for pair in entries[1..].chunks(2) {
        let (y, a) = &pair[0];
        let d = a.dim();
        match sign {
            Sign::Src => {
                if d < i {
                    out.extend_from_slice(pair);
                }
            }
            Sign::Tgt => {
                if d < i {
                    out.extend_from_slice(pair);
                } else if d == i {
                    out.pop();
                    out.push((y.clone(), a.clone()));
                }
            }
        }
    }
    Ok(Ctx::from_entries(out))
}

/// `∂^ε(Γ)`: the boundary one dimension down. Requires `dim(Γ) ≥ 1`.
pub fn boundary_ctx(ctx: &Ctx, sign: Sign) -> Result<Ctx, PdError> {
    require_pd(ctx)?;
    let d = ctx.dim();
    if d < 1 {
        return Err(PdError::Dimension("a 0-dimensional pasting context has no boundary".into()));
    }
    boundary_at(ctx, (d - 1) as usize, sign)
}

/// A pasting context consisting of a single top cell and its boundary tower.
pub fn is_disc(ctx: &Ctx) -> bool {
    is_pasting(ctx) && ctx.len() as i64 == 2 * ctx.dim() + 1
}

/// `D_n` with its variables named `d{k}s` (source `k`-cell), `d{k}t`
/// (target `k`-cell) and `d{n}s` for the top cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscContext {
    pub n: usize,
    pub ctx: Ctx,
}

pub fn disc_name(k: usize, sign: Sign) -> Name {
    match sign {
        Sign::Src => Name::from(format!("d{k}s")),
        Sign::Tgt => Name::from(format!("d{k}t")),
    }
}

pub fn disc_context(n: usize) -> DiscContext {
    let mut ctx = Ctx::new().with(disc_name(0, Sign::Src), Type::Star);
    let mut ty = Type::Star;
    for k in 0..n {
        ctx.push(disc_name(k, Sign::Tgt), ty.clone());
        ty = Type::arr(Term::Var(disc_name(k, Sign::Src)), ty, Term::Var(disc_name(k, Sign::Tgt)));
        ctx.push(disc_name(k + 1, Sign::Src), ty.clone());
    }
    DiscContext { n, ctx }
}

/// `t̄ : D_n → Γ`, sending `d^ε_m ↦ δ^ε_m(t)` and the top cell to `t`.
pub fn to_disc_sub(ctx: &Ctx, t: &Term) -> Result<Sub, PdError> {
    let n = crate::syntax::dim_term(ctx, t)?;
    let disc = disc_context(n);
    let mut sub = Sub::new();
    for (name, _) in disc.ctx.entries() {
        let s = name.as_str();
        let k: usize = s[1..s.len() - 1].parse().expect("disc names are d{k}{s,t}");
        let sign = if s.ends_with('s') { Sign::Src } else { Sign::Tgt };
        sub.push(name.clone(), term_boundary(ctx, t, k, sign)?)?;
    }
    Ok(sub)
}

thread_local! {
    static UNBIASED: RefCell<HashMap<Ctx, (Term, Type)>> = RefCell::new(HashMap::new());
}

fn unbiased(ctx: &Ctx) -> Result<(Term, Type), PdError> {
    if let Some(hit) = UNBIASED.with(|m| m.borrow().get(ctx).cloned()) {
        return Ok(hit);
    }
    require_pd(ctx)?;
    let result = if is_disc(ctx) {
        let (top, ty) = ctx.entries().last().expect("non-empty").clone();
        (Term::Var(top), ty)
    } else {
        let (src, src_ty) = unbiased(&boundary_ctx(ctx, Sign::Src)?)?;
        let (tgt, _) = unbiased(&boundary_ctx(ctx, Sign::Tgt)?)?;
        let ty = Type::arr(src, src_ty, tgt);
        (Term::coh(ctx.clone(), ty.clone(), ctx.identity()), ty)
    };
    UNBIASED.with(|m| {
        let mut m = m.borrow_mut();
        if m.len() > 4096 {
            m.clear();
        }
        m.insert(ctx.clone(), result.clone());
    });
    Ok(result)
}

pub fn unbiased_type(ctx: &Ctx) -> Result<Type, PdError> {
    unbiased(ctx).map(|(_, ty)| ty)
}

pub fn unbiased_term(ctx: &Ctx) -> Result<Term, PdError> {
    unbiased(ctx).map(|(tm, _)| tm)
}

/// A coherence whose type is the unbiased type of its (pasting) context.
pub fn is_unbiased(t: &Term) -> bool {
    match t {
        Term::Var(_) => false,
        Term::Coh(c) => unbiased_type(&c.ctx).is_ok_and(|u| alpha_eq_type(&c.ty, &u)),
    }
}

/// Variables that never appear in the declared type of another variable.
pub fn locally_maximal(ctx: &Ctx) -> Result<VarSet, PdError> {
    require_pd(ctx)?;
    let mut lm = ctx.var_set();
    for (_, ty) in ctx.entries() {
        for v in support_type(ctx, ty)? {
            lm.remove(&v);
        }
    }
    Ok(lm)
}
