//! Raw syntax: contexts, substitutions, types and terms, together with the
//! structural operations every other module builds on.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(Name),
    #[error("substitution is undefined on `{0}`")]
    Undefined(Name),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("variable `{0}` bound twice")]
    DuplicateVariable(Name),
}

/// A variable name. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Appends a prime.
    pub fn primed(&self) -> Name {
        Name::new(&format!("{}'", self.0))
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name(Arc::from(s))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub type VarSet = BTreeSet<Name>;

/// Boundary polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Src,
    Tgt,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Src, Sign::Tgt];
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Src => f.write_str("-"),
            Sign::Tgt => f.write_str("+"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Name),
    Coh(Arc<Coh>),
}

/// `Coh Γ A σ`: the coherence of shape `A` over the pasting context `Γ`,
/// instantiated by the arguments `σ`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Coh {
    pub ctx: Ctx,
    pub ty: Type,
    pub sub: Sub,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Star,
    Arr(Arc<Arrow>),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Arrow {
    pub src: Term,
    pub base: Type,
    pub tgt: Term,
}

/// Ordered variable declarations. Raw syntax: well-formedness (distinct
/// names, scoping) is established by the typechecker, not here.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Ctx {
    entries: Vec<(Name, Type)>,
}

/// Ordered variable assignments with pairwise distinct domain names.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Sub {
    entries: Vec<(Name, Term)>,
}

impl Term {
    pub fn var(name: impl Into<Name>) -> Term {
        Term::Var(name.into())
    }

    pub fn coh(ctx: Ctx, ty: Type, sub: Sub) -> Term {
        Term::Coh(Arc::new(Coh { ctx, ty, sub }))
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self {
            Term::Var(n) => Some(n),
            Term::Coh(_) => None,
        }
    }

    pub fn as_coh(&self) -> Option<&Coh> {
        match self {
            Term::Var(_) => None,
            Term::Coh(c) => Some(c),
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    /// Number of syntax nodes, counting coherence heads and types.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Coh(c) => 1 + c.ty.size() + c.sub.terms().map(Term::size).sum::<usize>(),
        }
    }
}

impl Type {
    pub fn arr(src: Term, base: Type, tgt: Term) -> Type {
        Type::Arr(Arc::new(Arrow { src, base, tgt }))
    }

    pub fn as_arrow(&self) -> Option<&Arrow> {
        match self {
            Type::Star => None,
            Type::Arr(a) => Some(a),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Type::Star => 0,
            Type::Arr(a) => a.base.dim() + 1,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Type::Star => 1,
            Type::Arr(a) => 1 + a.src.size() + a.base.size() + a.tgt.size(),
        }
    }
}

impl Ctx {
    pub fn new() -> Self {
        Ctx::default()
    }

    pub fn from_entries(entries: Vec<(Name, Type)>) -> Self {
        Ctx { entries }
    }

    pub fn push(&mut self, name: impl Into<Name>, ty: Type) {
        self.entries.push((name.into(), ty));
    }

    pub fn with(mut self, name: impl Into<Name>, ty: Type) -> Self {
        self.push(name, ty);
        self
    }

    pub fn entries(&self) -> &[(Name, Type)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> + '_ {
        self.entries.iter().map(|(n, _)| n)
    }

    pub fn var_set(&self) -> VarSet {
        self.names().cloned().collect()
    }

    pub fn lookup(&self, name: &Name) -> Option<&Type> {
        self.entries.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.lookup(name).is_some()
    }

    pub fn prefix(&self, len: usize) -> Ctx {
        Ctx { entries: self.entries[..len].to_vec() }
    }

    /// `dim(∅) = −1`, otherwise the largest dimension of a declared type.
    pub fn dim(&self) -> i64 {
        self.entries.iter().map(|(_, t)| t.dim() as i64).max().unwrap_or(-1)
    }

    /// The identity substitution on this context.
    pub fn identity(&self) -> Sub {
        Sub { entries: self.entries.iter().map(|(n, _)| (n.clone(), Term::Var(n.clone()))).collect() }
    }

    /// Renames declared and free variables; names outside `map` are kept.
    pub fn rename(&self, map: &HashMap<Name, Name>) -> Ctx {
        Ctx {
            entries: self
                .entries
                .iter()
                .map(|(n, t)| (map.get(n).cloned().unwrap_or_else(|| n.clone()), rename_type(t, map)))
                .collect(),
        }
    }
}

/// Renames free variables of a term; coherence heads are closed and untouched.
pub fn rename_term(t: &Term, map: &HashMap<Name, Name>) -> Term {
    match t {
        Term::Var(x) => Term::Var(map.get(x).cloned().unwrap_or_else(|| x.clone())),
        Term::Coh(c) => Term::coh(
            c.ctx.clone(),
            c.ty.clone(),
            Sub { entries: c.sub.entries.iter().map(|(n, u)| (n.clone(), rename_term(u, map))).collect() },
        ),
    }
}

pub fn rename_type(ty: &Type, map: &HashMap<Name, Name>) -> Type {
    match ty {
        Type::Star => Type::Star,
        Type::Arr(a) => Type::arr(rename_term(&a.src, map), rename_type(&a.base, map), rename_term(&a.tgt, map)),
    }
}

/// The variable-to-variable substitution `x ↦ map(x)` over `ctx`.
pub fn renaming_sub(ctx: &Ctx, map: &HashMap<Name, Name>) -> Sub {
    Sub {
        entries: ctx
            .names()
            .map(|n| (n.clone(), Term::Var(map.get(n).cloned().unwrap_or_else(|| n.clone()))))
            .collect(),
    }
}

impl Sub {
    pub fn new() -> Self {
        Sub::default()
    }

    pub fn from_entries(entries: Vec<(Name, Term)>) -> Result<Self, SyntaxError> {
        let mut seen = BTreeSet::new();
        for (n, _) in &entries {
            if !seen.insert(n.clone()) {
                return Err(SyntaxError::DuplicateVariable(n.clone()));
            }
        }
        Ok(Sub { entries })
    }

    /// Pairs the names of `ctx` positionally with `terms`.
    pub fn over(ctx: &Ctx, terms: Vec<Term>) -> Result<Self, SyntaxError> {
        if ctx.len() != terms.len() {
            return Err(SyntaxError::Dimension(format!(
                "expected {} arguments, got {}",
                ctx.len(),
                terms.len()
            )));
        }
        Sub::from_entries(ctx.names().cloned().zip(terms).collect())
    }

    pub fn push(&mut self, name: impl Into<Name>, term: Term) -> Result<(), SyntaxError> {
        let name = name.into();
        if self.entries.iter().any(|(n, _)| *n == name) {
            return Err(SyntaxError::DuplicateVariable(name));
        }
        self.entries.push((name, term));
        Ok(())
    }

    pub fn entries(&self) -> &[(Name, Term)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &Name) -> Option<&Term> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> + '_ {
        self.entries.iter().map(|(_, t)| t)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Name> + '_ {
        self.entries.iter().map(|(n, _)| n)
    }

    /// Replaces the term at `index`, keeping the domain.
    pub fn with_term(&self, index: usize, term: Term) -> Sub {
        let mut entries = self.entries.clone();
        entries[index].1 = term;
        Sub { entries }
    }

    pub fn map_terms<E>(&self, mut f: impl FnMut(&Term) -> Result<Term, E>) -> Result<Sub, E> {
        let entries = self
            .entries
            .iter()
            .map(|(n, t)| Ok((n.clone(), f(t)?)))
            .collect::<Result<Vec<_>, E>>()?;
        Ok(Sub { entries })
    }

    pub fn restrict(&self, ctx: &Ctx) -> Result<Sub, SyntaxError> {
        let entries = ctx
            .names()
            .map(|n| self.get(n).map(|t| (n.clone(), t.clone())).ok_or_else(|| SyntaxError::Undefined(n.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Sub { entries })
    }
}

// ---------------------------------------------------------------------------
// support

pub fn support_term(ctx: &Ctx, t: &Term) -> Result<VarSet, SyntaxError> {
    let mut out = VarSet::new();
    add_support_term(ctx, t, &mut out)?;
    Ok(out)
}

pub fn support_type(ctx: &Ctx, ty: &Type) -> Result<VarSet, SyntaxError> {
    let mut out = VarSet::new();
    add_support_type(ctx, ty, &mut out)?;
    Ok(out)
}

pub fn support_sub(ctx: &Ctx, sub: &Sub) -> Result<VarSet, SyntaxError> {
    let mut out = VarSet::new();
    for t in sub.terms() {
        add_support_term(ctx, t, &mut out)?;
    }
    Ok(out)
}

fn add_support_term(ctx: &Ctx, t: &Term, out: &mut VarSet) -> Result<(), SyntaxError> {
    match t {
        Term::Var(x) => {
            if out.contains(x) {
                return Ok(());
            }
            let ty = ctx.lookup(x).ok_or_else(|| SyntaxError::UnknownVariable(x.clone()))?;
            out.insert(x.clone());
            add_support_type(ctx, ty, out)
        }
        Term::Coh(c) => {
            for u in c.sub.terms() {
                add_support_term(ctx, u, out)?;
            }
            Ok(())
        }
    }
}

fn add_support_type(ctx: &Ctx, ty: &Type, out: &mut VarSet) -> Result<(), SyntaxError> {
    match ty {
        Type::Star => Ok(()),
        Type::Arr(a) => {
            add_support_term(ctx, &a.src, out)?;
            add_support_term(ctx, &a.tgt, out)
        }
    }
}

// ---------------------------------------------------------------------------
// dimension

pub fn dim_term(ctx: &Ctx, t: &Term) -> Result<usize, SyntaxError> {
    match t {
        Term::Var(x) => ctx.lookup(x).map(Type::dim).ok_or_else(|| SyntaxError::UnknownVariable(x.clone())),
        Term::Coh(c) => Ok(c.ty.dim()),
    }
}

// ---------------------------------------------------------------------------
// substitution

pub fn apply_term(t: &Term, sub: &Sub) -> Result<Term, SyntaxError> {
    match t {
        Term::Var(x) => sub.get(x).cloned().ok_or_else(|| SyntaxError::Undefined(x.clone())),
        Term::Coh(c) => Ok(Term::coh(c.ctx.clone(), c.ty.clone(), compose(&c.sub, sub)?)),
    }
}

pub fn apply_type(ty: &Type, sub: &Sub) -> Result<Type, SyntaxError> {
    match ty {
        Type::Star => Ok(Type::Star),
        Type::Arr(a) => Ok(Type::arr(apply_term(&a.src, sub)?, apply_type(&a.base, sub)?, apply_term(&a.tgt, sub)?)),
    }
}

/// `τ ∘ σ`: apply `sigma` to every term of `tau`, keeping `tau`'s domain.
pub fn compose(tau: &Sub, sigma: &Sub) -> Result<Sub, SyntaxError> {
    tau.map_terms(|t| apply_term(t, sigma))
}

// ---------------------------------------------------------------------------
// boundaries

/// `A^ε_m`: the `m`-dimensional source or target of a type.
pub fn type_boundary(ty: &Type, m: usize, sign: Sign) -> Result<Term, SyntaxError> {
    let n = ty.dim();
    if m >= n {
        return Err(SyntaxError::Dimension(format!("no {m}-boundary of a {n}-dimensional type")));
    }
    let mut cur = ty;
    loop {
        let a = cur.as_arrow().expect("positive dimension");
        if cur.dim() == m + 1 {
            return Ok(match sign {
                Sign::Src => a.src.clone(),
                Sign::Tgt => a.tgt.clone(),
            });
        }
        cur = &a.base;
    }
}

/// `δ^ε_n(t)` computed in `ctx`.
pub fn term_boundary(ctx: &Ctx, t: &Term, n: usize, sign: Sign) -> Result<Term, SyntaxError> {
    let d = dim_term(ctx, t)?;
    if n == d {
        return Ok(t.clone());
    }
    if n > d {
        return Err(SyntaxError::Dimension(format!("no {n}-boundary of a {d}-dimensional term")));
    }
    match t {
        Term::Var(x) => type_boundary(ctx.lookup(x).expect("dim_term found it"), n, sign),
        Term::Coh(c) => apply_term(&type_boundary(&c.ty, n, sign)?, &c.sub),
    }
}

// ---------------------------------------------------------------------------
// alpha equivalence

/// Structural equality up to renaming of the variables bound by coherence
/// heads. Free variables are compared by name.
pub fn alpha_eq_term(a: &Term, b: &Term) -> bool {
    a == b || canonical_term(a) == canonical_term(b)
}

pub fn alpha_eq_type(a: &Type, b: &Type) -> bool {
    a == b || canonical_type(a) == canonical_type(b)
}

pub fn alpha_eq_sub(a: &Sub, b: &Sub) -> bool {
    a.len() == b.len() && a.terms().zip(b.terms()).all(|(s, t)| alpha_eq_term(s, t))
}

/// Contexts are compared positionally: the `i`th names correspond.
pub fn alpha_eq_ctx(a: &Ctx, b: &Ctx) -> bool {
    a.len() == b.len() && canonical_ctx(a).0 == canonical_ctx(b).0
}

/// Renames every coherence-bound variable to a positional name. Two terms are
/// alpha-equivalent iff their canonical forms are structurally equal.
pub fn canonical_term(t: &Term) -> Term {
    canon_term(t, None)
}

pub fn canonical_type(ty: &Type) -> Type {
    canon_type(ty, None)
}

pub fn canonical_sub(sub: &Sub) -> Sub {
    Sub { entries: sub.entries.iter().map(|(n, t)| (n.clone(), canon_term(t, None))).collect() }
}

fn positional(i: usize) -> Name {
    Name::from(format!("#{i}"))
}

fn canonical_ctx(ctx: &Ctx) -> (Ctx, HashMap<Name, Name>) {
    let map: HashMap<Name, Name> = ctx.names().enumerate().map(|(i, n)| (n.clone(), positional(i))).collect();
    let entries = ctx
        .entries
        .iter()
        .enumerate()
        .map(|(i, (_, ty))| (positional(i), canon_type(ty, Some(&map))))
        .collect();
    (Ctx { entries }, map)
}

fn canon_term(t: &Term, map: Option<&HashMap<Name, Name>>) -> Term {
    match t {
        Term::Var(x) => Term::Var(map.and_then(|m| m.get(x)).cloned().unwrap_or_else(|| x.clone())),
        Term::Coh(c) => {
            let (ctx, inner) = canonical_ctx(&c.ctx);
            let ty = canon_type(&c.ty, Some(&inner));
            let sub = Sub {
                entries: c
                    .sub
                    .entries
                    .iter()
                    .enumerate()
                    .map(|(i, (_, u))| (positional(i), canon_term(u, map)))
                    .collect(),
            };
            Term::coh(ctx, ty, sub)
        }
    }
}

fn canon_type(ty: &Type, map: Option<&HashMap<Name, Name>>) -> Type {
    match ty {
        Type::Star => Type::Star,
        Type::Arr(a) => Type::arr(canon_term(&a.src, map), canon_type(&a.base, map), canon_term(&a.tgt, map)),
    }
}

// ---------------------------------------------------------------------------
// fresh names

/// `base`, `base'`, `base''`, ... : the first candidate rejected by `taken`.
pub fn fresh_name(base: &Name, taken: impl Fn(&Name) -> bool) -> Name {
    let mut candidate = base.clone();
    while taken(&candidate) {
        candidate = candidate.primed();
    }
    candidate
}

// ---------------------------------------------------------------------------
// printing

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Coh(c) => {
                write!(f, "coh {{{} : {}}} [", c.ctx, c.ty)?;
                for (i, t) in c.sub.terms().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Star => f.write_str("*"),
            Type::Arr(a) => write!(f, "{} -> {}", a.src, a.tgt),
        }
    }
}

impl fmt::Display for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, t)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({n} : {t})")?;
        }
        Ok(())
    }
}

impl fmt::Display for Sub {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, (n, t)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n} ↦ {t}")?;
        }
        f.write_str(">")
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for Sub {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for Coh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coh({:?} : {:?}){:?}", self.ctx, self.ty, self.sub)
    }
}

impl fmt::Debug for Arrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} ->[{:?}] {:?}", self.src, self.base, self.tgt)
    }
}

/// Shorthand builders used throughout the tests.
pub mod build {
    use super::*;

    pub fn v(name: &str) -> Term {
        Term::var(name)
    }

    /// `s →_A t`.
    pub fn arr(s: Term, base: Type, t: Term) -> Type {
        Type::arr(s, base, t)
    }

    /// `s →_⋆ t`.
    pub fn arr0(s: &str, t: &str) -> Type {
        Type::arr(v(s), Type::Star, v(t))
    }

    pub fn ctx(entries: &[(&str, Type)]) -> Ctx {
        Ctx::from_entries(entries.iter().map(|(n, t)| (Name::new(n), t.clone())).collect())
    }

    pub fn sub(entries: &[(&str, Term)]) -> Sub {
        Sub::from_entries(entries.iter().map(|(n, t)| (Name::new(n), t.clone())).collect())
            .expect("distinct names")
    }
}
