//! The `.catt` surface language: lexer, parser with source spans, printer,
//! and elaboration into kernel syntax.
//!
//! ```text
//! file  ::= decl*
//! decl  ::= "coh" NAME tele ":" type
//!         | "def" NAME tele ":" type ":=" term
//! tele  ::= ("(" NAME ":" type ")")*
//! type  ::= "*" | term "->" term
//! term  ::= NAME | NAME "[" args "]" | "coh" "{" tele ":" type "}" "[" args "]"
//! args  ::= (term ("," term)*)?
//! ```
//!
//! Line comments start with `--`. Applications take either every argument
//! of the telescope or only the arguments for variables that appear in no
//! other variable's type; the rest are recovered from the argument types.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::pasting::check_pd;
use crate::reduction::ReductionConfig;
use crate::syntax::{apply_term, Ctx, Name, Sub, Term, Type};
use crate::typecheck::{self, Mode, TypeError, TypingReport};

pub use crate::typecheck::explicit_vars;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start.line, self.start.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub message: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ElabError {
    pub message: String,
    pub span: Span,
}

// ---------------------------------------------------------------------------
// AST

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binder {
    pub name: Ident,
    pub ty: TypeExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeExpr {
    Star(Span),
    Arrow { src: Box<Expr>, tgt: Box<Expr>, span: Span },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Name(Ident),
    App { head: Ident, args: Vec<Expr>, span: Span },
    Coh { tele: Vec<Binder>, ty: TypeExpr, args: Vec<Expr>, span: Span },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    Coh,
    Def,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decl {
    pub kind: DeclKind,
    pub name: Ident,
    pub tele: Vec<Binder>,
    pub ty: TypeExpr,
    pub body: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceFile {
    pub decls: Vec<Decl>,
}

impl TypeExpr {
    pub fn span(&self) -> Span {
        match self {
            TypeExpr::Star(s) => *s,
            TypeExpr::Arrow { span, .. } => *span,
        }
    }
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Name(i) => i.span,
            Expr::App { span, .. } | Expr::Coh { span, .. } => *span,
        }
    }
}

/// Resets every span, so that files can be compared structurally.
pub trait EraseSpans {
    fn erase_spans(&mut self);
}

impl EraseSpans for Ident {
    fn erase_spans(&mut self) {
        self.span = Span::default();
    }
}

impl EraseSpans for Binder {
    fn erase_spans(&mut self) {
        self.name.erase_spans();
        self.ty.erase_spans();
    }
}

impl EraseSpans for TypeExpr {
    fn erase_spans(&mut self) {
        match self {
            TypeExpr::Star(s) => *s = Span::default(),
            TypeExpr::Arrow { src, tgt, span } => {
                src.erase_spans();
                tgt.erase_spans();
                *span = Span::default();
            }
        }
    }
}

impl EraseSpans for Expr {
    fn erase_spans(&mut self) {
        match self {
            Expr::Name(i) => i.erase_spans(),
            Expr::App { head, args, span } => {
                head.erase_spans();
                args.iter_mut().for_each(Expr::erase_spans);
                *span = Span::default();
            }
            Expr::Coh { tele, ty, args, span } => {
                tele.iter_mut().for_each(Binder::erase_spans);
                ty.erase_spans();
                args.iter_mut().for_each(Expr::erase_spans);
                *span = Span::default();
            }
        }
    }
}

impl EraseSpans for Decl {
    fn erase_spans(&mut self) {
        self.name.erase_spans();
        self.tele.iter_mut().for_each(Binder::erase_spans);
        self.ty.erase_spans();
        if let Some(b) = &mut self.body {
            b.erase_spans();
        }
        self.span = Span::default();
    }
}

impl EraseSpans for SourceFile {
    fn erase_spans(&mut self) {
        self.decls.iter_mut().for_each(Decl::erase_spans);
    }
}

// ---------------------------------------------------------------------------
// printing

fn write_tele(f: &mut fmt::Formatter<'_>, tele: &[Binder]) -> fmt::Result {
    for b in tele {
        write!(f, " ({} : {})", b.name.name, b.ty)?;
    }
    Ok(())
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Expr]) -> fmt::Result {
    f.write_str("[")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str("]")
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Star(_) => f.write_str("*"),
            TypeExpr::Arrow { src, tgt, .. } => write!(f, "{src} -> {tgt}"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Name(i) => f.write_str(&i.name),
            Expr::App { head, args, .. } => {
                write!(f, "{} ", head.name)?;
                write_args(f, args)
            }
            Expr::Coh { tele, ty, args, .. } => {
                f.write_str("coh {")?;
                let mut first = true;
                for b in tele {
                    if !first {
                        f.write_str(" ")?;
                    }
                    first = false;
                    write!(f, "({} : {})", b.name.name, b.ty)?;
                }
                write!(f, " : {ty}}} ")?;
                write_args(f, args)
            }
        }
    }
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kw = match self.kind {
            DeclKind::Coh => "coh",
            DeclKind::Def => "def",
        };
        write!(f, "{kw} {}", self.name.name)?;
        write_tele(f, &self.tele)?;
        write!(f, " : {}", self.ty)?;
        if let Some(b) = &self.body {
            write!(f, " := {b}")?;
        }
        Ok(())
    }
}

impl fmt::Display for SourceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// lexing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    KwCoh,
    KwDef,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Colon,
    ColonEq,
    Arrow,
    Star,
    Comma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::KwCoh => f.write_str("`coh`"),
            Tok::KwDef => f.write_str("`def`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::ColonEq => f.write_str("`:=`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let mut pos = Pos { line: 1, col: 1, offset: 0 };
    let mut chars = text.char_indices().peekable();
    let advance = |pos: &mut Pos, c: char| {
        pos.offset += c.len_utf8();
        if c == '\n' {
            pos.line += 1;
            pos.col = 1;
        } else {
            pos.col += 1;
        }
    };
    while let Some(&(_, c)) = chars.peek() {
        let start = pos;
        if c.is_whitespace() {
            chars.next();
            advance(&mut pos, c);
            continue;
        }
        let rest = &text[pos.offset..];
        if rest.starts_with("--") {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                advance(&mut pos, c);
            }
            continue;
        }
        let (tok, len) = if let Some(t) = [
            ("->", Tok::Arrow),
            ("→", Tok::Arrow),
            (":=", Tok::ColonEq),
            (":", Tok::Colon),
            ("(", Tok::LParen),
            (")", Tok::RParen),
            ("[", Tok::LBracket),
            ("]", Tok::RBracket),
            ("{", Tok::LBrace),
            ("}", Tok::RBrace),
            ("*", Tok::Star),
            ("⋆", Tok::Star),
            (",", Tok::Comma),
        ]
        .into_iter()
        .find(|(s, _)| rest.starts_with(s))
        {
            (t.1, t.0.chars().count())
        } else if is_ident_start(c) {
            let word: String = rest.chars().take_while(|&c| is_ident_char(c)).collect();
            let n = word.chars().count();
            let tok = match word.as_str() {
                "coh" => Tok::KwCoh,
                "def" => Tok::KwDef,
                _ => Tok::Ident(word),
            };
            (tok, n)
        } else {
            let mut end = start;
            advance(&mut end, c);
            return Err(ParseError { message: format!("unexpected character `{c}`"), span: Span { start, end } });
        };
        for _ in 0..len {
            let (_, c) = chars.next().expect("token characters");
            advance(&mut pos, c);
        }
        out.push((tok, Span { start, end: pos }));
    }
    out.push((Tok::Eof, Span { start: pos, end: pos }));
    Ok(out)
}

// ---------------------------------------------------------------------------
// parsing

struct Parser {
    toks: Vec<(Tok, Span)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn span(&self) -> Span {
        self.toks[self.i].1
    }

    fn prev_end(&self) -> Pos {
        self.toks[self.i.saturating_sub(1)].1.end
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError { message: format!("expected {expected}, found {}", self.peek()), span: self.span() }
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.error(&tok.to_string()))
        }
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().1;
                Ok(Ident { name, span })
            }
            _ => Err(self.error("a name")),
        }
    }

    fn file(&mut self) -> Result<SourceFile, ParseError> {
        let mut decls = Vec::new();
        while *self.peek() != Tok::Eof {
            decls.push(self.decl()?);
        }
        Ok(SourceFile { decls })
    }

    fn decl(&mut self) -> Result<Decl, ParseError> {
        let start = self.span().start;
        let kind = match self.peek() {
            Tok::KwCoh => DeclKind::Coh,
            Tok::KwDef => DeclKind::Def,
            _ => return Err(self.error("`coh` or `def`")),
        };
        self.bump();
        let name = self.ident()?;
        let tele = self.tele()?;
        self.expect(Tok::Colon)?;
        let ty = self.ty()?;
        let body = if kind == DeclKind::Def {
            self.expect(Tok::ColonEq)?;
            Some(self.expr()?)
        } else {
            None
        };
        Ok(Decl { kind, name, tele, ty, body, span: Span { start, end: self.prev_end() } })
    }

    fn tele(&mut self) -> Result<Vec<Binder>, ParseError> {
        let mut out = Vec::new();
        while *self.peek() == Tok::LParen {
            self.bump();
            let name = self.ident()?;
            self.expect(Tok::Colon)?;
            let ty = self.ty()?;
            self.expect(Tok::RParen)?;
            out.push(Binder { name, ty });
        }
        Ok(out)
    }

    fn ty(&mut self) -> Result<TypeExpr, ParseError> {
        if *self.peek() == Tok::Star {
            return Ok(TypeExpr::Star(self.bump().1));
        }
        let start = self.span().start;
        let src = self.expr()?;
        self.expect(Tok::Arrow)?;
        let tgt = self.expr()?;
        Ok(TypeExpr::Arrow { src: Box::new(src), tgt: Box::new(tgt), span: Span { start, end: self.prev_end() } })
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect(Tok::LBracket)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RBracket {
            args.push(self.expr()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.expr()?);
            }
        }
        self.expect(Tok::RBracket)?;
        Ok(args)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let start = self.span().start;
        match self.peek() {
            Tok::KwCoh => {
                self.bump();
                self.expect(Tok::LBrace)?;
                let tele = self.tele()?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                self.expect(Tok::RBrace)?;
                let args = self.args()?;
                Ok(Expr::Coh { tele, ty, args, span: Span { start, end: self.prev_end() } })
            }
            Tok::Ident(_) => {
                let head = self.ident()?;
                if *self.peek() == Tok::LBracket {
                    let args = self.args()?;
                    Ok(Expr::App { head, args, span: Span { start, end: self.prev_end() } })
                } else {
                    Ok(Expr::Name(head))
                }
            }
            _ => Err(self.error("a term")),
        }
    }
}

pub fn parse(text: &str) -> Result<SourceFile, ParseError> {
    Parser { toks: lex(text)?, i: 0 }.file()
}

/// Parses a bare telescope such as `(x : *) (y : *) (f : x -> y)`.
pub fn parse_telescope(text: &str) -> Result<Vec<Binder>, ParseError> {
    let mut p = Parser { toks: lex(text)?, i: 0 };
    let tele = p.tele()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error("`(` or end of input"));
    }
    Ok(tele)
}

pub fn parse_term(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(text)?, i: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error("end of input"));
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// elaboration

/// A declaration in kernel syntax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElabDecl {
    pub kind: DeclKind,
    pub name: String,
    pub tele: Ctx,
    pub ty: Type,
    pub body: Option<Term>,
    pub span: Span,
}

impl ElabDecl {
    /// The coherence itself for `coh`, the body for `def`.
    pub fn term(&self) -> Term {
        match &self.body {
            Some(b) => b.clone(),
            None => Term::coh(self.tele.clone(), self.ty.clone(), self.tele.identity()),
        }
    }
}

/// Declarations accepted so far, in order.
#[derive(Debug, Clone, Default)]
pub struct Env {
    decls: HashMap<String, ElabDecl>,
    order: Vec<String>,
    rejected: HashSet<String>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn get(&self, name: &str) -> Option<&ElabDecl> {
        self.decls.get(name)
    }

    pub fn decls(&self) -> impl Iterator<Item = &ElabDecl> + '_ {
        self.order.iter().map(|n| &self.decls[n])
    }

    pub fn insert(&mut self, decl: ElabDecl) {
        self.order.push(decl.name.clone());
        self.decls.insert(decl.name.clone(), decl);
    }

    /// Records a name whose declaration failed, for better diagnostics.
    pub fn reject(&mut self, name: &str) {
        self.rejected.insert(name.to_string());
    }

    pub fn elaborate_decl(&self, d: &Decl) -> Result<ElabDecl, ElabError> {
        if self.decls.contains_key(&d.name.name) || self.rejected.contains(&d.name.name) {
            return Err(ElabError { message: format!("`{}` is already declared", d.name.name), span: d.name.span });
        }
        let tele = self.tele(&d.tele, &Ctx::new())?;
        let ty = self.ty(&d.ty, &tele)?;
        let body = d.body.as_ref().map(|b| self.expr(b, &tele)).transpose()?;
        Ok(ElabDecl { kind: d.kind, name: d.name.name.clone(), tele, ty, body, span: d.span })
    }

    pub fn elaborate_telescope(&self, tele: &[Binder]) -> Result<Ctx, ElabError> {
        self.tele(tele, &Ctx::new())
    }

    pub fn elaborate_term(&self, e: &Expr, ctx: &Ctx) -> Result<Term, ElabError> {
        self.expr(e, ctx)
    }

    fn tele(&self, tele: &[Binder], outer: &Ctx) -> Result<Ctx, ElabError> {
        let mut ctx = outer.clone();
        for b in tele {
            if ctx.contains(&Name::new(&b.name.name)) {
                return Err(ElabError { message: format!("`{}` is bound twice", b.name.name), span: b.name.span });
            }
            let ty = self.ty(&b.ty, &ctx)?;
            ctx.push(b.name.name.as_str(), ty);
        }
        Ok(Ctx::from_entries(ctx.entries()[outer.len()..].to_vec()))
    }

    fn ty(&self, ty: &TypeExpr, ctx: &Ctx) -> Result<Type, ElabError> {
        match ty {
            TypeExpr::Star(_) => Ok(Type::Star),
            TypeExpr::Arrow { src, tgt, .. } => {
                let s = self.expr(src, ctx)?;
                let t = self.expr(tgt, ctx)?;
                let base = infer(ctx, &s, src.span())?;
                Ok(Type::arr(s, base, t))
            }
        }
    }

    fn expr(&self, e: &Expr, ctx: &Ctx) -> Result<Term, ElabError> {
        match e {
            Expr::Name(i) => {
                let n = Name::new(&i.name);
                if ctx.contains(&n) {
                    return Ok(Term::Var(n));
                }
                if self.decls.contains_key(&i.name) {
                    return Err(ElabError { message: format!("`{}` needs arguments", i.name), span: i.span });
                }
                Err(self.unknown(i))
            }
            Expr::App { head, args, span } => {
                let Some(d) = self.decls.get(&head.name) else {
                    if ctx.contains(&Name::new(&head.name)) {
                        return Err(ElabError {
                            message: format!("variable `{}` cannot be applied", head.name),
                            span: head.span,
                        });
                    }
                    return Err(self.unknown(head));
                };
                let sub = self.arguments(&d.tele, args, ctx, *span)?;
                match &d.body {
                    None => Ok(Term::coh(d.tele.clone(), d.ty.clone(), sub)),
                    Some(b) => apply_term(b, &sub).map_err(|err| ElabError { message: err.to_string(), span: *span }),
                }
            }
            Expr::Coh { tele, ty, args, span } => {
                let head_ctx = self.tele(tele, &Ctx::new())?;
                let head_ty = self.ty(ty, &head_ctx)?;
                let sub = self.arguments(&head_ctx, args, ctx, *span)?;
                Ok(Term::coh(head_ctx, head_ty, sub))
            }
        }
    }

    fn unknown(&self, i: &Ident) -> ElabError {
        let message = if self.rejected.contains(&i.name) {
            format!("`{}` refers to a rejected declaration", i.name)
        } else {
            format!("unknown name `{}`", i.name)
        };
        ElabError { message, span: i.span }
    }

    fn arguments(&self, tele: &Ctx, args: &[Expr], ctx: &Ctx, span: Span) -> Result<Sub, ElabError> {
        let terms = args.iter().map(|a| self.expr(a, ctx)).collect::<Result<Vec<_>, _>>()?;
        typecheck::complete_sub(tele, terms, ctx).map_err(|e| ElabError { message: e.to_string(), span })
    }
}

fn infer(ctx: &Ctx, t: &Term, span: Span) -> Result<Type, ElabError> {
    typecheck::infer_term(ctx, t, Mode::CattSa).map_err(|e| ElabError { message: e.to_string(), span })
}

/// Typechecks an elaborated declaration: the telescope, the type, and the
/// coherence (which must be over a pasting context) or the body.
pub fn check_decl(d: &ElabDecl, mode: Mode) -> Result<TypingReport, TypeError> {
    check_decl_with(d, mode, ReductionConfig::default())
}

pub fn check_decl_with(d: &ElabDecl, mode: Mode, cfg: ReductionConfig) -> Result<TypingReport, TypeError> {
    typecheck::check_ctx_with(&d.tele, mode, cfg)?;
    typecheck::check_type_with(&d.tele, &d.ty, mode, cfg)?;
    match &d.body {
        None => {
            check_pd(&d.tele).map_err(TypeError::NotPasting)?;
            let coh = d.term();
            let found = typecheck::infer_term_with(&d.tele, &coh, mode, cfg)?;
            typecheck::check_term_with(&d.tele, &coh, &found, mode, cfg)
        }
        Some(b) => typecheck::check_term_with(&d.tele, b, &d.ty, mode, cfg),
    }
}

/// Outcome of checking one declaration of a file.
#[derive(Debug, Clone)]
pub struct DeclOutcome {
    pub name: String,
    pub span: Span,
    pub result: Result<ElabDecl, String>,
}

/// Elaborates and checks every declaration in order. Rejected declarations
/// stay out of the environment.
pub fn check_file(file: &SourceFile, mode: Mode) -> (Env, Vec<DeclOutcome>) {
    check_file_with(file, mode, ReductionConfig::default())
}

pub fn check_file_with(file: &SourceFile, mode: Mode, cfg: ReductionConfig) -> (Env, Vec<DeclOutcome>) {
    let mut env = Env::new();
    let mut outcomes = Vec::new();
    for d in &file.decls {
        let result = match env.elaborate_decl(d) {
            Err(e) => Err(e.to_string()),
            Ok(ed) => match check_decl_with(&ed, mode, cfg) {
                Ok(_) => Ok(ed),
                Err(e) => Err(format!("{}: {e}", d.span)),
            },
        };
        match &result {
            Ok(ed) => env.insert(ed.clone()),
            Err(_) => env.reject(&d.name.name),
        }
        outcomes.push(DeclOutcome { name: d.name.name.clone(), span: d.span, result });
    }
    (env, outcomes)
}
