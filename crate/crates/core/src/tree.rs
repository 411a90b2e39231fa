//! Labelled Batanin trees and their correspondence with pasting contexts.

use std::fmt;

use thiserror::Error;

use crate::pasting::{check_pd, PdError};
use crate::syntax::{Ctx, Name, Term, Type, VarSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("invalid tree: {0}")]
    Invalid(String),
    #[error("path {0} is not valid in the tree")]
    PathInvalid(TreePath),
    #[error("linear height {actual} is too small (need at least {needed})")]
    LinearHeightTooSmall { needed: usize, actual: usize },
    #[error("`{0}` is not a locally maximal label")]
    NotLocallyMaximal(Name),
    #[error("tree syntax error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error(transparent)]
    Pd(#[from] PdError),
}

/// A tree `(T_l, T_b)` with one more label than branches. Branch `i` sits
/// between labels `i` and `i + 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    labels: Vec<Name>,
    branches: Vec<Tree>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePath(pub Vec<usize>);

impl TreePath {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for TreePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl Tree {
    pub fn new(labels: Vec<Name>, branches: Vec<Tree>) -> Result<Tree, TreeError> {
        let tree = Tree::new_unchecked(labels, branches)?;
        let mut seen = VarSet::new();
        for l in tree.all_labels() {
            if !seen.insert(l.clone()) {
                return Err(TreeError::Invalid(format!("label `{l}` occurs twice")));
            }
        }
        Ok(tree)
    }

    fn new_unchecked(labels: Vec<Name>, branches: Vec<Tree>) -> Result<Tree, TreeError> {
        if labels.len() != branches.len() + 1 {
            return Err(TreeError::Invalid(format!(
                "{} labels for {} branches",
                labels.len(),
                branches.len()
            )));
        }
        Ok(Tree { labels, branches })
    }

    pub fn leaf(label: impl Into<Name>) -> Tree {
        Tree { labels: vec![label.into()], branches: vec![] }
    }

    pub fn labels(&self) -> &[Name] {
        &self.labels
    }

    pub fn branches(&self) -> &[Tree] {
        &self.branches
    }

    /// Labels in context order.
    pub fn all_labels(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels(&self, out: &mut Vec<Name>) {
        out.push(self.labels[0].clone());
        for (i, b) in self.branches.iter().enumerate() {
            out.push(self.labels[i + 1].clone());
            b.collect_labels(out);
        }
    }

    pub fn label_count(&self) -> usize {
        self.labels.len() + self.branches.iter().map(Tree::label_count).sum::<usize>()
    }

    pub fn contains(&self, x: &Name) -> bool {
        self.labels.contains(x) || self.branches.iter().any(|b| b.contains(x))
    }

    /// Height of the tree; equals the dimension of the context.
    pub fn depth(&self) -> usize {
        self.branches.iter().map(|b| 1 + b.depth()).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.branches.len() <= 1 && self.branches.iter().all(Tree::is_linear)
    }

    pub fn linear_height(&self) -> usize {
        match self.branches.as_slice() {
            [t] => 1 + t.linear_height(),
            _ => 0,
        }
    }

    /// Labels of nodes without branches: the locally maximal variables.
    pub fn leaf_labels(&self) -> VarSet {
        let mut out = VarSet::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut VarSet) {
        if self.branches.is_empty() {
            out.insert(self.labels[0].clone());
        }
        for b in &self.branches {
            b.collect_leaves(out);
        }
    }

    pub fn is_valid_path(&self, p: &TreePath) -> bool {
        self.region(&p.0).is_some()
    }

    /// Labels in the part of the tree addressed by a path: for a final index
    /// `n`, the branch `n` together with its two bounding labels, or the sole
    /// label of a branchless node.
    pub fn path_region(&self, p: &TreePath) -> Result<Vec<Name>, TreeError> {
        self.region(&p.0).ok_or_else(|| TreeError::PathInvalid(p.clone()))
    }

    fn region(&self, p: &[usize]) -> Option<Vec<Name>> {
        match p {
            [] => None,
            [n] if self.branches.is_empty() => (*n == 0).then(|| self.labels.clone()),
            [n] => {
                let b = self.branches.get(*n)?;
                let mut out = vec![self.labels[*n].clone(), self.labels[n + 1].clone()];
                out.extend(b.all_labels());
                Some(out)
            }
            [n, rest @ ..] => self.branches.get(*n)?.region(rest),
        }
    }

    pub fn branching_path(&self, x: &Name) -> Result<TreePath, TreeError> {
        if !self.leaf_labels().contains(x) {
            return Err(TreeError::NotLocallyMaximal(x.clone()));
        }
        let mut path = Vec::new();
        let mut t = self;
        loop {
            if t.branches.is_empty() {
                path.push(0);
                break;
            }
            let n = t
                .branches
                .iter()
                .position(|b| b.contains(x))
                .expect("a leaf label lies in some branch");
            path.push(n);
            if t.branches[n].is_linear() {
                break;
            }
            t = &t.branches[n];
        }
        Ok(TreePath(path))
    }

    pub fn branching_height(&self, x: &Name) -> Result<usize, TreeError> {
        Ok(self.branching_path(x)?.len() - 1)
    }

    /// `S ▷_p T`.
    pub fn insert(&self, p: &TreePath, inner: &Tree) -> Result<Tree, TreeError> {
        if !self.is_valid_path(p) {
            return Err(TreeError::PathInvalid(p.clone()));
        }
        let needed = p.len() - 1;
        let actual = inner.linear_height();
        if actual < needed {
            return Err(TreeError::LinearHeightTooSmall { needed, actual });
        }
        let ours: VarSet = self.all_labels().into_iter().collect();
        if let Some(clash) = inner.all_labels().into_iter().find(|l| ours.contains(l)) {
            return Err(TreeError::Invalid(format!("label `{clash}` occurs in both trees")));
        }
        Ok(self.insert_raw(&p.0, inner))
    }

    fn insert_raw(&self, p: &[usize], inner: &Tree) -> Tree {
        let n = p[0];
        let tail_l = (n + 2).min(self.labels.len());
        let tail_b = (n + 1).min(self.branches.len());
        let mut labels = self.labels[..n].to_vec();
        labels.extend(inner.labels.iter().cloned());
        labels.extend(self.labels[tail_l..].iter().cloned());
        let mut branches = self.branches[..n].to_vec();
        if p.len() == 1 {
            branches.extend(inner.branches.iter().cloned());
        } else {
            branches.push(self.branches[n].insert_raw(&p[1..], &inner.branches[0]));
        }
        branches.extend(self.branches[tail_b..].iter().cloned());
        Tree { labels, branches }
    }

    /// `⌊T⌋`.
    pub fn to_ctx(&self) -> Ctx {
        let mut ctx = Ctx::new().with(self.labels[0].clone(), Type::Star);
        self.emit(&Type::Star, &mut ctx);
        ctx
    }

    fn emit(&self, ty: &Type, ctx: &mut Ctx) {
        for (i, b) in self.branches.iter().enumerate() {
            ctx.push(self.labels[i + 1].clone(), ty.clone());
            let cell = Type::arr(
                Term::Var(self.labels[i].clone()),
                ty.clone(),
                Term::Var(self.labels[i + 1].clone()),
            );
            ctx.push(b.labels[0].clone(), cell.clone());
            b.emit(&cell, ctx);
        }
    }

    /// `⌈Γ⌉`.
    pub fn from_ctx(ctx: &Ctx) -> Result<Tree, TreeError> {
        check_pd(ctx)?;
        let entries = ctx.entries();
        let mut i = 0;
        let tree = parse_entries(entries, &mut i, 0);
        debug_assert_eq!(i, entries.len());
        Ok(tree)
    }

    /// Parses the bracket rendering produced by `Display`.
    pub fn parse(text: &str) -> Result<Tree, TreeError> {
        let mut p = BracketParser { text, pos: 0 };
        let tree = p.tree()?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(p.error("trailing input"));
        }
        Tree::new(tree.labels, tree.branches)
    }
}

fn parse_entries(entries: &[(Name, Type)], i: &mut usize, depth: usize) -> Tree {
    let mut labels = vec![entries[*i].0.clone()];
    let mut branches = Vec::new();
    *i += 1;
    while *i < entries.len() && entries[*i].1.dim() == depth {
        labels.push(entries[*i].0.clone());
        *i += 1;
        branches.push(parse_entries(entries, i, depth + 1));
    }
    Tree { labels, branches }
}

struct BracketParser<'a> {
    text: &'a str,
    pos: usize,
}

impl BracketParser<'_> {
    fn error(&self, message: &str) -> TreeError {
        TreeError::Parse { offset: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn label(&mut self) -> Result<Name, TreeError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest
            .char_indices()
            .find(|&(_, c)| c.is_whitespace() || c == '[' || c == ']')
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            return Err(self.error("expected a label"));
        }
        self.pos += len;
        Ok(Name::new(&rest[..len]))
    }

    fn tree(&mut self) -> Result<Tree, TreeError> {
        if !self.eat('[') {
            return Err(self.error("expected `[`"));
        }
        let mut labels = vec![self.label()?];
        let mut branches = Vec::new();
        while !self.eat(']') {
            branches.push(self.tree()?);
            labels.push(self.label()?);
        }
        Tree::new_unchecked(labels, branches)
    }
}

/// Bracket rendering `[x [f [α] g [β] h] y [k] z]`: labels interleaved with
/// the branches between them.
impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.labels[0])?;
        for (i, b) in self.branches.iter().enumerate() {
            write!(f, " {b} {}", self.labels[i + 1])?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree{self}")
    }
}

/// Every tree shape with exactly `n` labels, labelled `v0, v1, …` in
/// context order.
pub fn trees_with_labels(n: usize) -> Vec<Tree> {
    let mut counter = 0;
    shapes(n).into_iter().map(|s| relabel(&s, &mut counter, true)).collect()
}

fn relabel(t: &Tree, counter: &mut usize, reset: bool) -> Tree {
    if reset {
        *counter = 0;
    }
    fn next(counter: &mut usize) -> Name {
        let name = Name::from(format!("v{counter}"));
        *counter += 1;
        name
    }
    let mut labels = vec![next(counter)];
    let mut branches = Vec::new();
    for b in &t.branches {
        labels.push(next(counter));
        branches.push(relabel(b, counter, false));
    }
    Tree { labels, branches }
}

fn shapes(n: usize) -> Vec<Tree> {
    let unlabelled = || Name::new("_");
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    // k branches use k + 1 labels here, the rest go to the branches.
    for k in 0..n {
        let remaining = n - k - 1;
        if k == 0 {
            if remaining == 0 {
                out.push(Tree::leaf(unlabelled()));
            }
            continue;
        }
        for parts in compositions(remaining, k) {
            let choices: Vec<Vec<Tree>> = parts.iter().map(|&m| shapes(m)).collect();
            for combo in cartesian(&choices) {
                out.push(Tree { labels: vec![unlabelled(); k + 1], branches: combo });
            }
        }
    }
    out
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn cartesian(choices: &[Vec<Tree>]) -> Vec<Vec<Tree>> {
    let mut acc: Vec<Vec<Tree>> = vec![vec![]];
    for options in choices {
        let mut next = Vec::new();
        for prefix in &acc {
            for o in options {
                let mut v = prefix.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}
