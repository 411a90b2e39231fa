//! Insertion of one pasting context into another along a locally maximal
//! variable, with the internal (`ι`) and external (`κ`) substitutions.

use std::collections::HashMap;

use thiserror::Error;

use crate::pasting::PdError;
use crate::syntax::{
    alpha_eq_ctx, alpha_eq_sub, fresh_name, term_boundary, type_boundary, Ctx, Name, Sign, Sub, SyntaxError, Term,
    Type, VarSet,
};
use crate::tree::{Tree, TreeError, TreePath};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InsertionError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Pd(#[from] PdError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("type linear height {actual} is below the branching height {needed}")]
    LinearHeightTooSmall { needed: usize, actual: i64 },
    #[error("inner type has dimension {found} but `{x}` has dimension {expected}")]
    DimensionMismatch { x: Name, expected: usize, found: usize },
    #[error("head mismatch: {0}")]
    HeadMismatch(String),
    #[error("`{0}` is erased by the insertion but is not a boundary of the insertion point")]
    NotBoundary(Name),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InsertionProblem {
    pub outer: Ctx,
    pub x: Name,
    pub inner: Ctx,
    pub inner_type: Type,
}

/// Where a variable of `Δ ▷_x Θ` comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Outer(Name),
    Inner(Name),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InsertionResult {
    pub inserted: Ctx,
    pub iota: Sub,
    pub kappa: Sub,
    /// Inner variables that had to be freshened, old name to new name.
    pub renaming: Vec<(Name, Name)>,
    pub path: TreePath,
    pub origin: Vec<(Name, Origin)>,
    pub inner: Ctx,
    pub x: Name,
}

/// Largest `n` such that every boundary of `ty` of dimension `≤ n` is a
/// variable; `-1` when there is none.
pub fn type_linear_height(ty: &Type) -> i64 {
    let mut n = -1;
    for m in 0..ty.dim() {
        let vars = Sign::BOTH
            .iter()
            .all(|&s| type_boundary(ty, m, s).is_ok_and(|t| t.is_var()));
        if !vars {
            break;
        }
        n = m as i64;
    }
    n
}

/// Builds `Δ ▷_x Θ` together with `ι` and `κ`, freshening the inner labels
/// that clash with outer ones.
pub fn insert_ctx(prob: &InsertionProblem) -> Result<InsertionResult, InsertionError> {
    let InsertionProblem { outer, x, inner, inner_type } = prob;
    let outer_tree = Tree::from_ctx(outer)?;
    Tree::from_ctx(inner)?;
    let path = outer_tree.branching_path(x)?;

    let mut taken = outer.var_set();
    let mut map = HashMap::new();
    let mut renaming = Vec::new();
    for name in inner.names() {
        let fresh = if taken.contains(name) { fresh_name(name, |n| taken.contains(n)) } else { name.clone() };
        taken.insert(fresh.clone());
        if fresh != *name {
            renaming.push((name.clone(), fresh.clone()));
        }
        map.insert(name.clone(), fresh);
    }
    let inner_tree = Tree::from_ctx(&inner.rename(&map))?;
    let inserted = outer_tree.insert(&path, &inner_tree)?.to_ctx();

    let iota = crate::syntax::renaming_sub(inner, &map);

    let bh = path.len() - 1;
    let lh = type_linear_height(inner_type);
    if lh < bh as i64 {
        return Err(InsertionError::LinearHeightTooSmall { needed: bh, actual: lh });
    }
    let x_ty = outer.lookup(x).ok_or_else(|| SyntaxError::UnknownVariable(x.clone()))?;
    let n = x_ty.dim();
    if inner_type.dim() != n {
        return Err(InsertionError::DimensionMismatch { x: x.clone(), expected: n, found: inner_type.dim() });
    }
    let head = Term::coh(inner.clone(), inner_type.clone(), iota.clone());
    let mut boundary_of_x: HashMap<Name, (usize, Sign)> = HashMap::new();
    for m in (0..n).rev() {
        for sign in Sign::BOTH {
            if let Term::Var(y) = type_boundary(x_ty, m, sign)? {
                boundary_of_x.insert(y, (m, sign));
            }
        }
    }
    let survivors: VarSet = inserted.var_set();
    let mut kappa = Sub::new();
    for (y, _) in outer.entries() {
        let image = if survivors.contains(y) {
            Term::Var(y.clone())
        } else if y == x {
            head.clone()
        } else if let Some(&(m, sign)) = boundary_of_x.get(y) {
            term_boundary(&inserted, &head, m, sign)?
        } else {
            return Err(InsertionError::NotBoundary(y.clone()));
        };
        kappa.push(y.clone(), image)?;
    }

    let back: HashMap<&Name, &Name> = map.iter().map(|(k, v)| (v, k)).collect();
    let origin = inserted
        .names()
        .map(|v| {
            let o = if outer.contains(v) && !back.contains_key(v) {
                Origin::Outer(v.clone())
            } else {
                Origin::Inner(back[v].clone())
            };
            (v.clone(), o)
        })
        .collect();

    Ok(InsertionResult { inserted, iota, kappa, renaming, path, origin, inner: inner.clone(), x: x.clone() })
}

/// `σ ▷_x τ`: outer variables via `σ`, inner ones via `τ`. Requires `σ(x)`
/// to be a coherence over the inner context with arguments `τ`.
pub fn insert_sub(sigma: &Sub, x: &Name, tau: &Sub, res: &InsertionResult) -> Result<Sub, InsertionError> {
    let at_x = sigma.get(x).ok_or_else(|| SyntaxError::Undefined(x.clone()))?;
    let Some(c) = at_x.as_coh() else {
        return Err(InsertionError::HeadMismatch(format!("`{x}` is sent to a variable")));
    };
    if !alpha_eq_ctx(&c.ctx, &res.inner) {
        return Err(InsertionError::HeadMismatch(format!("`{x}` is sent to a coherence over a different context")));
    }
    if !alpha_eq_sub(&c.sub, tau) {
        return Err(InsertionError::HeadMismatch(format!("`{x}` is sent to a coherence with different arguments")));
    }
    insert_sub_unchecked(sigma, tau, res)
}

/// The factoring substitution out of `Δ ▷_x Θ`, without comparing `σ(x)`
/// against `τ`.
pub fn insert_sub_unchecked(sigma: &Sub, tau: &Sub, res: &InsertionResult) -> Result<Sub, InsertionError> {
    let mut out = Sub::new();
    for (v, o) in &res.origin {
        let t = match o {
            Origin::Outer(y) => sigma.get(y).ok_or_else(|| SyntaxError::Undefined(y.clone()))?,
            Origin::Inner(w) => tau.get(w).ok_or_else(|| SyntaxError::Undefined(w.clone()))?,
        };
        out.push(v.clone(), t.clone())?;
    }
    Ok(out)
}
