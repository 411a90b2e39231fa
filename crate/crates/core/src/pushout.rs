//! Executable check that an insertion square is a pushout, on finite
//! instances: the square commutes, every cone factors through the inserted
//! context, and the factorization is unique among a finite candidate space.

use std::collections::HashMap;

use thiserror::Error;

use crate::insertion::{insert_sub_unchecked, InsertionError, InsertionProblem, InsertionResult};
use crate::pasting::{to_disc_sub, PdError};
use crate::reduction::{convertible_sub, convertible_term, convertible_type, nf_term, ReductionConfig};
use crate::syntax::{apply_term, apply_type, compose, dim_term, support_term, Ctx, Name, Sub, SyntaxError, Term, Type};
use crate::typecheck::{infer_term, Mode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PushoutError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Pd(#[from] PdError),
    #[error(transparent)]
    Insertion(#[from] InsertionError),
}

/// A pair `σ : Δ → Γ`, `τ : Θ → Γ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cone {
    pub ctx: Ctx,
    pub sigma: Sub,
    pub tau: Sub,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeReport {
    /// `σ ∘ x̄` and `τ ∘ Coh Θ A id` agree over the disc.
    pub commutes: bool,
    /// `(σ ▷_x τ) ∘ ι ≡ τ`.
    pub iota_leg: bool,
    /// `(σ ▷_x τ) ∘ κ ≡ σ`.
    pub kappa_leg: bool,
    pub factor: Sub,
    /// Well-typed substitutions found satisfying both leg equations.
    pub solutions: usize,
    /// Every solution is convertible to `factor`.
    pub unique: bool,
    pub candidates_tried: usize,
}

impl ConeReport {
    pub fn ok(&self) -> bool {
        self.commutes && self.iota_leg && self.kappa_leg && self.solutions > 0 && self.unique
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushoutReport {
    pub square_commutes: bool,
    pub cones: Vec<ConeReport>,
}

impl PushoutReport {
    pub fn ok(&self) -> bool {
        self.square_commutes && self.cones.iter().all(ConeReport::ok)
    }

    /// One line per failed clause.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.square_commutes {
            out.push("(a) the square does not commute".to_string());
        }
        for (i, c) in self.cones.iter().enumerate() {
            if !c.commutes {
                out.push(format!("cone {i}: does not commute over the disc"));
            }
            if !c.iota_leg {
                out.push(format!("(b) cone {i}: factor ∘ ι differs from τ"));
            }
            if !c.kappa_leg {
                out.push(format!("(b) cone {i}: factor ∘ κ differs from σ"));
            }
            if c.solutions == 0 {
                out.push(format!("(c) cone {i}: no factorization among the candidates"));
            } else if !c.unique {
                out.push(format!("(c) cone {i}: {} inequivalent factorizations", c.solutions));
            }
        }
        out
    }
}

const MAX_SOLUTIONS: usize = 64;

pub fn check_pushout(
    prob: &InsertionProblem,
    res: &InsertionResult,
    cones: &[Cone],
) -> Result<PushoutReport, PushoutError> {
    let cfg = ReductionConfig::default();
    let x_bar = to_disc_sub(&prob.outer, &Term::Var(prob.x.clone()))?;
    let head = Term::coh(prob.inner.clone(), prob.inner_type.clone(), prob.inner.identity());
    let head_bar = to_disc_sub(&prob.inner, &head)?;
    let square_commutes = convertible_sub(&compose(&x_bar, &res.kappa)?, &compose(&head_bar, &res.iota)?, cfg);

    let mut reports = Vec::new();
    for cone in cones {
        let commutes = convertible_sub(&compose(&x_bar, &cone.sigma)?, &compose(&head_bar, &cone.tau)?, cfg);
        let factor = insert_sub_unchecked(&cone.sigma, &cone.tau, res)?;
        let iota_leg = convertible_sub(&compose(&res.iota, &factor)?, &cone.tau, cfg);
        let kappa_leg = convertible_sub(&compose(&res.kappa, &factor)?, &cone.sigma, cfg);
        let search = enumerate_factors(res, cone, cfg)?;
        let unique = search
            .solutions
            .iter()
            .all(|s| convertible_sub(s, &factor, cfg));
        reports.push(ConeReport {
            commutes,
            iota_leg,
            kappa_leg,
            factor,
            solutions: search.solutions.len(),
            unique,
            candidates_tried: search.tried,
        });
    }
    Ok(PushoutReport { square_commutes, cones: reports })
}

struct Search {
    solutions: Vec<Sub>,
    tried: usize,
}

/// Terms a factorization may use: the variables of `Γ` and every subterm
/// of the cone, with their normal forms.
fn candidate_pool(cone: &Cone, cfg: ReductionConfig) -> Vec<Term> {
    fn walk(t: &Term, out: &mut Vec<Term>) {
        if out.contains(t) {
            return;
        }
        out.push(t.clone());
        if let Term::Coh(c) = t {
            for s in c.sub.terms() {
                walk(s, out);
            }
        }
    }
    let mut pool = Vec::new();
    for n in cone.ctx.names() {
        walk(&Term::Var(n.clone()), &mut pool);
    }
    for t in cone.sigma.terms().chain(cone.tau.terms()) {
        walk(t, &mut pool);
        walk(&nf_term(t, cfg), &mut pool);
    }
    pool
}

/// Exhaustive backtracking over substitutions `Δ ▷_x Θ → Γ` drawn from the
/// candidate pool, keeping those that are well-typed and satisfy both leg
/// equations.
fn enumerate_factors(res: &InsertionResult, cone: &Cone, cfg: ReductionConfig) -> Result<Search, PushoutError> {
    let pool: Vec<(Term, Type, usize)> = candidate_pool(cone, cfg)
        .into_iter()
        .filter_map(|t| {
            let ty = infer_term(&cone.ctx, &t, Mode::CattSa).ok()?;
            let d = dim_term(&cone.ctx, &t).ok()?;
            Some((t, ty, d))
        })
        .collect();

    // Each leg equation is checked as soon as its support is assigned.
    let names: Vec<Name> = res.inserted.names().cloned().collect();
    let index: HashMap<&Name, usize> = names.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let mut equations: Vec<Vec<(Term, Term)>> = vec![Vec::new(); names.len()];
    for (leg, target) in [(&res.iota, &cone.tau), (&res.kappa, &cone.sigma)] {
        for (v, t) in leg.entries() {
            let supp = support_term(&res.inserted, t)?;
            let ready = supp.iter().map(|n| index[n]).max().unwrap_or(0);
            let rhs = target.get(v).ok_or_else(|| SyntaxError::Undefined(v.clone()))?;
            equations[ready].push((t.clone(), rhs.clone()));
        }
    }

    let mut search = Search { solutions: Vec::new(), tried: 0 };
    let mut partial = Sub::new();
    backtrack(res, &names, &pool, &equations, &mut partial, &mut search, cfg)?;
    Ok(search)
}

fn backtrack(
    res: &InsertionResult,
    names: &[Name],
    pool: &[(Term, Type, usize)],
    equations: &[Vec<(Term, Term)>],
    partial: &mut Sub,
    search: &mut Search,
    cfg: ReductionConfig,
) -> Result<(), PushoutError> {
    let i = partial.len();
    if i == names.len() {
        search.solutions.push(partial.clone());
        return Ok(());
    }
    let v = &names[i];
    let v_ty = res.inserted.lookup(v).expect("inserted variable");
    let want_ty = apply_type(v_ty, partial)?;
    for (t, ty, d) in pool {
        if search.solutions.len() >= MAX_SOLUTIONS {
            return Ok(());
        }
        if *d != v_ty.dim() {
            continue;
        }
        search.tried += 1;
        if !convertible_type(ty, &want_ty, cfg) {
            continue;
        }
        partial.push(v.clone(), t.clone())?;
        let mut holds = true;
        for (lhs, rhs) in &equations[i] {
            if !convertible_term(&apply_term(lhs, partial)?, rhs, cfg) {
                holds = false;
                break;
            }
        }
        if holds {
            backtrack(res, names, pool, equations, partial, search, cfg)?;
        }
        let mut entries = partial.entries().to_vec();
        entries.pop();
        *partial = Sub::from_entries(entries)?;
    }
    Ok(())
}
