//! Python bindings: contexts, terms, trees, insertion, normalization and
//! whole-file checking.

use cattsa_core::insertion::{insert_ctx, InsertionProblem};
use cattsa_core::ordinal::{sd_term, Ordinal as CoreOrdinal};
use cattsa_core::pasting::{boundary_ctx, is_pasting, locally_maximal, unbiased_term, unbiased_type};
use cattsa_core::reduction::{
    convertible_term, convertible_type, nf_term, nf_term_traced, nf_type, raw_steps_term, ReductionConfig,
};
use cattsa_core::surface::{self, check_file_with, Env};
use cattsa_core::syntax::{self as core, alpha_eq_term, alpha_eq_type, dim_term, Name, Sign};
use cattsa_core::tree::{trees_with_labels, Tree as CoreTree};
use cattsa_core::typecheck::{check_term, infer_term, Mode};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(cattsa, CattError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    CattError::new_err(e.to_string())
}

fn mode(s: &str) -> PyResult<Mode> {
    s.parse().map_err(PyValueError::new_err)
}

fn sign(s: &str) -> PyResult<Sign> {
    match s {
        "-" | "src" | "source" => Ok(Sign::Src),
        "+" | "tgt" | "target" => Ok(Sign::Tgt),
        other => Err(PyValueError::new_err(format!("unknown boundary sign `{other}`"))),
    }
}

fn cfg(disc_insertion: bool) -> ReductionConfig {
    ReductionConfig { allow_disc_insertion: disc_insertion }
}

/// A context, written as a telescope `(x : *) (y : *) (f : x -> y)`.
#[pyclass(frozen, skip_from_py_object, module = "cattsa")]
#[derive(Clone)]
struct Context {
    ctx: core::Ctx,
}

#[pymethods]
impl Context {
    #[new]
    fn new(telescope: &str) -> PyResult<Context> {
        let binders = surface::parse_telescope(telescope).map_err(err)?;
        let ctx = Env::new().elaborate_telescope(&binders).map_err(err)?;
        Ok(Context { ctx })
    }

    fn names(&self) -> Vec<String> {
        self.ctx.names().map(|n| n.to_string()).collect()
    }

    fn dim(&self) -> i64 {
        self.ctx.dim()
    }

    fn is_pasting(&self) -> bool {
        is_pasting(&self.ctx)
    }

    fn locally_maximal(&self) -> PyResult<Vec<String>> {
        Ok(locally_maximal(&self.ctx).map_err(err)?.iter().map(|n| n.to_string()).collect())
    }

    /// The source (`"-"`) or target (`"+"`) boundary of a pasting context.
    fn boundary(&self, side: &str) -> PyResult<Context> {
        Ok(Context { ctx: boundary_ctx(&self.ctx, sign(side)?).map_err(err)? })
    }

    fn unbiased_type(&self) -> PyResult<Type> {
        Ok(Type { ty: unbiased_type(&self.ctx).map_err(err)? })
    }

    fn unbiased_term(&self) -> PyResult<Term> {
        Ok(Term { term: unbiased_term(&self.ctx).map_err(err)? })
    }

    fn tree(&self) -> PyResult<Tree> {
        Ok(Tree { tree: CoreTree::from_ctx(&self.ctx).map_err(err)? })
    }

    /// Parses a term over this context, resolving names against `env`.
    #[pyo3(signature = (text, env = None))]
    fn term(&self, text: &str, env: Option<&Environment>) -> PyResult<Term> {
        let expr = surface::parse_term(text).map_err(err)?;
        let empty = Env::new();
        let env = env.map_or(&empty, |e| &e.env);
        Ok(Term { term: env.elaborate_term(&expr, &self.ctx).map_err(err)? })
    }

    fn __len__(&self) -> usize {
        self.ctx.len()
    }

    fn __str__(&self) -> String {
        self.ctx.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Context({:?})", self.ctx.to_string())
    }

    fn __eq__(&self, other: &Context) -> bool {
        core::alpha_eq_ctx(&self.ctx, &other.ctx)
    }
}

#[pyclass(frozen, skip_from_py_object, module = "cattsa")]
#[derive(Clone)]
struct Type {
    ty: core::Type,
}

#[pymethods]
impl Type {
    fn dim(&self) -> usize {
        self.ty.dim()
    }

    #[pyo3(signature = (disc_insertion = true))]
    fn normal_form(&self, disc_insertion: bool) -> Type {
        Type { ty: nf_type(&self.ty, cfg(disc_insertion)) }
    }

    /// Equality up to reduction.
    #[pyo3(signature = (other, disc_insertion = true))]
    fn convertible(&self, other: &Type, disc_insertion: bool) -> bool {
        convertible_type(&self.ty, &other.ty, cfg(disc_insertion))
    }

    fn __str__(&self) -> String {
        self.ty.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Type({:?})", self.ty.to_string())
    }

    fn __eq__(&self, other: &Type) -> bool {
        alpha_eq_type(&self.ty, &other.ty)
    }
}

#[pyclass(frozen, skip_from_py_object, module = "cattsa")]
#[derive(Clone)]
struct Term {
    term: core::Term,
}

#[pymethods]
impl Term {
    fn is_variable(&self) -> bool {
        self.term.is_var()
    }

    fn size(&self) -> usize {
        self.term.size()
    }

    fn dim(&self, ctx: &Context) -> PyResult<usize> {
        dim_term(&ctx.ctx, &self.term).map_err(err)
    }

    /// Syntactic depth.
    fn sd(&self) -> Ordinal {
        Ordinal { ord: sd_term(&self.term) }
    }

    #[pyo3(signature = (ctx, mode = "sa"))]
    fn infer(&self, ctx: &Context, mode: &str) -> PyResult<Type> {
        Ok(Type { ty: infer_term(&ctx.ctx, &self.term, self::mode(mode)?).map_err(err)? })
    }

    #[pyo3(signature = (ctx, ty, mode = "sa"))]
    fn check(&self, ctx: &Context, ty: &Type, mode: &str) -> PyResult<bool> {
        Ok(check_term(&ctx.ctx, &self.term, &ty.ty, self::mode(mode)?).is_ok())
    }

    #[pyo3(signature = (disc_insertion = true))]
    fn normal_form(&self, disc_insertion: bool) -> Term {
        Term { term: nf_term(&self.term, cfg(disc_insertion)) }
    }

    /// The normal form with one `(rule, position, before, after)` per step.
    #[pyo3(signature = (disc_insertion = true))]
    fn normal_form_traced(&self, disc_insertion: bool) -> (Term, Vec<(String, String, Term, Term)>) {
        let (nf, steps) = nf_term_traced(&self.term, cfg(disc_insertion));
        let steps = steps
            .into_iter()
            .map(|s| {
                (s.redex.rule.to_string(), s.redex.position.to_string(), Term { term: s.before }, Term { term: s.after })
            })
            .collect();
        (Term { term: nf }, steps)
    }

    /// Every one-step reduct, with the rule and position of its redex.
    #[pyo3(signature = (disc_insertion = true))]
    fn reducts(&self, disc_insertion: bool) -> Vec<(String, String, Term)> {
        raw_steps_term(&self.term, cfg(disc_insertion))
            .into_iter()
            .map(|(r, t)| (r.rule.to_string(), r.position.to_string(), Term { term: t }))
            .collect()
    }

    /// Equality up to reduction.
    #[pyo3(signature = (other, disc_insertion = true))]
    fn convertible(&self, other: &Term, disc_insertion: bool) -> bool {
        convertible_term(&self.term, &other.term, cfg(disc_insertion))
    }

    fn __str__(&self) -> String {
        self.term.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Term({:?})", self.term.to_string())
    }

    /// Alpha-equivalence.
    fn __eq__(&self, other: &Term) -> bool {
        alpha_eq_term(&self.term, &other.term)
    }
}

/// An ordinal below `ω^ω`, from its coefficients `[c_0, c_1, …]`.
#[pyclass(frozen, skip_from_py_object, module = "cattsa")]
#[derive(Clone)]
struct Ordinal {
    ord: CoreOrdinal,
}

#[pymethods]
impl Ordinal {
    #[new]
    fn new(coeffs: Vec<u64>) -> Ordinal {
        Ordinal { ord: CoreOrdinal::from_coeffs(coeffs) }
    }

    #[staticmethod]
    fn omega_pow(n: usize) -> Ordinal {
        Ordinal { ord: CoreOrdinal::omega_pow(n) }
    }

    #[getter]
    fn coeffs(&self) -> Vec<u64> {
        self.ord.coeffs().to_vec()
    }

    /// Natural sum.
    fn __add__(&self, other: &Ordinal) -> Ordinal {
        Ordinal { ord: self.ord.nat_sum(&other.ord) }
    }

    fn __lt__(&self, other: &Ordinal) -> bool {
        self.ord < other.ord
    }

    fn __le__(&self, other: &Ordinal) -> bool {
        self.ord <= other.ord
    }

    fn __gt__(&self, other: &Ordinal) -> bool {
        self.ord > other.ord
    }

    fn __ge__(&self, other: &Ordinal) -> bool {
        self.ord >= other.ord
    }

    fn __eq__(&self, other: &Ordinal) -> bool {
        self.ord == other.ord
    }

    fn __str__(&self) -> String {
        self.ord.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Ordinal({:?})", self.ord.coeffs())
    }
}

#[pyclass(frozen, skip_from_py_object, module = "cattsa")]
#[derive(Clone)]
struct Tree {
    tree: CoreTree,
}

#[pymethods]
impl Tree {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Tree> {
        Ok(Tree { tree: CoreTree::parse(text).map_err(err)? })
    }

    fn depth(&self) -> usize {
        self.tree.depth()
    }

    fn labels(&self) -> Vec<String> {
        self.tree.all_labels().iter().map(|n| n.to_string()).collect()
    }

    fn leaf_labels(&self) -> Vec<String> {
        self.tree.leaf_labels().iter().map(|n| n.to_string()).collect()
    }

    fn branching_path(&self, x: &str) -> PyResult<Vec<usize>> {
        Ok(self.tree.branching_path(&Name::new(x)).map_err(err)?.0)
    }

    fn context(&self) -> Context {
        Context { ctx: self.tree.to_ctx() }
    }

    fn __str__(&self) -> String {
        self.tree.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Tree({:?})", self.tree.to_string())
    }

    fn __eq__(&self, other: &Tree) -> bool {
        self.tree == other.tree
    }
}

/// `Δ ▷_x Θ` for the unbiased composite of `Θ`, with `ι` and `κ`.
#[pyclass(frozen, module = "cattsa")]
struct Insertion {
    #[pyo3(get)]
    context: Context,
    #[pyo3(get)]
    path: Vec<usize>,
    iota: Vec<(String, Term)>,
    kappa: Vec<(String, Term)>,
}

#[pymethods]
impl Insertion {
    #[getter]
    fn iota(&self) -> Vec<(String, Term)> {
        self.iota.clone()
    }

    #[getter]
    fn kappa(&self) -> Vec<(String, Term)> {
        self.kappa.clone()
    }

    fn __repr__(&self) -> String {
        format!("Insertion({:?})", self.context.ctx.to_string())
    }
}

#[pyfunction]
fn insert(outer: &Context, x: &str, inner: &Context) -> PyResult<Insertion> {
    let inner_type = unbiased_type(&inner.ctx).map_err(err)?;
    let prob = InsertionProblem { outer: outer.ctx.clone(), x: Name::new(x), inner: inner.ctx.clone(), inner_type };
    let res = insert_ctx(&prob).map_err(err)?;
    let pairs = |s: &core::Sub| s.entries().iter().map(|(n, t)| (n.to_string(), Term { term: t.clone() })).collect();
    Ok(Insertion {
        context: Context { ctx: res.inserted.clone() },
        path: res.path.0.clone(),
        iota: pairs(&res.iota),
        kappa: pairs(&res.kappa),
    })
}

#[pyfunction]
fn trees(labels: usize) -> Vec<Tree> {
    trees_with_labels(labels).into_iter().map(|tree| Tree { tree }).collect()
}

/// The declarations of a `.catt` source, checked in order.
#[pyclass(frozen, module = "cattsa")]
struct Environment {
    env: Env,
    outcomes: Vec<(String, Option<String>)>,
}

#[pymethods]
impl Environment {
    #[new]
    #[pyo3(signature = (source, mode = "sa", disc_insertion = true))]
    fn new(source: &str, mode: &str, disc_insertion: bool) -> PyResult<Environment> {
        let file = surface::parse(source).map_err(err)?;
        let (env, outcomes) = check_file_with(&file, self::mode(mode)?, cfg(disc_insertion));
        let outcomes = outcomes.into_iter().map(|o| (o.name, o.result.err())).collect();
        Ok(Environment { env, outcomes })
    }

    /// `(name, error)` per declaration; `error` is `None` when accepted.
    #[getter]
    fn outcomes(&self) -> Vec<(String, Option<String>)> {
        self.outcomes.clone()
    }

    /// Names of the accepted declarations.
    fn names(&self) -> Vec<String> {
        self.env.decls().map(|d| d.name.clone()).collect()
    }

    fn context(&self, name: &str) -> PyResult<Context> {
        Ok(Context { ctx: self.decl(name)?.tele.clone() })
    }

    fn term(&self, name: &str) -> PyResult<Term> {
        Ok(Term { term: self.decl(name)?.term() })
    }

    fn declared_type(&self, name: &str) -> PyResult<Type> {
        Ok(Type { ty: self.decl(name)?.ty.clone() })
    }
}

impl Environment {
    fn decl(&self, name: &str) -> PyResult<&surface::ElabDecl> {
        self.env.get(name).ok_or_else(|| match self.outcomes.iter().find(|(n, _)| n == name) {
            Some((_, Some(e))) => CattError::new_err(format!("`{name}` was rejected: {e}")),
            _ => PyValueError::new_err(format!("no declaration named `{name}`")),
        })
    }
}

#[pymodule]
fn cattsa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CattError", m.py().get_type::<CattError>())?;
    m.add_class::<Context>()?;
    m.add_class::<Type>()?;
    m.add_class::<Term>()?;
    m.add_class::<Ordinal>()?;
    m.add_class::<Tree>()?;
    m.add_class::<Insertion>()?;
    m.add_class::<Environment>()?;
    m.add_function(wrap_pyfunction!(insert, m)?)?;
    m.add_function(wrap_pyfunction!(trees, m)?)?;
    Ok(())
}
