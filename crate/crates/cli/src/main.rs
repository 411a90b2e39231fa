//! `cattsa`: check, normalize and compare `.catt` declarations.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cattsa_core::insertion::{insert_ctx, InsertionProblem};
use cattsa_core::pasting::unbiased_type;
use cattsa_core::reduction::{nf_term_traced, nf_type, ReductionConfig, TraceStep};
use cattsa_core::surface::{self, check_file_with, DeclOutcome, ElabDecl, Env};
use cattsa_core::syntax::{alpha_eq_ctx, alpha_eq_term, rename_term, Ctx, Name, Term};
use cattsa_core::tree::Tree;
use cattsa_core::typecheck::{infer_term_with, Mode};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "cattsa", version, about = "Typechecker and normalizer for strictly associative Catt")]
struct Cli {
    /// Type theory to check against.
    #[arg(long, global = true, default_value = "sa", value_parser = parse_mode)]
    mode: Mode,
    /// Print every reduction step.
    #[arg(long, global = true)]
    trace: bool,
    /// Print a single JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Never insert coherences over discs.
    #[arg(long, global = true)]
    no_disc_insertion: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Typecheck every declaration of a file, in order.
    Check { file: PathBuf },
    /// Print the normal form of a declaration.
    Normalize { file: PathBuf, name: String },
    /// Decide definitional equality of two declarations over the same telescope.
    Eq { file: PathBuf, left: String, right: String },
    /// Print the type inferred for a declaration.
    Infer { file: PathBuf, name: String },
    /// Print the tree of a pasting context, optionally after an insertion.
    Tree {
        file: Option<PathBuf>,
        name: Option<String>,
        /// A telescope such as `(x : *) (y : *) (f : x -> y)`.
        #[arg(long, conflicts_with_all = ["file", "name"])]
        ctx: Option<String>,
        /// Locally maximal variable to insert into.
        #[arg(long, requires = "inner")]
        insert: Option<String>,
        /// Telescope of the inserted unbiased composite.
        #[arg(long, requires = "insert")]
        inner: Option<String>,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

/// A command failure with its exit code: 1 for rejections, 2 for usage and
/// parse errors.
struct Failure {
    code: u8,
    message: String,
    report: Value,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into(), report: Value::Null }
    }

    fn rejected(message: impl Into<String>) -> Failure {
        Failure { code: 1, message: message.into(), report: Value::Null }
    }
}

/// Text lines, a JSON report, and whether the verdict was positive.
struct Output {
    lines: Vec<String>,
    report: Value,
    success: bool,
}

struct Opts {
    mode: Mode,
    trace: bool,
    cfg: ReductionConfig,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Opts {
        mode: cli.mode,
        trace: cli.trace,
        cfg: ReductionConfig { allow_disc_insertion: !cli.no_disc_insertion },
    };
    let result = match &cli.command {
        Command::Check { file } => check(file, &opts),
        Command::Normalize { file, name } => normalize(file, name, &opts),
        Command::Eq { file, left, right } => eq(file, left, right, &opts),
        Command::Infer { file, name } => infer(file, name, &opts),
        Command::Tree { file, name, ctx, insert, inner } => {
            tree(file.as_deref(), name.as_deref(), ctx.as_deref(), insert.as_deref(), inner.as_deref(), &opts)
        }
    };
    match result {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.report).expect("json"));
            } else {
                for l in &out.lines {
                    println!("{l}");
                }
            }
            if out.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            if cli.json {
                let mut report = json!({ "error": f.message, "exit": f.code });
                if let (Value::Object(m), Value::Object(extra)) = (&mut report, f.report) {
                    m.extend(extra);
                }
                println!("{}", serde_json::to_string_pretty(&report).expect("json"));
            } else {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn load(file: &Path, opts: &Opts) -> Result<(Env, Vec<DeclOutcome>), Failure> {
    let text = std::fs::read_to_string(file).map_err(|e| Failure::usage(format!("{}: {e}", file.display())))?;
    let parsed = surface::parse(&text).map_err(|e| Failure::usage(format!("{}:{e}", file.display())))?;
    Ok(check_file_with(&parsed, opts.mode, opts.cfg))
}

/// An accepted declaration, or the reason it is unavailable.
fn lookup<'a>(env: &'a Env, outcomes: &[DeclOutcome], name: &str) -> Result<&'a ElabDecl, Failure> {
    if let Some(d) = env.get(name) {
        return Ok(d);
    }
    match outcomes.iter().find(|o| o.name == name) {
        Some(DeclOutcome { result: Err(e), .. }) => Err(Failure::rejected(format!("`{name}` was rejected: {e}"))),
        _ => Err(Failure::usage(format!("no declaration named `{name}`"))),
    }
}

fn trace_json(steps: &[TraceStep]) -> Value {
    steps
        .iter()
        .map(|s| {
            json!({
                "rule": s.redex.rule.to_string(),
                "position": s.redex.position.to_string(),
                "before": s.before.to_string(),
                "after": s.after.to_string(),
            })
        })
        .collect()
}

fn check(file: &Path, opts: &Opts) -> Result<Output, Failure> {
    let (_, outcomes) = load(file, opts)?;
    let mut lines = Vec::new();
    let mut decls = Vec::new();
    for o in &outcomes {
        match &o.result {
            Ok(_) => lines.push(format!("ok {}", o.name)),
            Err(e) => lines.push(format!("error {}: {e}", o.name)),
        }
        decls.push(json!({
            "name": o.name,
            "line": o.span.start.line,
            "col": o.span.start.col,
            "ok": o.result.is_ok(),
            "error": o.result.as_ref().err(),
        }));
    }
    let rejected = outcomes.iter().filter(|o| o.result.is_err()).count();
    lines.push(format!("{} declarations, {rejected} rejected", outcomes.len()));
    Ok(Output {
        lines,
        report: json!({ "command": "check", "mode": opts.mode.to_string(), "declarations": decls, "rejected": rejected }),
        success: rejected == 0,
    })
}

/// The normal form and its trace; terms are left alone in plain Catt,
/// whose equality is syntactic.
fn reduce(t: &Term, opts: &Opts) -> (Term, Vec<TraceStep>) {
    match opts.mode {
        Mode::Catt => (t.clone(), Vec::new()),
        Mode::CattSa => nf_term_traced(t, opts.cfg),
    }
}

fn normalize(file: &Path, name: &str, opts: &Opts) -> Result<Output, Failure> {
    let (env, outcomes) = load(file, opts)?;
    let d = lookup(&env, &outcomes, name)?;
    let t = d.term();
    let (nf, steps) = reduce(&t, opts);
    let mut lines = Vec::new();
    if opts.trace {
        lines.extend(steps.iter().map(ToString::to_string));
    }
    lines.push(nf.to_string());
    Ok(Output {
        lines,
        report: json!({
            "command": "normalize",
            "mode": opts.mode.to_string(),
            "name": name,
            "term": t.to_string(),
            "normal_form": nf.to_string(),
            "trace": trace_json(&steps),
        }),
        success: true,
    })
}

fn eq(file: &Path, left: &str, right: &str, opts: &Opts) -> Result<Output, Failure> {
    let (env, outcomes) = load(file, opts)?;
    let l = lookup(&env, &outcomes, left)?;
    let r = lookup(&env, &outcomes, right)?;
    if !alpha_eq_ctx(&l.tele, &r.tele) {
        return Err(Failure::usage(format!("`{left}` and `{right}` have different telescopes")));
    }
    let map: HashMap<Name, Name> = r.tele.names().cloned().zip(l.tele.names().cloned()).collect();
    let lt = l.term();
    let rt = rename_term(&r.term(), &map);
    let (ln, lsteps) = reduce(&lt, opts);
    let (rn, rsteps) = reduce(&rt, opts);
    let equal = alpha_eq_term(&ln, &rn);
    let mut lines = Vec::new();
    if opts.trace {
        for (n, steps) in [(left, &lsteps), (right, &rsteps)] {
            lines.extend(steps.iter().map(|s| format!("{n}: {s}")));
        }
    }
    lines.push(if equal { "equal".to_string() } else { "not equal".to_string() });
    Ok(Output {
        lines,
        report: json!({
            "command": "eq",
            "mode": opts.mode.to_string(),
            "left": { "name": left, "normal_form": ln.to_string(), "trace": trace_json(&lsteps) },
            "right": { "name": right, "normal_form": rn.to_string(), "trace": trace_json(&rsteps) },
            "equal": equal,
        }),
        success: equal,
    })
}

fn infer(file: &Path, name: &str, opts: &Opts) -> Result<Output, Failure> {
    let (env, outcomes) = load(file, opts)?;
    let d = lookup(&env, &outcomes, name)?;
    let ty = infer_term_with(&d.tele, &d.term(), opts.mode, opts.cfg).map_err(|e| Failure::rejected(e.to_string()))?;
    let normal = match opts.mode {
        Mode::Catt => ty.clone(),
        Mode::CattSa => nf_type(&ty, opts.cfg),
    };
    let mut lines = vec![ty.to_string()];
    if normal != ty {
        lines.push(format!("≡ {normal}"));
    }
    Ok(Output {
        lines,
        report: json!({
            "command": "infer",
            "mode": opts.mode.to_string(),
            "name": name,
            "type": ty.to_string(),
            "normal_type": normal.to_string(),
        }),
        success: true,
    })
}

fn telescope(text: &str) -> Result<Ctx, Failure> {
    let binders = surface::parse_telescope(text).map_err(|e| Failure::usage(e.to_string()))?;
    Env::new().elaborate_telescope(&binders).map_err(|e| Failure::rejected(e.to_string()))
}

fn tree(
    file: Option<&Path>,
    name: Option<&str>,
    ctx: Option<&str>,
    insert: Option<&str>,
    inner: Option<&str>,
    opts: &Opts,
) -> Result<Output, Failure> {
    let outer = match (file, name, ctx) {
        (_, _, Some(text)) => telescope(text)?,
        (Some(file), Some(name), None) => {
            let (env, outcomes) = load(file, opts)?;
            lookup(&env, &outcomes, name)?.tele.clone()
        }
        _ => return Err(Failure::usage("expected FILE NAME or --ctx TELESCOPE")),
    };
    let t = Tree::from_ctx(&outer).map_err(|e| Failure::rejected(e.to_string()))?;
    let mut lines = vec![t.to_string()];
    let mut report = json!({ "command": "tree", "ctx": outer.to_string(), "tree": t.to_string() });
    if let (Some(x), Some(inner)) = (insert, inner) {
        let inner = telescope(inner)?;
        let inner_type = unbiased_type(&inner).map_err(|e| Failure::rejected(e.to_string()))?;
        let prob = InsertionProblem { outer, x: Name::new(x), inner, inner_type };
        let res = insert_ctx(&prob).map_err(|e| Failure::rejected(e.to_string()))?;
        let inserted = Tree::from_ctx(&res.inserted).map_err(|e| Failure::rejected(e.to_string()))?;
        lines.push(format!("▷_{x} {}", inserted));
        let kappa: Vec<(String, String)> =
            res.kappa.entries().iter().map(|(y, u)| (y.to_string(), u.to_string())).collect();
        lines.extend(kappa.iter().map(|(y, u)| format!("  {y} ↦ {u}")));
        report["insertion"] = json!({
            "x": x,
            "path": res.path.to_string(),
            "tree": inserted.to_string(),
            "ctx": res.inserted.to_string(),
            "kappa": kappa.iter().map(|(y, u)| json!({ "var": y, "image": u })).collect::<Vec<_>>(),
            "iota": res.iota.entries().iter().map(|(y, u)| json!({ "var": y.to_string(), "image": u.to_string() })).collect::<Vec<_>>(),
        });
    }
    Ok(Output { lines, report, success: true })
}
