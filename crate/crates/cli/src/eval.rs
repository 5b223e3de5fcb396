//! `wfcheck eval`: F or F' on a handful of messages, with the context given
//! by flags or borrowed from a protocol file.

use std::path::PathBuf;

use clap::{Args, ValueEnum};

use wfcheck_core::context::{Context, KeySpec, LevelSpec};
use wfcheck_core::term::{AtomKind, Subject, Term};
use wfcheck_core::{parse_term, reliable, witness};

use crate::{json, load, Format, Output, RenderedReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Function {
    /// The reliable function; messages may not hold variables other than the subject.
    F,
    /// The derivative: strips variables first.
    #[default]
    Fprime,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Atom or variable to evaluate, e.g. `alpha` or `Na^i`.
    #[arg(long)]
    atom: String,
    /// A message of the set M; repeat for several.
    #[arg(long = "term")]
    terms: Vec<String>,
    /// Honest agents, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "context")]
    agents: Vec<String>,
    /// Symmetric key and its readers, `kab=A,B`, or `pk=public`.
    #[arg(long = "key", conflicts_with = "context")]
    keys: Vec<String>,
    /// Nonce and its level, `alpha=A,B,S`, `alpha=bottom` or `alpha=top`.
    #[arg(long = "level", conflicts_with = "context")]
    levels: Vec<String>,
    #[arg(long = "fn", value_enum, default_value_t = Function::Fprime)]
    function: Function,
    /// Take agents, keys and levels from a protocol file.
    #[arg(long)]
    context: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

fn split_binding(s: &str) -> Result<(&str, &str), String> {
    s.split_once('=')
        .map(|(n, v)| (n.trim(), v.trim()))
        .filter(|(n, _)| !n.is_empty())
        .ok_or_else(|| format!("expected `name=value`, found `{s}`"))
}

fn agent_list(v: &str) -> Vec<String> {
    v.trim_matches(|c| c == '{' || c == '}')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn level_spec(v: &str) -> LevelSpec {
    match v {
        "bottom" | "⊥" => LevelSpec::Bottom,
        "top" | "⊤" => LevelSpec::Top,
        _ => LevelSpec::Agents(agent_list(v)),
    }
}

fn inline_context(a: &EvalArgs) -> Result<Context, String> {
    let mut b = Context::builder().agents(a.agents.iter().map(|s| s.trim().to_string()));
    for k in &a.keys {
        let (name, readers) = split_binding(k)?;
        let spec = if readers == "public" {
            KeySpec {
                readers: LevelSpec::Bottom,
                level: None,
                inverse: None,
                fresh: None,
            }
        } else {
            KeySpec::shared(agent_list(readers))
        };
        b = b.key(name, spec);
    }
    for l in &a.levels {
        let (name, level) = split_binding(l)?;
        b = b.nonce(name, Some(level_spec(level)), None);
    }
    let ctx = b.build().map_err(|e| e.to_string())?;
    if let Some(d) = ctx.validate().first() {
        return Err(d.to_string());
    }
    Ok(ctx)
}

pub fn run(a: EvalArgs) -> RenderedReport {
    match evaluate(&a) {
        Ok(r) => r,
        Err(e) => RenderedReport::input_error(a.out.format, e),
    }
}

fn evaluate(a: &EvalArgs) -> Result<RenderedReport, String> {
    let ctx = match &a.context {
        Some(path) => load(path)?.context,
        None => inline_context(a)?,
    };
    let kinds = |n: &str| ctx.kind_of(n);
    let subject = match parse_term(&a.atom, &kinds, true).map_err(|e| format!("--atom: {e}"))? {
        Term::Atom(x) => Subject::Atom(x),
        Term::Var(v) => Subject::Var(v),
        other => {
            return Err(format!(
                "--atom must be a single atom or variable, found `{other}`"
            ))
        }
    };
    if let Subject::Atom(x) = &subject {
        if x.kind == AtomKind::Key {
            return Err(format!("`{x}` is a key; keys are not evaluated"));
        }
    }
    let mut terms = Vec::new();
    for t in &a.terms {
        let m = parse_term(t, &kinds, true).map_err(|e| format!("--term `{t}`: {e}"))?;
        // the subject's sort comes from --atom; parse_term alone cannot know it
        let m = match &subject {
            Subject::Var(v) => m.map_vars(&|w| {
                Term::Var(if w.name == v.name {
                    v.clone()
                } else {
                    w.clone()
                })
            }),
            Subject::Atom(_) => m,
        };
        terms.push(m);
    }
    let level = match a.function {
        Function::F => {
            let stray = terms
                .iter()
                .flat_map(|m| m.variables())
                .find(|v| !matches!(&subject, Subject::Var(s) if s.name == v.name));
            if let Some(v) = stray {
                return Err(format!(
                    "F is undefined on messages holding the variable `{v}`; use --fn fprime"
                ));
            }
            reliable(&subject, &terms, &ctx)
        }
        Function::Fprime => witness(&subject, &terms, &ctx),
    }
    .map_err(|e| e.to_string())?;

    let body = match a.out.format {
        Format::Text => format!("{}\n", level.render(a.out.ascii)),
        Format::Json => json::to_string(&json::JsonEval {
            function: match a.function {
                Function::F => "F",
                Function::Fprime => "F'",
            }
            .to_string(),
            subject: subject.to_string(),
            terms: terms.iter().map(|t| t.to_string()).collect(),
            level: json::level(&level),
        }),
    };
    Ok(RenderedReport {
        format: a.out.format,
        body,
        exit_code: 0,
    })
}
