//! The reliable function `F`, its derivative `F′` for messages with
//! variables, and the per-rule growth check.
//!
//! `F(α, M)` bounds who may learn `α` from `M`. For each message it is
//! evaluated in a fixed order: absent atoms give ⊤, the bare atom gives ⊥,
//! concatenations (and opaque applications) combine their parts with ⊓, and
//! an encryption either protects `α` (its inverse key is held by no more
//! agents than ⌈α⌉ allows, giving ⌈k⁻¹⌉ ∪ ID(body)) or is looked through.
//! A variable key protects nothing.

use thiserror::Error;

use crate::context::{Context, ContextError, InverseReaders};
use crate::lattice::{LatticeError, SecurityLevel};
use crate::roles::Rule;
use crate::term::{identities, strip_variables, Subject, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// The level `α` is compared against when deciding whether a key protects
/// it. Variables count as ⊥ so that any declared key protects them; atoms
/// without a declared level count as ⊤.
pub fn effective_level(alpha: &Subject, ctx: &Context) -> SecurityLevel {
    match alpha {
        Subject::Var(_) => ctx.universe().bottom(),
        Subject::Atom(a) => ctx.level_of(a).unwrap_or_else(|| ctx.universe().top()),
    }
}

/// `F(α, M)`. `M` should hold no variable other than `α` itself.
pub fn reliable(
    alpha: &Subject,
    msgs: &[Term],
    ctx: &Context,
) -> Result<SecurityLevel, WitnessError> {
    let threshold = effective_level(alpha, ctx);
    let alpha_term = alpha.as_term();
    let mut acc = ctx.universe().top();
    for m in msgs {
        acc = acc.meet(&eval(alpha, &alpha_term, m, ctx, &threshold)?)?;
    }
    Ok(acc)
}

fn eval(
    alpha: &Subject,
    alpha_term: &Term,
    m: &Term,
    ctx: &Context,
    threshold: &SecurityLevel,
) -> Result<SecurityLevel, WitnessError> {
    if !alpha.occurs_in(m) {
        return Ok(ctx.universe().top());
    }
    if m == alpha_term {
        return Ok(ctx.universe().bottom());
    }
    match m {
        Term::Concat(parts) | Term::Apply(_, parts) => {
            let mut acc = ctx.universe().top();
            for p in parts {
                acc = acc.meet(&eval(alpha, alpha_term, p, ctx, threshold)?)?;
            }
            Ok(acc)
        }
        Term::Enc(body, key) => match ctx.readers_of_inverse(key)? {
            InverseReaders::Known(readers) if readers.geq(threshold)? => {
                let ids = ctx
                    .universe()
                    .level(identities(body).iter().map(|a| a.base.as_str()))?;
                Ok(readers.meet(&ids)?)
            }
            _ => eval(alpha, alpha_term, body, ctx, threshold),
        },
        // occurs_in holds and m differs from alpha, so m is compound
        Term::Atom(_) | Term::Var(_) => Ok(ctx.universe().top()),
    }
}

/// `F′(α, M)`: removes every variable other than `α` from each message,
/// drops the messages that vanish, and applies `F`.
pub fn witness(
    alpha: &Subject,
    msgs: &[Term],
    ctx: &Context,
) -> Result<SecurityLevel, WitnessError> {
    let keep = match alpha {
        Subject::Var(v) => Some(v),
        Subject::Atom(_) => None,
    };
    let stripped: Vec<Term> = msgs
        .iter()
        .filter_map(|m| strip_variables(m, keep))
        .collect();
    reliable(alpha, &stripped, ctx)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomVerdict {
    pub subject: Subject,
    pub step_label: String,
    /// `F′(α, r⁺)`
    pub level_sent: SecurityLevel,
    /// `F′(α, R⁻)`
    pub level_received: SecurityLevel,
    /// `⌈α⌉`, undefined for variables and undeclared atoms.
    pub level_context: Option<SecurityLevel>,
    /// `⌈α⌉ ⊓ F′(α, R⁻)`, or `F′(α, R⁻)` alone when `⌈α⌉` is undefined.
    pub rhs: SecurityLevel,
    pub holds: bool,
    /// Whether α occurs in `r⁺`; other subjects are only reported in
    /// diagnostic mode.
    pub in_sent: bool,
}

/// Checks `F′(α, r⁺) ⊒ ⌈α⌉ ⊓ F′(α, R⁻)` for every atom and variable of
/// `r⁺` outside key positions. With `diagnostic`, subjects that only occur
/// in `R⁻` are checked as well.
pub fn check_rule(
    rule: &Rule,
    ctx: &Context,
    diagnostic: bool,
) -> Result<Vec<AtomVerdict>, WitnessError> {
    let mut subjects: Vec<Subject> = Vec::new();
    if diagnostic {
        for m in &rule.received {
            for s in m.subjects_in_order() {
                if !subjects.contains(&s) {
                    subjects.push(s);
                }
            }
        }
    }
    for s in rule.sent.subjects_in_order() {
        if !subjects.contains(&s) {
            subjects.push(s);
        }
    }

    let label = rule.label();
    let sent = std::slice::from_ref(&rule.sent);
    subjects
        .into_iter()
        .map(|subject| {
            let level_sent = witness(&subject, sent, ctx)?;
            let level_received = witness(&subject, &rule.received, ctx)?;
            let level_context = match &subject {
                Subject::Atom(a) => ctx.level_of(a),
                Subject::Var(_) => None,
            };
            let rhs = match &level_context {
                Some(c) => c.meet(&level_received)?,
                None => level_received.clone(),
            };
            let holds = level_sent.geq(&rhs)?;
            Ok(AtomVerdict {
                in_sent: subject.occurs_in(&rule.sent),
                subject,
                step_label: label.clone(),
                level_sent,
                level_received,
                level_context,
                rhs,
                holds,
            })
        })
        .collect()
}
