//! Whole-protocol analysis: tagging precondition, generalized roles, and a
//! growth verdict for every subject of every rule.

use std::fmt;

use crate::dsl::ProtocolSpec;
use crate::roles::{all_roles, rules, GeneralizedRole, Rule};
use crate::tagging::{tagged, TagVerdict};
use crate::term::{Subject, Term};
use crate::witness::{check_rule, AtomVerdict, WitnessError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisOptions {
    /// Also report subjects that occur only in `R⁻`.
    pub diagnostic: bool,
    /// Stop after the first rule holding a failing verdict.
    pub fail_fast: bool,
    pub check_tagging: bool,
    /// Use hand-written roles from the spec when present.
    pub use_overrides: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            diagnostic: false,
            fail_fast: false,
            check_tagging: true,
            use_overrides: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tagging {
    Checked(TagVerdict),
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overall {
    Certified,
    Violation,
    NotTagged,
}

impl Overall {
    pub fn as_str(self) -> &'static str {
        match self {
            Overall::Certified => "certified",
            Overall::Violation => "violation",
            Overall::NotTagged => "not-tagged",
        }
    }
}

impl fmt::Display for Overall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleReport {
    pub rule: Rule,
    pub verdicts: Vec<AtomVerdict>,
}

impl RuleReport {
    pub fn holds(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub step_label: String,
    pub subject: Subject,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisReport {
    pub protocol: String,
    pub tagging: Tagging,
    pub roles: Vec<GeneralizedRole>,
    pub rules: Vec<RuleReport>,
    pub overall: Overall,
    pub first_violation: Option<Violation>,
    /// Set when `fail_fast` cut the analysis short.
    pub aborted: bool,
    pub hint: Option<String>,
}

impl AnalysisReport {
    pub fn failures(&self) -> impl Iterator<Item = &AtomVerdict> {
        self.rules
            .iter()
            .flat_map(|r| r.verdicts.iter())
            .filter(|v| !v.holds)
    }
}

pub fn analyze(spec: &ProtocolSpec, opts: AnalysisOptions) -> Result<AnalysisReport, WitnessError> {
    let tagging = if opts.check_tagging {
        Tagging::Checked(tagged(spec))
    } else {
        Tagging::Skipped
    };
    if let Tagging::Checked(TagVerdict::NotTagged(_)) = tagging {
        return Ok(AnalysisReport {
            protocol: spec.name.clone(),
            tagging,
            roles: Vec::new(),
            rules: Vec::new(),
            overall: Overall::NotTagged,
            first_violation: None,
            aborted: false,
            hint: None,
        });
    }

    let roles = all_roles(spec, opts.use_overrides);
    let mut reports = Vec::new();
    let mut first_violation = None;
    let mut aborted = false;
    let mut hint = None;
    'roles: for role in &roles {
        for rule in rules(role) {
            let verdicts = check_rule(&rule, &spec.context, opts.diagnostic)?;
            let failed = verdicts.iter().find(|v| !v.holds).cloned();
            reports.push(RuleReport { rule, verdicts });
            if let Some(v) = failed {
                if first_violation.is_none() {
                    let rule = &reports.last().expect("just pushed").rule;
                    hint = replay_hint(role, rule, &v.subject);
                    first_violation = Some(Violation {
                        step_label: v.step_label.clone(),
                        subject: v.subject.clone(),
                    });
                }
                if opts.fail_fast {
                    aborted = true;
                    break 'roles;
                }
            }
        }
    }
    let overall = if first_violation.is_some() {
        Overall::Violation
    } else {
        Overall::Certified
    };
    Ok(AnalysisReport {
        protocol: spec.name.clone(),
        tagging,
        roles,
        rules: reports,
        overall,
        first_violation,
        aborted,
        hint,
    })
}

/// A variable standing for a ciphertext the principal cannot open, sent
/// outside any encryption, is a ticket forwarded in clear.
fn replay_hint(role: &GeneralizedRole, rule: &Rule, subject: &Subject) -> Option<String> {
    let Subject::Var(v) = subject else {
        return None;
    };
    let ground = role.bindings.get(v)?;
    if !matches!(ground, Term::Enc(..)) || !in_clear(&rule.sent, v) {
        return None;
    }
    let step = rule
        .sent_step
        .map(|s| format!(" at narration step {s}"))
        .unwrap_or_default();
    Some(format!(
        "{v} stands for the ticket {ground}, which {label} forwards without protection{step}. \
         An intruder who records such tickets and later learns the session key they carry \
         can replay them to the recipient (Denning-Sacco replay). A refused certificate is \
         a warning, not a proof of attack.",
        label = rule.label(),
    ))
}

fn in_clear(m: &Term, v: &crate::term::Var) -> bool {
    match m {
        Term::Var(w) => w == v,
        Term::Atom(_) => false,
        Term::Concat(ts) | Term::Apply(_, ts) => ts.iter().any(|t| in_clear(t, v)),
        Term::Enc(..) => false,
    }
}
