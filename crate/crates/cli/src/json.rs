//! Machine-readable rendering. Levels are arrays of agent names (the
//! intruder `I` included), so ⊥ is the full universe and ⊤ is `[]`.

use serde::{Deserialize, Serialize};

use wfcheck_core::analysis::{AnalysisReport, Tagging};
use wfcheck_core::tagging::{MessagePattern, TagVerdict};
use wfcheck_core::{GeneralizedRole, LatticeError, SecurityLevel, Universe};

pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

pub fn level(l: &SecurityLevel) -> Vec<String> {
    l.readers().into_iter().map(String::from).collect()
}

pub fn level_from_json(
    agents: &[String],
    universe: &Universe,
) -> Result<SecurityLevel, LatticeError> {
    universe.level(agents.iter().map(String::as_str))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonSubject {
    pub name: String,
    pub kind: String,
    pub level_sent: Vec<String>,
    pub level_received: Vec<String>,
    pub level_context: Option<Vec<String>>,
    pub rhs: Vec<String>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonRule {
    pub label: String,
    pub role: String,
    pub session: String,
    pub received: Vec<String>,
    pub sent: String,
    pub holds: bool,
    pub subjects: Vec<JsonSubject>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonViolation {
    pub step: String,
    pub subject: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonReport {
    pub protocol: String,
    /// `null` when the check was skipped.
    pub tagged: Option<bool>,
    pub overall: String,
    pub aborted: bool,
    pub rules: Vec<JsonRule>,
    pub first_violation: Option<JsonViolation>,
    pub hint: Option<String>,
}

impl JsonReport {
    pub fn from_report(r: &AnalysisReport) -> Self {
        JsonReport {
            protocol: r.protocol.clone(),
            tagged: match &r.tagging {
                Tagging::Checked(v) => Some(v.is_tagged()),
                Tagging::Skipped => None,
            },
            overall: r.overall.as_str().to_string(),
            aborted: r.aborted,
            rules: r
                .rules
                .iter()
                .map(|rr| JsonRule {
                    label: rr.rule.label(),
                    role: rr.rule.principal.clone(),
                    session: rr.rule.session.clone(),
                    received: rr.rule.received.iter().map(|t| t.to_string()).collect(),
                    sent: rr.rule.sent.to_string(),
                    holds: rr.holds(),
                    subjects: rr
                        .verdicts
                        .iter()
                        .map(|v| JsonSubject {
                            name: v.subject.to_string(),
                            kind: v.subject.kind_str().to_string(),
                            level_sent: level(&v.level_sent),
                            level_received: level(&v.level_received),
                            level_context: v.level_context.as_ref().map(level),
                            rhs: level(&v.rhs),
                            holds: v.holds,
                        })
                        .collect(),
                })
                .collect(),
            first_violation: r.first_violation.as_ref().map(|v| JsonViolation {
                step: v.step_label.clone(),
                subject: v.subject.to_string(),
            }),
            hint: r.hint.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonEvent {
    pub direction: String,
    pub counterpart: Option<String>,
    pub message: String,
    pub step: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonRole {
    pub principal: String,
    pub session: String,
    pub overridden: bool,
    pub events: Vec<JsonEvent>,
}

impl JsonRole {
    pub fn from_role(r: &GeneralizedRole) -> Self {
        JsonRole {
            principal: r.principal.clone(),
            session: r.session.clone(),
            overridden: r.overridden,
            events: r
                .events
                .iter()
                .map(|e| JsonEvent {
                    direction: e.direction.to_string(),
                    counterpart: e.counterpart.clone(),
                    message: e.message.to_string(),
                    step: e.step,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonPattern {
    pub step: u32,
    pub sender: String,
    pub pattern: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonTagging {
    pub protocol: String,
    pub tagged: bool,
    pub patterns: Vec<JsonPattern>,
    /// The two unifiable patterns and their unifier.
    pub witness: Option<JsonTagWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonTagWitness {
    pub first_step: u32,
    pub second_step: u32,
    pub left: String,
    pub right: String,
    pub unifier: String,
}

impl JsonTagging {
    pub fn new(protocol: &str, patterns: &[MessagePattern], verdict: &TagVerdict) -> Self {
        JsonTagging {
            protocol: protocol.to_string(),
            tagged: verdict.is_tagged(),
            patterns: patterns
                .iter()
                .map(|p| JsonPattern {
                    step: p.step,
                    sender: p.sender.clone(),
                    pattern: p.pattern.annotated().to_string(),
                })
                .collect(),
            witness: match verdict {
                TagVerdict::Tagged => None,
                TagVerdict::NotTagged(w) => Some(JsonTagWitness {
                    first_step: w.first.step,
                    second_step: w.second.step,
                    left: w.left.annotated().to_string(),
                    right: w.right.annotated().to_string(),
                    unifier: w.unifier.to_string(),
                }),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonEval {
    pub function: String,
    pub subject: String,
    pub terms: Vec<String>,
    pub level: Vec<String>,
}
