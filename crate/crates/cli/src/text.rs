//! Human-readable rendering. Layout follows the hand derivations: per rule,
//! per subject, the value on sending, the value on receiving, then the
//! comparison.

use std::fmt::Write as _;

use wfcheck_core::analysis::{AnalysisReport, Overall, RuleReport, Tagging};
use wfcheck_core::tagging::{MessagePattern, TagVerdict};
use wfcheck_core::{AtomVerdict, GeneralizedRole, SecurityLevel, Term};

/// Symbols that have an ASCII fallback.
struct Glyphs {
    geq: &'static str,
    not_geq: &'static str,
    meet: &'static str,
    plus: &'static str,
    minus: &'static str,
    empty: &'static str,
    nothing_received: &'static str,
    ascii: bool,
}

impl Glyphs {
    fn new(ascii: bool) -> Self {
        if ascii {
            Glyphs {
                geq: ">=",
                not_geq: "not >=",
                meet: "meet",
                plus: "+",
                minus: "-",
                empty: "{}",
                nothing_received: "-",
                ascii,
            }
        } else {
            Glyphs {
                geq: "⊒",
                not_geq: "⋣",
                meet: "⊓",
                plus: "⁺",
                minus: "⁻",
                empty: "∅",
                nothing_received: "□",
                ascii,
            }
        }
    }

    fn level(&self, l: &SecurityLevel) -> String {
        l.render(self.ascii)
    }

    fn ctx(&self, name: &str) -> String {
        if self.ascii {
            format!("ctx({name})")
        } else {
            format!("⌈{name}⌉")
        }
    }
}

fn join_terms(ts: &[Term]) -> String {
    ts.iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn render_roles(roles: &[GeneralizedRole], ascii: bool) -> String {
    let mut out = String::new();
    for (i, r) in roles.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = write!(out, "{}", r.display(ascii));
    }
    out
}

pub fn render_tagging(protocol: &str, patterns: &[MessagePattern], verdict: &TagVerdict) -> String {
    let mut out = format!("protocol {protocol}\n");
    for p in patterns {
        let _ = writeln!(out, "  {}. {}", p.step, p.pattern.annotated());
    }
    let _ = writeln!(out, "{verdict}");
    out
}

pub fn render_report(report: &AnalysisReport, ascii: bool) -> String {
    let g = Glyphs::new(ascii);
    let mut out = String::new();
    let _ = writeln!(out, "protocol {}", report.protocol);
    let tagging = match &report.tagging {
        Tagging::Checked(v) => v.to_string(),
        Tagging::Skipped => "skipped (--no-tagcheck)".to_string(),
    };
    let _ = writeln!(out, "tagging: {tagging}");

    if report.overall == Overall::NotTagged {
        let _ = writeln!(out, "\nNOT TAGGED: the analysis was not run");
        return out;
    }

    out.push('\n');
    out.push_str(&render_roles(&report.roles, ascii));
    for r in &report.rules {
        out.push('\n');
        render_rule(&mut out, r, &g);
    }
    if report.aborted {
        let _ = writeln!(
            out,
            "\nanalysis stopped at the first failing rule (--fail-fast)"
        );
    }
    out.push('\n');
    match &report.first_violation {
        None => {
            let _ = writeln!(out, "CERTIFIED: every rule respects Theorem LTWF");
        }
        Some(v) => {
            let verdict = report
                .rules
                .iter()
                .flat_map(|r| &r.verdicts)
                .find(|a| a.step_label == v.step_label && a.subject == v.subject)
                .expect("first violation comes from a reported verdict");
            let _ = writeln!(
                out,
                "VIOLATION at {}: {} {}: sent={} received={}",
                v.step_label,
                v.subject.kind_str(),
                v.subject,
                g.level(&verdict.level_sent),
                g.level(&verdict.level_received),
            );
        }
    }
    if let Some(h) = &report.hint {
        let _ = writeln!(out, "hint: {h}");
    }
    out
}

fn render_rule(out: &mut String, r: &RuleReport, g: &Glyphs) {
    let label = r.rule.label();
    let received = if r.rule.received.is_empty() {
        g.nothing_received.to_string()
    } else {
        join_terms(&r.rule.received)
    };
    let _ = writeln!(out, "{label}: {received} / {}", r.rule.sent);
    let r_plus = format!("r{}", g.plus);
    let r_minus = format!("R{}", g.minus);
    let received_set = if r.rule.received.is_empty() {
        g.empty.to_string()
    } else {
        join_terms(&r.rule.received)
    };
    for v in &r.verdicts {
        let s = &v.subject;
        let _ = writeln!(out, "  For {s}:");
        let _ = writeln!(out, "    On sending: {r_plus}={}", r.rule.sent);
        let _ = writeln!(out, "      F'({s}, {r_plus}) = {}", g.level(&v.level_sent));
        let _ = writeln!(out, "    On receiving: {r_minus}={received_set}");
        let _ = writeln!(
            out,
            "      F'({s}, {r_minus}) = {}",
            g.level(&v.level_received)
        );
        let _ = writeln!(out, "    {}", concordance(v, &r_plus, &r_minus, g));
    }
    let verdict = if r.holds() {
        "respects"
    } else {
        "does not respect"
    };
    let _ = writeln!(out, "  {label} {verdict} Theorem LTWF");
}

fn concordance(v: &AtomVerdict, r_plus: &str, r_minus: &str, g: &Glyphs) -> String {
    let s = &v.subject;
    let ctx = g.ctx(&s.to_string());
    let rhs = match &v.level_context {
        Some(c) => format!(
            "{ctx} {meet} F'({s}, {r_minus}) = {} {meet} {} = {}",
            g.level(c),
            g.level(&v.level_received),
            g.level(&v.rhs),
            meet = g.meet,
        ),
        None => format!(
            "{ctx} undefined, so the bound is F'({s}, {r_minus}) = {}",
            g.level(&v.rhs)
        ),
    };
    let (rel, word) = if v.holds {
        (g.geq, "holds")
    } else {
        (g.not_geq, "fails")
    };
    format!(
        "Concordance: {rhs}; F'({s}, {r_plus}) = {} {rel} {}: {word}",
        g.level(&v.level_sent),
        g.level(&v.rhs)
    )
}
