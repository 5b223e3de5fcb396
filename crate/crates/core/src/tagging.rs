//! Tagging precondition: the messages a protocol generates must be pairwise
//! distinguishable. Each step's message is generalized over its fresh data
//! and every pair of distinct steps, renamed apart, must fail to unify.

use std::fmt;

use crate::dsl::ProtocolSpec;
use crate::term::{Sort, Term, Var};
use crate::unify::{rename_apart, unify, Substitution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessagePattern {
    pub step: u32,
    pub sender: String,
    /// The step message with fresh nonces and keys replaced by sorted
    /// variables named after them.
    pub pattern: Term,
}

impl MessagePattern {
    /// A copy of the pattern whose variables belong to session `session`.
    pub fn copy(&self, session: u32) -> Term {
        rename_apart(&self.pattern, &format!("_{session}"))
    }
}

pub fn message_patterns(spec: &ProtocolSpec) -> Vec<MessagePattern> {
    spec.steps
        .iter()
        .map(|s| MessagePattern {
            step: s.number,
            sender: s.sender.clone(),
            pattern: s
                .message
                .map_atoms(&|a| match spec.context.freshness(&a.base) {
                    Some(_) => Term::Var(Var::new(a.base.clone(), Sort::of_kind(a.kind))),
                    None => Term::Atom(a.clone()),
                }),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagWitness {
    pub first: MessagePattern,
    pub second: MessagePattern,
    pub left: Term,
    pub right: Term,
    pub unifier: Substitution,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TagVerdict {
    Tagged,
    NotTagged(Box<TagWitness>),
}

impl TagVerdict {
    pub fn is_tagged(&self) -> bool {
        matches!(self, TagVerdict::Tagged)
    }
}

impl fmt::Display for TagVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagVerdict::Tagged => f.write_str("tagged"),
            TagVerdict::NotTagged(w) => write!(
                f,
                "not tagged: step {} pattern {} unifies with step {} pattern {} under {}",
                w.first.step, w.left, w.second.step, w.right, w.unifier
            ),
        }
    }
}

/// Returns the first unifiable pair of patterns from different steps, in
/// step order, or `Tagged`.
pub fn tagged(spec: &ProtocolSpec) -> TagVerdict {
    let patterns = message_patterns(spec);
    for (i, a) in patterns.iter().enumerate() {
        for b in &patterns[i + 1..] {
            let (left, right) = (a.copy(1), b.copy(2));
            if let Some(unifier) = unify(&left, &right) {
                return TagVerdict::NotTagged(Box::new(TagWitness {
                    first: a.clone(),
                    second: b.clone(),
                    left,
                    right,
                    unifier,
                }));
            }
        }
    }
    TagVerdict::Tagged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    const NS: &str = include_str!("../../../protocols/ns_symmetric.wf");

    #[test]
    fn ns_patterns() {
        let spec = parse(NS).unwrap();
        let p = message_patterns(&spec);
        assert_eq!(p.len(), 5);
        assert_eq!(p[0].pattern.to_string(), "A.B.Na");
        assert_eq!(p[3].pattern.annotated().to_string(), "{Nb:nonce}kab:key");
        assert_eq!(
            p[4].pattern.annotated().to_string(),
            "{pred(Nb:nonce)}kab:key"
        );
        assert!(p[0]
            .pattern
            .variables()
            .iter()
            .all(|v| v.sort == Sort::Nonce));
    }

    #[test]
    fn ns_is_tagged() {
        assert_eq!(tagged(&parse(NS).unwrap()), TagVerdict::Tagged);
    }

    #[test]
    fn same_shape_replies_are_not_tagged() {
        let text = "protocol P; agents A, B; key kab shared(A,B);
            nonce Na level {A,B} fresh by A at 1; nonce Nb level {A,B} fresh by B at 2;
            steps { 1. A -> B : {Na}kab  2. B -> A : {Nb}kab }";
        let spec = parse(text).unwrap();
        let TagVerdict::NotTagged(w) = tagged(&spec) else {
            panic!("expected not tagged")
        };
        assert_eq!((w.first.step, w.second.step), (1, 2));
        assert_eq!(w.unifier.apply(&w.left), w.unifier.apply(&w.right));
    }

    #[test]
    fn single_step_and_empty_protocols() {
        let spec = parse("protocol P; agents A, B; steps { 1. A -> B : A }").unwrap();
        assert!(tagged(&spec).is_tagged());
        let spec = parse("protocol P; agents A, B; steps { }").unwrap();
        assert!(message_patterns(&spec).is_empty());
        assert!(tagged(&spec).is_tagged());
    }
}
