//! Secrecy analysis of cryptographic protocols with witness functions.
//!
//! A protocol is parsed from the `.wf` language ([`dsl::parse`]), each
//! principal's generalized role is derived ([`roles`]), and every send is
//! checked against what was received using the derivative witness function
//! ([`witness`]). [`analysis::analyze`] ties the pieces together.

pub mod analysis;
pub mod context;
pub mod dsl;
pub mod lattice;
pub mod roles;
pub mod tagging;
pub mod term;
pub mod unify;
pub mod witness;

pub use analysis::{
    analyze, AnalysisOptions, AnalysisReport, Overall, RuleReport, Tagging, Violation,
};
pub use context::{Context, ContextBuilder, ContextError, Diagnostic, KeySpec, LevelSpec};
pub use dsl::{parse, parse_term, print, DslError, ProtocolSpec, Step};
pub use lattice::{parse_level, LatticeError, SecurityLevel, Universe, INTRUDER};
pub use roles::{generalize, rules, Direction, GeneralizedRole, RoleEvent, Rule};
pub use tagging::{tagged, TagVerdict};
pub use term::{AtomKind, AtomName, Sort, Subject, Term, Var};
pub use unify::{unify, Substitution};
pub use witness::{check_rule, reliable, witness, AtomVerdict, WitnessError};
