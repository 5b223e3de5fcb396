//! Generalized roles: each principal's view of the narration, with the
//! components it cannot verify abstracted into variables, and the
//! receive/send rules derived from them.

use std::collections::BTreeMap;
use std::fmt;

use crate::context::{Context, InverseReaders};
use crate::dsl::{ProtocolSpec, RoleOverride};
use crate::lattice::INTRUDER;
use crate::term::{AtomKind, AtomName, Sort, Term, Var};
use crate::unify::{unify, Substitution};

const SESSION_SYMBOLS: &[&str] = &["i", "j", "n", "p", "q", "r", "s", "t", "u", "v", "w"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Recv,
    Send,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Recv => "recv",
            Direction::Send => "send",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleEvent {
    pub direction: Direction,
    /// The honest agent on the other end; the intruder mediates every
    /// exchange, so it is rendered as `I(B)`.
    pub counterpart: Option<String>,
    pub message: Term,
    /// Narration step this event instantiates, when known.
    pub step: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedRole {
    pub principal: String,
    pub session: String,
    pub events: Vec<RoleEvent>,
    /// Ground narration subterm each role variable stands for.
    pub bindings: BTreeMap<Var, Term>,
    pub overridden: bool,
}

/// One receive/send pair `R⁻ / r⁺` of a role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub principal: String,
    pub session: String,
    pub index: usize,
    /// Every message received up to this send, in order, without repeats.
    pub received: Vec<Term>,
    pub sent: Term,
    pub sent_step: Option<u32>,
}

impl Rule {
    /// `S_A^2` style identifier.
    pub fn label(&self) -> String {
        format!("S_{}^{}", self.principal, self.index)
    }
}

impl GeneralizedRole {
    /// Substitutes each variable by its narration subterm and drops session
    /// indices.
    pub fn ground_instance(&self, m: &Term) -> Term {
        let sigma =
            Substitution::from_bindings(self.bindings.iter().map(|(v, t)| (v.clone(), t.clone())))
                .unwrap_or_default();
        sigma.apply(m).without_sessions()
    }

    /// Same events up to a consistent, bijective renaming of variables.
    /// Sorts are not compared.
    pub fn equivalent_up_to_renaming(&self, other: &GeneralizedRole) -> bool {
        if self.principal != other.principal || self.events.len() != other.events.len() {
            return false;
        }
        let mut fwd = BTreeMap::new();
        let mut back = BTreeMap::new();
        self.events.iter().zip(&other.events).all(|(a, b)| {
            a.direction == b.direction && same_shape(&a.message, &b.message, &mut fwd, &mut back)
        })
    }
}

fn same_shape(
    a: &Term,
    b: &Term,
    fwd: &mut BTreeMap<String, String>,
    back: &mut BTreeMap<String, String>,
) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            let f = fwd
                .entry(x.name.clone())
                .or_insert_with(|| y.name.clone())
                .clone();
            let g = back
                .entry(y.name.clone())
                .or_insert_with(|| x.name.clone())
                .clone();
            f == y.name && g == x.name
        }
        (Term::Atom(x), Term::Atom(y)) => x == y,
        (Term::Concat(xs), Term::Concat(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| same_shape(x, y, fwd, back))
        }
        (Term::Enc(b1, k1), Term::Enc(b2, k2)) => {
            same_shape(b1, b2, fwd, back) && same_shape(k1, k2, fwd, back)
        }
        (Term::Apply(f, xs), Term::Apply(g, ys)) => {
            f == g
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| same_shape(x, y, fwd, back))
        }
        _ => false,
    }
}

struct Projected {
    direction: Direction,
    counterpart: String,
    step: u32,
    message: Term,
}

fn project(spec: &ProtocolSpec, principal: &str) -> Vec<Projected> {
    spec.steps
        .iter()
        .filter_map(|s| {
            if s.sender == principal {
                Some(Projected {
                    direction: Direction::Send,
                    counterpart: s.receiver.clone(),
                    step: s.number,
                    message: s.message.clone(),
                })
            } else if s.receiver == principal {
                Some(Projected {
                    direction: Direction::Recv,
                    counterpart: s.sender.clone(),
                    step: s.number,
                    message: s.message.clone(),
                })
            } else {
                None
            }
        })
        .collect()
}

fn default_session(spec: &ProtocolSpec, principal: &str) -> String {
    let idx = spec
        .context
        .agents()
        .iter()
        .position(|a| a == principal)
        .unwrap_or(0);
    SESSION_SYMBOLS
        .get(idx)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("s{idx}"))
}

/// The generalized role of `principal`. A hand-written override in the spec
/// takes precedence over derivation.
pub fn generalize(spec: &ProtocolSpec, principal: &str) -> GeneralizedRole {
    match spec.role_override(principal) {
        Some(o) => from_override(spec, o),
        None => derive(spec, principal),
    }
}

/// Derives the role from the narration, ignoring any override.
pub fn derive(spec: &ProtocolSpec, principal: &str) -> GeneralizedRole {
    let session = default_session(spec, principal);
    let mut abs = Abstraction {
        ctx: &spec.context,
        principal,
        session: &session,
        learned: Vec::new(),
    };
    let events = project(spec, principal)
        .into_iter()
        .map(|p| RoleEvent {
            message: abs.abstract_term(&p.message, p.direction),
            direction: p.direction,
            counterpart: Some(p.counterpart),
            step: Some(p.step),
        })
        .collect();
    let bindings = abs.learned.into_iter().map(|(t, v)| (v, t)).collect();
    GeneralizedRole {
        principal: principal.to_string(),
        session,
        events,
        bindings,
        overridden: false,
    }
}

struct Abstraction<'a> {
    ctx: &'a Context,
    principal: &'a str,
    session: &'a str,
    /// Narration subterms already replaced by a variable, in order.
    learned: Vec<(Term, Var)>,
}

impl Abstraction<'_> {
    fn lookup(&self, m: &Term) -> Option<&Var> {
        self.learned.iter().find(|(t, _)| t == m).map(|(_, v)| v)
    }

    fn fresh_var(&mut self, m: &Term, sort: Sort) -> Term {
        let v = Var::new(format!("V{}", self.learned.len() + 1), sort);
        self.learned.push((m.clone(), v.clone()));
        Term::Var(v)
    }

    fn creator_of(&self, a: &AtomName) -> Option<&str> {
        self.ctx.freshness(&a.base).map(|f| f.creator.as_str())
    }

    /// Whether the principal holds the value of key atom `k`.
    fn holds_key(&self, k: &Term) -> bool {
        let Term::Atom(a) = k else { return false };
        if self.lookup(k).is_some() {
            return true;
        }
        match self.creator_of(a) {
            Some(c) => c == self.principal,
            None => self
                .ctx
                .key_readers(&a.base)
                .is_some_and(|r| r.contains(self.principal)),
        }
    }

    fn can_open(&self, key: &Term) -> bool {
        let readers_ok = matches!(
            self.ctx.readers_of_inverse(key),
            Ok(InverseReaders::Known(r)) if r.contains(self.principal)
        );
        readers_ok
            && self
                .ctx
                .inverse_key(key)
                .is_ok_and(|inv| self.holds_key(&inv))
    }

    fn can_build(&self, key: &Term) -> bool {
        let Term::Atom(a) = key else { return false };
        self.ctx
            .key_readers(&a.base)
            .is_some_and(|r| r.contains(self.principal))
            && self.holds_key(key)
    }

    fn abstract_term(&mut self, m: &Term, dir: Direction) -> Term {
        if let Some(v) = self.lookup(m) {
            return Term::Var(v.clone());
        }
        match m {
            Term::Atom(a) => match self.creator_of(a) {
                Some(c) if c == self.principal => {
                    // Only nonces carry the session index; a fresh session
                    // key keeps its base name in the creator's role.
                    if a.kind == AtomKind::Nonce {
                        Term::Atom(a.clone().in_session(self.session))
                    } else {
                        m.clone()
                    }
                }
                Some(_) => self.fresh_var(m, Sort::of_kind(a.kind)),
                None => m.clone(),
            },
            Term::Var(_) => m.clone(),
            Term::Concat(ts) => Term::concat(
                ts.iter()
                    .map(|t| self.abstract_term(t, dir))
                    .collect::<Vec<_>>(),
            ),
            Term::Apply(f, ts) => Term::Apply(
                f.clone(),
                ts.iter().map(|t| self.abstract_term(t, dir)).collect(),
            ),
            Term::Enc(body, key) => {
                let usable = match dir {
                    Direction::Recv => self.can_open(key),
                    Direction::Send => self.can_build(key),
                };
                if usable {
                    let body = self.abstract_term(body, dir);
                    let key = self.abstract_term(key, dir);
                    Term::enc(body, key)
                } else {
                    self.fresh_var(m, Sort::Any)
                }
            }
        }
    }
}

/// Builds a role from a transcription, recovering counterparts, steps and
/// variable bindings by aligning it with the narration when possible.
pub fn from_override(spec: &ProtocolSpec, o: &RoleOverride) -> GeneralizedRole {
    let projected = project(spec, &o.principal);
    let aligned = projected.len() == o.events.len()
        && projected
            .iter()
            .zip(&o.events)
            .all(|(p, (d, _))| p.direction == *d);

    let mut sigma = Substitution::new();
    let mut matching = aligned;
    let mut events = Vec::with_capacity(o.events.len());
    for (idx, (dir, msg)) in o.events.iter().enumerate() {
        let p = aligned.then(|| &projected[idx]);
        if let (true, Some(p)) = (matching, p) {
            let pattern = sigma.apply(&msg.without_sessions());
            match unify(&pattern, &p.message) {
                Some(s) => sigma = compose(&sigma, &s),
                None => matching = false,
            }
        }
        events.push(RoleEvent {
            direction: *dir,
            counterpart: p.map(|p| p.counterpart.clone()),
            message: msg.clone(),
            step: p.map(|p| p.step),
        });
    }
    let session = o
        .session
        .clone()
        .or_else(|| first_session(o.events.iter().map(|(_, t)| t)))
        .unwrap_or_else(|| default_session(spec, &o.principal));
    GeneralizedRole {
        principal: o.principal.clone(),
        session,
        events,
        bindings: sigma.iter().map(|(v, t)| (v.clone(), t.clone())).collect(),
        overridden: true,
    }
}

fn compose(first: &Substitution, then: &Substitution) -> Substitution {
    let mut pairs: Vec<(Var, Term)> = first
        .iter()
        .map(|(v, t)| (v.clone(), then.apply(t)))
        .collect();
    pairs.extend(then.iter().map(|(v, t)| (v.clone(), t.clone())));
    Substitution::from_bindings(pairs).unwrap_or_default()
}

fn first_session<'a>(mut terms: impl Iterator<Item = &'a Term>) -> Option<String> {
    terms.find_map(|t| {
        let mut found = None;
        t.visit_leaves(&mut |leaf, _| {
            if let (None, Term::Atom(a)) = (&found, leaf) {
                found = a.session.clone();
            }
        });
        found
    })
}

/// Pairs every send with all receives that precede it. Trailing receives
/// produce no rule.
pub fn rules(role: &GeneralizedRole) -> Vec<Rule> {
    let mut received: Vec<Term> = Vec::new();
    let mut out = Vec::new();
    for e in &role.events {
        match e.direction {
            Direction::Recv => {
                if !received.contains(&e.message) {
                    received.push(e.message.clone());
                }
            }
            Direction::Send => out.push(Rule {
                principal: role.principal.clone(),
                session: role.session.clone(),
                index: out.len() + 1,
                received: received.clone(),
                sent: e.message.clone(),
                sent_step: e.step,
            }),
        }
    }
    out
}

/// Roles of every agent taking part in the narration, in declaration order.
pub fn all_roles(spec: &ProtocolSpec, use_overrides: bool) -> Vec<GeneralizedRole> {
    spec.participants()
        .iter()
        .map(|p| {
            if use_overrides {
                generalize(spec, p)
            } else {
                derive(spec, p)
            }
        })
        .collect()
}

/// Renders the role in the `A_G = i.1 A -> I(S) : ...` layout.
pub struct RoleDisplay<'a> {
    role: &'a GeneralizedRole,
    ascii: bool,
}

impl GeneralizedRole {
    pub fn display(&self, ascii: bool) -> RoleDisplay<'_> {
        RoleDisplay { role: self, ascii }
    }
}

impl fmt::Display for RoleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.role;
        let head = format!("{}_G = ", r.principal);
        let pad = " ".repeat(head.chars().count());
        let arrow = if self.ascii { "->" } else { "⟶" };
        for (i, e) in r.events.iter().enumerate() {
            let other = format!("{INTRUDER}({})", e.counterpart.as_deref().unwrap_or("?"));
            let (from, to) = match e.direction {
                Direction::Send => (r.principal.clone(), other),
                Direction::Recv => (other, r.principal.clone()),
            };
            writeln!(
                f,
                "{}{}.{} {from} {arrow} {to} : {}",
                if i == 0 { &head } else { &pad },
                r.session,
                i + 1,
                e.message
            )?;
        }
        if r.events.is_empty() {
            writeln!(f, "{head}(no events)")?;
        }
        Ok(())
    }
}
