//! Message algebra: atoms, sorted variables, concatenation, encryption and
//! opaque function application.

use std::collections::BTreeSet;
use std::fmt;

/// Opaque unary symbol used for `N - 1` style transformations.
pub const PRED: &str = "pred";

/// Internal symbol wrapping the inverse of a variable key.
pub const INV: &str = "inv";

/// Function symbols accepted in message text.
pub const OPAQUE_SYMBOLS: &[&str] = &[PRED];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKind {
    Identity,
    Nonce,
    Key,
    Constant,
}

impl AtomKind {
    pub fn is_fresh_capable(self) -> bool {
        matches!(self, AtomKind::Nonce | AtomKind::Key)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AtomKind::Identity => "identity",
            AtomKind::Nonce => "nonce",
            AtomKind::Key => "key",
            AtomKind::Constant => "constant",
        }
    }
}

/// A named atomic message, optionally carrying a session index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomName {
    pub kind: AtomKind,
    pub base: String,
    pub session: Option<String>,
}

impl AtomName {
    pub fn new(kind: AtomKind, base: impl Into<String>) -> Self {
        AtomName {
            kind,
            base: base.into(),
            session: None,
        }
    }

    pub fn identity(base: impl Into<String>) -> Self {
        Self::new(AtomKind::Identity, base)
    }

    pub fn nonce(base: impl Into<String>) -> Self {
        Self::new(AtomKind::Nonce, base)
    }

    pub fn key(base: impl Into<String>) -> Self {
        Self::new(AtomKind::Key, base)
    }

    pub fn constant(base: impl Into<String>) -> Self {
        Self::new(AtomKind::Constant, base)
    }

    /// Attaches a session index. Ignored for identities and constants,
    /// which are never fresh.
    pub fn in_session(mut self, session: impl Into<String>) -> Self {
        if self.kind.is_fresh_capable() {
            self.session = Some(session.into());
        }
        self
    }

    pub fn without_session(&self) -> Self {
        AtomName {
            session: None,
            ..self.clone()
        }
    }
}

impl fmt::Display for AtomName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.session {
            Some(s) => write!(f, "{}^{}", self.base, s),
            None => f.write_str(&self.base),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Identity,
    Nonce,
    Key,
    Any,
}

impl Sort {
    pub fn as_str(self) -> &'static str {
        match self {
            Sort::Identity => "id",
            Sort::Nonce => "nonce",
            Sort::Key => "key",
            Sort::Any => "any",
        }
    }

    pub fn parse(s: &str) -> Option<Sort> {
        match s {
            "id" | "identity" => Some(Sort::Identity),
            "nonce" => Some(Sort::Nonce),
            "key" => Some(Sort::Key),
            "any" => Some(Sort::Any),
            _ => None,
        }
    }

    /// The sort a variable standing for an atom of `kind` receives.
    pub fn of_kind(kind: AtomKind) -> Sort {
        match kind {
            AtomKind::Identity => Sort::Identity,
            AtomKind::Nonce => Sort::Nonce,
            AtomKind::Key => Sort::Key,
            AtomKind::Constant => Sort::Any,
        }
    }

    /// Whether a variable of this sort may be bound to `term`.
    pub fn accepts(self, term: &Term) -> bool {
        match (self, term) {
            (Sort::Any, _) => true,
            (s, Term::Atom(a)) => Sort::of_kind(a.kind) == s && a.kind != AtomKind::Constant,
            (s, Term::Var(v)) => v.sort == s,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: Sort) -> Self {
        Var {
            name: name.into(),
            sort,
        }
    }

    pub fn any(name: impl Into<String>) -> Self {
        Self::new(name, Sort::Any)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Atom(AtomName),
    Var(Var),
    /// Always holds at least two elements, none of which is a `Concat`.
    Concat(Vec<Term>),
    Enc(Box<Term>, Box<Term>),
    Apply(String, Vec<Term>),
}

impl From<AtomName> for Term {
    fn from(a: AtomName) -> Self {
        Term::Atom(a)
    }
}

impl From<Var> for Term {
    fn from(v: Var) -> Self {
        Term::Var(v)
    }
}

impl Term {
    /// Builds a flattened concatenation. A single part is returned as is.
    ///
    /// Panics on an empty iterator.
    pub fn concat<I: IntoIterator<Item = Term>>(parts: I) -> Term {
        Self::try_concat(parts).expect("concatenation of zero terms")
    }

    pub fn try_concat<I: IntoIterator<Item = Term>>(parts: I) -> Option<Term> {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Term::Concat(children) => flat.extend(children),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => None,
            1 => flat.pop(),
            _ => Some(Term::Concat(flat)),
        }
    }

    pub fn enc(body: Term, key: impl Into<Term>) -> Term {
        Term::Enc(Box::new(body), Box::new(key.into()))
    }

    pub fn apply(symbol: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Apply(symbol.into(), args)
    }

    pub fn pred(arg: Term) -> Term {
        Term::Apply(PRED.to_string(), vec![arg])
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Atom(_) => true,
            Term::Var(_) => false,
            Term::Concat(ts) | Term::Apply(_, ts) => ts.iter().all(Term::is_ground),
            Term::Enc(b, k) => b.is_ground() && k.is_ground(),
        }
    }

    /// Re-establishes the flattening invariant bottom-up.
    pub fn canonical(&self) -> Term {
        match self {
            Term::Atom(_) | Term::Var(_) => self.clone(),
            Term::Concat(ts) => Term::concat(ts.iter().map(Term::canonical)),
            Term::Enc(b, k) => Term::enc(b.canonical(), k.canonical()),
            Term::Apply(f, ts) => Term::Apply(f.clone(), ts.iter().map(Term::canonical).collect()),
        }
    }

    pub fn is_canonical(&self) -> bool {
        match self {
            Term::Atom(_) | Term::Var(_) => true,
            Term::Concat(ts) => {
                ts.len() >= 2
                    && ts
                        .iter()
                        .all(|t| !matches!(t, Term::Concat(_)) && t.is_canonical())
            }
            Term::Enc(b, k) => b.is_canonical() && k.is_canonical(),
            Term::Apply(_, ts) => ts.iter().all(Term::is_canonical),
        }
    }

    /// Nesting depth; atoms and variables have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Atom(_) | Term::Var(_) => 1,
            Term::Concat(ts) | Term::Apply(_, ts) => {
                1 + ts.iter().map(Term::depth).max().unwrap_or(0)
            }
            Term::Enc(b, k) => 1 + b.depth().max(k.depth()),
        }
    }

    pub fn contains_var(&self, var: &Var) -> bool {
        match self {
            Term::Atom(_) => false,
            Term::Var(v) => v == var,
            Term::Concat(ts) | Term::Apply(_, ts) => ts.iter().any(|t| t.contains_var(var)),
            Term::Enc(b, k) => b.contains_var(var) || k.contains_var(var),
        }
    }

    /// Replaces every session-indexed atom by its session-free form.
    pub fn without_sessions(&self) -> Term {
        self.map_atoms(&|a| Term::Atom(a.without_session()))
    }

    pub fn map_atoms(&self, f: &dyn Fn(&AtomName) -> Term) -> Term {
        match self {
            Term::Atom(a) => f(a),
            Term::Var(_) => self.clone(),
            Term::Concat(ts) => Term::concat(ts.iter().map(|t| t.map_atoms(f))),
            Term::Enc(b, k) => Term::enc(b.map_atoms(f), k.map_atoms(f)),
            Term::Apply(s, ts) => {
                Term::Apply(s.clone(), ts.iter().map(|t| t.map_atoms(f)).collect())
            }
        }
    }

    pub fn map_vars(&self, f: &dyn Fn(&Var) -> Term) -> Term {
        match self {
            Term::Atom(_) => self.clone(),
            Term::Var(v) => f(v),
            Term::Concat(ts) => Term::concat(ts.iter().map(|t| t.map_vars(f))),
            Term::Enc(b, k) => Term::enc(b.map_vars(f), k.map_vars(f)),
            Term::Apply(s, ts) => {
                Term::Apply(s.clone(), ts.iter().map(|t| t.map_vars(f)).collect())
            }
        }
    }

    /// Visits every atom and variable occurrence together with a flag telling
    /// whether it sits in the key slot of an encryption.
    pub fn visit_leaves<F: FnMut(&Term, bool)>(&self, f: &mut F) {
        self.visit_leaves_inner(false, f)
    }

    fn visit_leaves_inner<F: FnMut(&Term, bool)>(&self, key_position: bool, f: &mut F) {
        match self {
            Term::Atom(_) | Term::Var(_) => f(self, key_position),
            Term::Concat(ts) | Term::Apply(_, ts) => {
                for t in ts {
                    t.visit_leaves_inner(key_position, f);
                }
            }
            Term::Enc(b, k) => {
                b.visit_leaves_inner(key_position, f);
                k.visit_leaves_inner(true, f);
            }
        }
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit_leaves(&mut |t, _| {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        });
        out
    }

    /// Atoms and variables outside key positions, in order of first
    /// occurrence (left to right, depth first).
    pub fn subjects_in_order(&self) -> Vec<Subject> {
        let mut out: Vec<Subject> = Vec::new();
        self.visit_leaves(&mut |t, in_key| {
            if in_key {
                return;
            }
            let s = match t {
                Term::Atom(a) => Subject::Atom(a.clone()),
                Term::Var(v) => Subject::Var(v.clone()),
                _ => return,
            };
            if !out.contains(&s) {
                out.push(s);
            }
        });
        out
    }

    /// Text form with sort annotations on every non-`any` variable, so that
    /// it parses back to exactly the same term.
    pub fn annotated(&self) -> Annotated<'_> {
        Annotated(self)
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, annotate: bool) -> fmt::Result {
        match self {
            Term::Atom(a) => write!(f, "{a}"),
            Term::Var(v) => {
                f.write_str(&v.name)?;
                if annotate && v.sort != Sort::Any {
                    write!(f, ":{}", v.sort.as_str())?;
                }
                Ok(())
            }
            Term::Concat(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(".")?;
                    }
                    t.write(f, annotate)?;
                }
                Ok(())
            }
            Term::Enc(b, k) => {
                f.write_str("{")?;
                b.write(f, annotate)?;
                f.write_str("}")?;
                k.write(f, annotate)
            }
            Term::Apply(s, ts) => {
                write!(f, "{s}(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    t.write(f, annotate)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, false)
    }
}

pub struct Annotated<'a>(&'a Term);

impl fmt::Display for Annotated<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.write(f, true)
    }
}

/// The thing whose security level is being evaluated: an atom or a variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Atom(AtomName),
    Var(Var),
}

impl Subject {
    pub fn as_term(&self) -> Term {
        match self {
            Subject::Atom(a) => Term::Atom(a.clone()),
            Subject::Var(v) => Term::Var(v.clone()),
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Subject::Var(_))
    }

    pub fn kind_str(&self) -> &'static str {
        match self {
            Subject::Atom(a) => a.kind.as_str(),
            Subject::Var(_) => "variable",
        }
    }

    /// Whether this subject occurs in `m` outside key positions.
    pub fn occurs_in(&self, m: &Term) -> bool {
        let mut found = false;
        m.visit_leaves(&mut |t, in_key| {
            if in_key || found {
                return;
            }
            found = match (self, t) {
                (Subject::Atom(a), Term::Atom(b)) => a == b,
                (Subject::Var(v), Term::Var(w)) => v == w,
                _ => false,
            };
        });
        found
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Atom(a) => write!(f, "{a}"),
            Subject::Var(v) => write!(f, "{v}"),
        }
    }
}

/// The set of atoms of `m`. Atoms occurring only as encryption keys are left
/// out unless `include_key_positions` is set.
pub fn atoms(m: &Term, include_key_positions: bool) -> BTreeSet<AtomName> {
    let mut out = BTreeSet::new();
    m.visit_leaves(&mut |t, in_key| {
        if let Term::Atom(a) = t {
            if include_key_positions || !in_key {
                out.insert(a.clone());
            }
        }
    });
    out
}

/// Identity atoms anywhere in `m`, including under nested encryptions.
pub fn identities(m: &Term) -> BTreeSet<AtomName> {
    atoms(m, true)
        .into_iter()
        .filter(|a| a.kind == AtomKind::Identity)
        .collect()
}

/// Deletes every variable except `keep`. Encryptions under a deleted variable
/// key lose their wrapper; an encryption whose body vanishes vanishes too.
pub fn strip_variables(m: &Term, keep: Option<&Var>) -> Option<Term> {
    match m {
        Term::Atom(_) => Some(m.clone()),
        Term::Var(v) => (Some(v) == keep).then(|| m.clone()),
        Term::Concat(ts) => Term::try_concat(ts.iter().filter_map(|t| strip_variables(t, keep))),
        Term::Enc(body, key) => {
            let body = strip_variables(body, keep)?;
            match key.as_ref() {
                Term::Var(v) if Some(v) != keep => Some(body),
                _ => Some(Term::Enc(Box::new(body), key.clone())),
            }
        }
        Term::Apply(s, ts) => {
            let args: Vec<Term> = ts.iter().filter_map(|t| strip_variables(t, keep)).collect();
            (!args.is_empty()).then(|| Term::Apply(s.clone(), args))
        }
    }
}
