//! The verification context: agent universe, the partial level map ⌈·⌉,
//! key readers and inverses, and freshness declarations.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::lattice::{LatticeError, SecurityLevel, Universe, INTRUDER};
use crate::term::{AtomKind, AtomName, Term, INV};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContextError {
    #[error("key `{0}` is not declared in the context")]
    UnknownKey(String),
    #[error("`{0}` cannot be used as an encryption key")]
    NotAKey(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A level as written by the user, before resolution against the universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LevelSpec {
    Bottom,
    Top,
    Agents(Vec<String>),
}

impl LevelSpec {
    pub fn agents<I, S>(agents: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        LevelSpec::Agents(agents.into_iter().map(Into::into).collect())
    }
}

impl fmt::Display for LevelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelSpec::Bottom => f.write_str("bottom"),
            LevelSpec::Top => f.write_str("top"),
            LevelSpec::Agents(a) => write!(f, "{{{}}}", a.join(",")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Freshness {
    pub creator: String,
    pub step: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySpec {
    pub readers: LevelSpec,
    /// ⌈k⌉; defaults to the readers.
    pub level: Option<LevelSpec>,
    /// Inverse key name; `None` means the key is symmetric.
    pub inverse: Option<String>,
    pub fresh: Option<Freshness>,
}

impl KeySpec {
    pub fn shared<I, S>(readers: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        KeySpec {
            readers: LevelSpec::agents(readers),
            level: None,
            inverse: None,
            fresh: None,
        }
    }

    pub fn with_inverse(mut self, inverse: impl Into<String>) -> Self {
        self.inverse = Some(inverse.into());
        self
    }

    pub fn fresh_by(mut self, creator: impl Into<String>, step: u32) -> Self {
        self.fresh = Some(Freshness {
            creator: creator.into(),
            step,
        });
        self
    }
}

/// A violated context invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    UnknownAgent {
        atom: String,
        agent: String,
    },
    UnknownInverse {
        key: String,
        inverse: String,
    },
    NonInvolutiveInverse {
        key: String,
        inverse: String,
        back: String,
    },
    IntruderHoldsKey {
        key: String,
    },
    FreshStepOutOfRange {
        atom: String,
        step: u32,
        steps: u32,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnknownAgent { atom, agent } => {
                write!(f, "`{atom}` mentions unknown agent `{agent}`")
            }
            Diagnostic::UnknownInverse { key, inverse } => {
                write!(f, "key `{key}` names undeclared inverse `{inverse}`")
            }
            Diagnostic::NonInvolutiveInverse { key, inverse, back } => write!(
                f,
                "key inverses are not an involution: {key} -> {inverse} -> {back}"
            ),
            Diagnostic::IntruderHoldsKey { key } => {
                write!(f, "intruder is a reader of long-term key `{key}`")
            }
            Diagnostic::FreshStepOutOfRange { atom, step, steps } => write!(
                f,
                "`{atom}` is created at step {step} but the protocol has {steps} steps"
            ),
        }
    }
}

/// Readers of a key's inverse, or `Unknown` for variable keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InverseReaders {
    Known(SecurityLevel),
    Unknown,
}

#[derive(Debug, Clone)]
struct KeyEntry {
    readers: SecurityLevel,
    inverse: String,
    public: bool,
}

#[derive(Debug, Clone)]
pub struct Context {
    universe: Universe,
    agents: Vec<String>,
    kinds: BTreeMap<String, AtomKind>,
    levels: BTreeMap<String, SecurityLevel>,
    keys: BTreeMap<String, KeyEntry>,
    fresh: BTreeMap<String, Freshness>,
    step_count: Option<u32>,
    build_diagnostics: Vec<Diagnostic>,
}

impl Context {
    pub fn builder() -> ContextBuilder {
        ContextBuilder::default()
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// Declared agents in declaration order; the intruder is not listed.
    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn is_agent(&self, name: &str) -> bool {
        self.agents.iter().any(|a| a == name)
    }

    pub fn kind_of(&self, name: &str) -> Option<AtomKind> {
        self.kinds.get(name).copied()
    }

    pub fn freshness(&self, base: &str) -> Option<&Freshness> {
        self.fresh.get(base)
    }

    pub fn step_count(&self) -> Option<u32> {
        self.step_count
    }

    /// ⌈a⌉, looked up by base name so that session indices are ignored.
    pub fn level_of(&self, a: &AtomName) -> Option<SecurityLevel> {
        self.levels.get(&a.base).cloned()
    }

    /// Readers of the key itself (who can encrypt with it).
    pub fn key_readers(&self, base: &str) -> Option<&SecurityLevel> {
        self.keys.get(base).map(|k| &k.readers)
    }

    pub fn inverse_name(&self, base: &str) -> Option<&str> {
        self.keys.get(base).map(|k| k.inverse.as_str())
    }

    /// k⁻¹. Symmetric keys are their own inverse; the inverse of a variable
    /// key `X` is the opaque term `inv(X)`, and `inv(X)⁻¹ = X`.
    pub fn inverse_key(&self, k: &Term) -> Result<Term, ContextError> {
        match k {
            Term::Atom(a) if a.kind == AtomKind::Key => {
                let entry = self
                    .keys
                    .get(&a.base)
                    .ok_or_else(|| ContextError::UnknownKey(a.base.clone()))?;
                Ok(Term::Atom(AtomName {
                    kind: AtomKind::Key,
                    base: entry.inverse.clone(),
                    session: a.session.clone(),
                }))
            }
            Term::Var(_) => Ok(Term::Apply(INV.to_string(), vec![k.clone()])),
            Term::Apply(f, args) if f == INV && args.len() == 1 => Ok(args[0].clone()),
            other => Err(ContextError::NotAKey(other.to_string())),
        }
    }

    /// ⌈k⁻¹⌉ for a key atom; `Unknown` for a variable key.
    pub fn readers_of_inverse(&self, k: &Term) -> Result<InverseReaders, ContextError> {
        match k {
            Term::Var(_) => Ok(InverseReaders::Unknown),
            Term::Apply(f, _) if f == INV => Ok(InverseReaders::Unknown),
            Term::Atom(a) if a.kind == AtomKind::Key => {
                let inv = self
                    .keys
                    .get(&a.base)
                    .ok_or_else(|| ContextError::UnknownKey(a.base.clone()))?
                    .inverse
                    .clone();
                let entry = self.keys.get(&inv).ok_or(ContextError::UnknownKey(inv))?;
                Ok(InverseReaders::Known(entry.readers.clone()))
            }
            other => Err(ContextError::NotAKey(other.to_string())),
        }
    }

    /// All violated invariants; empty for a well-formed context.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = self.build_diagnostics.clone();
        for (name, entry) in &self.keys {
            match self.keys.get(&entry.inverse) {
                None => out.push(Diagnostic::UnknownInverse {
                    key: name.clone(),
                    inverse: entry.inverse.clone(),
                }),
                Some(back) if back.inverse != *name => out.push(Diagnostic::NonInvolutiveInverse {
                    key: name.clone(),
                    inverse: entry.inverse.clone(),
                    back: back.inverse.clone(),
                }),
                Some(_) => {}
            }
            if !entry.public && !self.fresh.contains_key(name) && entry.readers.contains(INTRUDER) {
                out.push(Diagnostic::IntruderHoldsKey { key: name.clone() });
            }
        }
        if let Some(steps) = self.step_count {
            for (atom, f) in &self.fresh {
                if f.step == 0 || f.step > steps {
                    out.push(Diagnostic::FreshStepOutOfRange {
                        atom: atom.clone(),
                        step: f.step,
                        steps,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Entry {
    Key(KeySpec),
    Atom {
        kind: AtomKind,
        level: Option<LevelSpec>,
        fresh: Option<Freshness>,
    },
}

/// Collects declarations; `build` resolves levels against the universe.
#[derive(Debug, Clone, Default)]
pub struct ContextBuilder {
    agents: Vec<String>,
    entries: Vec<(String, Entry)>,
    step_count: Option<u32>,
}

impl ContextBuilder {
    pub fn agent(mut self, name: impl Into<String>) -> Self {
        let name = name.into();
        if name != INTRUDER && !self.agents.contains(&name) {
            self.agents.push(name);
        }
        self
    }

    pub fn agents<I, S>(self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        names.into_iter().fold(self, |b, n| b.agent(n))
    }

    pub fn key(mut self, name: impl Into<String>, spec: KeySpec) -> Self {
        self.entries.push((name.into(), Entry::Key(spec)));
        self
    }

    pub fn nonce(
        mut self,
        name: impl Into<String>,
        level: Option<LevelSpec>,
        fresh: Option<Freshness>,
    ) -> Self {
        self.entries.push((
            name.into(),
            Entry::Atom {
                kind: AtomKind::Nonce,
                level,
                fresh,
            },
        ));
        self
    }

    /// Constants are public unless a level is given.
    pub fn constant(mut self, name: impl Into<String>, level: Option<LevelSpec>) -> Self {
        self.entries.push((
            name.into(),
            Entry::Atom {
                kind: AtomKind::Constant,
                level: Some(level.unwrap_or(LevelSpec::Bottom)),
                fresh: None,
            },
        ));
        self
    }

    pub fn step_count(mut self, steps: u32) -> Self {
        self.step_count = Some(steps);
        self
    }

    pub fn build(self) -> Result<Context, LatticeError> {
        let universe = Universe::new(self.agents.iter().cloned())?;
        let mut diags = Vec::new();
        let mut resolve = |owner: &str, spec: &LevelSpec| -> SecurityLevel {
            match spec {
                LevelSpec::Bottom => universe.bottom(),
                LevelSpec::Top => universe.top(),
                LevelSpec::Agents(names) => {
                    let known: Vec<&String> = names
                        .iter()
                        .filter(|n| {
                            let ok = universe.contains(n);
                            if !ok {
                                diags.push(Diagnostic::UnknownAgent {
                                    atom: owner.to_string(),
                                    agent: n.to_string(),
                                });
                            }
                            ok
                        })
                        .collect();
                    universe.level(known).expect("filtered to known agents")
                }
            }
        };

        let mut kinds = BTreeMap::new();
        let mut levels = BTreeMap::new();
        let mut keys = BTreeMap::new();
        let mut fresh = BTreeMap::new();
        for a in &self.agents {
            kinds.insert(a.clone(), AtomKind::Identity);
            levels.insert(a.clone(), universe.bottom());
        }
        for (name, entry) in &self.entries {
            match entry {
                Entry::Key(spec) => {
                    let readers = resolve(name, &spec.readers);
                    let level = match &spec.level {
                        Some(l) => resolve(name, l),
                        None => readers.clone(),
                    };
                    kinds.insert(name.clone(), AtomKind::Key);
                    levels.insert(name.clone(), level);
                    keys.insert(
                        name.clone(),
                        KeyEntry {
                            public: spec.readers == LevelSpec::Bottom,
                            readers,
                            inverse: spec.inverse.clone().unwrap_or_else(|| name.clone()),
                        },
                    );
                    if let Some(f) = &spec.fresh {
                        fresh.insert(name.clone(), f.clone());
                    }
                }
                Entry::Atom {
                    kind,
                    level,
                    fresh: fr,
                } => {
                    kinds.insert(name.clone(), *kind);
                    if let Some(l) = level {
                        levels.insert(name.clone(), resolve(name, l));
                    }
                    if let Some(f) = fr {
                        fresh.insert(name.clone(), f.clone());
                    }
                }
            }
        }
        for (atom, f) in &fresh {
            if !universe.contains(&f.creator) || f.creator == INTRUDER {
                diags.push(Diagnostic::UnknownAgent {
                    atom: atom.clone(),
                    agent: f.creator.clone(),
                });
            }
        }
        Ok(Context {
            universe,
            agents: self.agents,
            kinds,
            levels,
            keys,
            fresh,
            step_count: self.step_count,
            build_diagnostics: diags,
        })
    }
}
