//! The powerset security lattice over a finite agent universe.
//!
//! A level is the set of agents allowed to know a value. Fewer readers means
//! more secure: the full universe is ⊥ and the empty set is ⊤. `geq` is
//! inclusion, `meet` is union and `join` is intersection.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Name of the intruder, always part of every universe.
pub const INTRUDER: &str = "I";

const MAX_AGENTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("security levels are drawn from different agent universes")]
    UniverseMismatch,
    #[error("agent `{0}` is not part of the universe")]
    UnknownAgent(String),
    #[error("universe of {0} agents exceeds the supported maximum of {MAX_AGENTS}")]
    TooManyAgents(usize),
}

/// A sorted, deduplicated set of agent names shared by all levels built
/// from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe(Arc<Vec<String>>);

impl Universe {
    /// Builds a universe from `agents`; the intruder is always added.
    pub fn new<I, S>(agents: I) -> Result<Self, LatticeError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set: BTreeSet<String> = agents.into_iter().map(Into::into).collect();
        set.insert(INTRUDER.to_string());
        if set.len() > MAX_AGENTS {
            return Err(LatticeError::TooManyAgents(set.len()));
        }
        Ok(Universe(Arc::new(set.into_iter().collect())))
    }

    pub fn agents(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, agent: &str) -> bool {
        self.index(agent).is_some()
    }

    fn index(&self, agent: &str) -> Option<usize> {
        self.0.binary_search_by(|a| a.as_str().cmp(agent)).ok()
    }

    fn full_mask(&self) -> u64 {
        if self.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }

    /// ⊥: every agent, intruder included, may know the value.
    pub fn bottom(&self) -> SecurityLevel {
        SecurityLevel {
            universe: self.clone(),
            bits: self.full_mask(),
        }
    }

    /// ⊤: nobody may know the value.
    pub fn top(&self) -> SecurityLevel {
        SecurityLevel {
            universe: self.clone(),
            bits: 0,
        }
    }

    pub fn level<I, S>(&self, readers: I) -> Result<SecurityLevel, LatticeError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bits = 0u64;
        for r in readers {
            let r = r.as_ref();
            let i = self
                .index(r)
                .ok_or_else(|| LatticeError::UnknownAgent(r.to_string()))?;
            bits |= 1 << i;
        }
        Ok(SecurityLevel {
            universe: self.clone(),
            bits,
        })
    }

    fn same(&self, other: &Universe) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct SecurityLevel {
    universe: Universe,
    bits: u64,
}

impl SecurityLevel {
    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn readers(&self) -> Vec<&str> {
        self.universe
            .agents()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.bits & (1 << i) != 0)
            .map(|(_, a)| a.as_str())
            .collect()
    }

    pub fn contains(&self, agent: &str) -> bool {
        self.universe
            .index(agent)
            .is_some_and(|i| self.bits & (1 << i) != 0)
    }

    pub fn is_bottom(&self) -> bool {
        self.bits == self.universe.full_mask()
    }

    pub fn is_top(&self) -> bool {
        self.bits == 0
    }

    fn check(&self, other: &SecurityLevel) -> Result<(), LatticeError> {
        if self.universe.same(&other.universe) {
            Ok(())
        } else {
            Err(LatticeError::UniverseMismatch)
        }
    }

    /// `self ⊒ other`: at least as secure, i.e. `self.readers ⊆ other.readers`.
    pub fn geq(&self, other: &SecurityLevel) -> Result<bool, LatticeError> {
        self.check(other)?;
        Ok(self.bits & !other.bits == 0)
    }

    /// `self ⊓ other`: the less secure of the two, the union of readers.
    pub fn meet(&self, other: &SecurityLevel) -> Result<SecurityLevel, LatticeError> {
        self.check(other)?;
        Ok(SecurityLevel {
            universe: self.universe.clone(),
            bits: self.bits | other.bits,
        })
    }

    /// `self ⊔ other`: the intersection of readers.
    pub fn join(&self, other: &SecurityLevel) -> Result<SecurityLevel, LatticeError> {
        self.check(other)?;
        Ok(SecurityLevel {
            universe: self.universe.clone(),
            bits: self.bits & other.bits,
        })
    }

    /// Set-style rendering without the ⊥/⊤ aliases.
    pub fn to_set_string(&self) -> String {
        format!("{{{}}}", self.readers().join(","))
    }

    /// Renders with ⊥/⊤ glyphs, or `bottom`/`top` when `ascii` is set.
    pub fn render(&self, ascii: bool) -> String {
        match (self.is_bottom(), self.is_top(), ascii) {
            (true, _, false) => "⊥".into(),
            (true, _, true) => "bottom".into(),
            (_, true, false) => "⊤".into(),
            (_, true, true) => "top".into(),
            _ => self.to_set_string(),
        }
    }
}

impl fmt::Display for SecurityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

impl fmt::Debug for SecurityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SecurityLevel({})", self.to_set_string())
    }
}

/// Parses `{A,B}`, `bottom`, `top`, `⊥` or `⊤` against `universe`.
pub fn parse_level(text: &str, universe: &Universe) -> Result<SecurityLevel, LatticeError> {
    match text.trim() {
        "⊥" | "bottom" => Ok(universe.bottom()),
        "⊤" | "top" => Ok(universe.top()),
        other => {
            let inner = other
                .strip_prefix('{')
                .and_then(|s| s.strip_suffix('}'))
                .unwrap_or(other);
            universe.level(inner.split(',').map(str::trim).filter(|s| !s.is_empty()))
        }
    }
}
