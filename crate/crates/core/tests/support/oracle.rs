//! Occurrence-based reference evaluator for F, kept independent of the
//! library's lattice and context types: levels are plain sets of names.
//!
//! Each occurrence of the subject outside key slots is scored on its own.
//! Walking from the root towards it, the first encryption whose key's
//! inverse is known to no one outside ⌈α⌉ decides the score, namely the
//! readers of that inverse plus every identity anywhere in its body. An
//! occurrence with no such encryption scores everyone. The result is the
//! union of the scores, or the empty set when there is no occurrence.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use wfcheck_core::{AtomKind, Term};

pub type Names = BTreeSet<String>;

pub struct OracleContext {
    /// Every agent, the intruder included.
    pub everyone: Names,
    /// Readers of each key's inverse. Keys missing here protect nothing.
    pub inverse_readers: BTreeMap<String, Names>,
    /// Declared levels by base name; absent means undefined.
    pub levels: BTreeMap<String, Names>,
}

pub fn names<const N: usize>(xs: [&str; N]) -> Names {
    xs.iter().map(|s| s.to_string()).collect()
}

impl OracleContext {
    /// Symmetric keys shared by the listed agents.
    pub fn new(agents: &[&str], keys: &[(&str, &[&str])], levels: &[(&str, &[&str])]) -> Self {
        let mut everyone: Names = agents.iter().map(|s| s.to_string()).collect();
        everyone.insert("I".to_string());
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Names>();
        OracleContext {
            everyone,
            inverse_readers: keys.iter().map(|(k, r)| (k.to_string(), set(r))).collect(),
            levels: levels
                .iter()
                .map(|(n, l)| (n.to_string(), set(l)))
                .collect(),
        }
    }

    fn threshold(&self, alpha: &Term) -> Names {
        match alpha {
            // a variable's level is taken as everyone
            Term::Var(_) => self.everyone.clone(),
            Term::Atom(a) => match a.kind {
                AtomKind::Identity => self.everyone.clone(),
                _ => self.levels.get(&a.base).cloned().unwrap_or_default(),
            },
            _ => panic!("subject must be an atom or a variable"),
        }
    }
}

fn all_identities(t: &Term, out: &mut Names) {
    match t {
        Term::Atom(a) if a.kind == AtomKind::Identity => {
            out.insert(a.base.clone());
        }
        Term::Atom(_) | Term::Var(_) => {}
        Term::Concat(ts) | Term::Apply(_, ts) => ts.iter().for_each(|x| all_identities(x, out)),
        Term::Enc(b, k) => {
            all_identities(b, out);
            all_identities(k, out);
        }
    }
}

/// Enclosing encryptions, outermost first, of each occurrence of `alpha`.
fn occurrences<'a>(
    alpha: &Term,
    t: &'a Term,
    path: &mut Vec<&'a Term>,
    out: &mut Vec<Vec<&'a Term>>,
) {
    match t {
        Term::Atom(_) | Term::Var(_) => {
            if t == alpha {
                out.push(path.clone());
            }
        }
        Term::Concat(ts) | Term::Apply(_, ts) => {
            ts.iter().for_each(|x| occurrences(alpha, x, path, out))
        }
        Term::Enc(b, _) => {
            path.push(t);
            occurrences(alpha, b, path, out);
            path.pop();
        }
    }
}

pub fn oracle_f(alpha: &Term, msgs: &[Term], ctx: &OracleContext) -> Names {
    let threshold = ctx.threshold(alpha);
    let mut result = Names::new();
    for m in msgs {
        let mut occ = Vec::new();
        occurrences(alpha, m, &mut Vec::new(), &mut occ);
        for path in occ {
            let decisive = path.iter().find_map(|enc| {
                let Term::Enc(body, key) = enc else {
                    unreachable!()
                };
                let Term::Atom(k) = key.as_ref() else {
                    return None;
                };
                let readers = ctx.inverse_readers.get(&k.base)?;
                readers.is_subset(&threshold).then(|| {
                    let mut s = readers.clone();
                    all_identities(body, &mut s);
                    s
                })
            });
            result.extend(decisive.unwrap_or_else(|| ctx.everyone.clone()));
        }
    }
    result
}
