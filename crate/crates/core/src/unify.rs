//! Substitutions and sorted syntactic unification.

use std::collections::BTreeMap;
use std::fmt;

use crate::term::{Term, Var};

/// A finite, idempotent, sort-respecting map from variables to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a substitution from explicit bindings. Returns `None` if a
    /// binding violates the variable's sort.
    pub fn from_bindings<I: IntoIterator<Item = (Var, Term)>>(bindings: I) -> Option<Self> {
        let mut map = BTreeMap::new();
        for (v, t) in bindings {
            if !v.sort.accepts(&t) {
                return None;
            }
            map.insert(v, t);
        }
        Some(Substitution { map })
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn apply(&self, m: &Term) -> Term {
        if self.map.is_empty() {
            return m.clone();
        }
        m.map_vars(&|v| {
            self.map
                .get(v)
                .cloned()
                .unwrap_or_else(|| Term::Var(v.clone()))
        })
    }

    /// True when no bound variable occurs in any image.
    pub fn is_idempotent(&self) -> bool {
        self.map
            .values()
            .all(|t| self.map.keys().all(|v| !t.contains_var(v)))
    }

    pub fn is_sort_respecting(&self) -> bool {
        self.map.iter().all(|(v, t)| v.sort.accepts(t))
    }

    /// Adds `v ↦ t`, keeping the map idempotent. `t` must already be
    /// resolved against `self`.
    fn bind(&mut self, v: Var, t: Term) {
        let single = Substitution {
            map: BTreeMap::from([(v.clone(), t.clone())]),
        };
        for image in self.map.values_mut() {
            *image = single.apply(image);
        }
        self.map.insert(v, t);
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} ↦ {t}")?;
        }
        f.write_str("]")
    }
}

/// Applies `sigma` to `m`; the result is canonical.
pub fn substitute(m: &Term, sigma: &Substitution) -> Term {
    sigma.apply(m)
}

/// Most general sorted unifier of `t1` and `t2`, or `None`.
///
/// Concatenations unify position-wise with concatenations of the same
/// arity only. Callers rename variable namespaces apart beforehand.
pub fn unify(t1: &Term, t2: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    let mut pending = vec![(t1.clone(), t2.clone())];
    while let Some((a, b)) = pending.pop() {
        let a = sigma.apply(&a);
        let b = sigma.apply(&b);
        if a == b {
            continue;
        }
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                if x.sort.accepts(&Term::Var(y.clone())) {
                    sigma.bind(x, Term::Var(y));
                } else if y.sort.accepts(&Term::Var(x.clone())) {
                    sigma.bind(y, Term::Var(x));
                } else {
                    return None;
                }
            }
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if t.contains_var(&x) || !x.sort.accepts(&t) {
                    return None;
                }
                sigma.bind(x, t);
            }
            (Term::Atom(_), Term::Atom(_)) => return None,
            (Term::Concat(xs), Term::Concat(ys)) => {
                if xs.len() != ys.len() {
                    return None;
                }
                pending.extend(xs.into_iter().zip(ys));
            }
            (Term::Enc(b1, k1), Term::Enc(b2, k2)) => {
                pending.push((*k1, *k2));
                pending.push((*b1, *b2));
            }
            (Term::Apply(f, xs), Term::Apply(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                pending.extend(xs.into_iter().zip(ys));
            }
            _ => return None,
        }
    }
    Some(sigma)
}

/// Renames every variable of `m` by appending `suffix`.
pub fn rename_apart(m: &Term, suffix: &str) -> Term {
    m.map_vars(&|v| Term::Var(Var::new(format!("{}{}", v.name, suffix), v.sort)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{AtomName, Sort};

    fn v(n: &str, s: Sort) -> Var {
        Var::new(n, s)
    }

    #[test]
    fn substitute_examples() {
        let y = v("Y", Sort::Any);
        let ticket = Term::enc(
            Term::concat([AtomName::key("kab").into(), AtomName::identity("A").into()]),
            AtomName::key("kbs"),
        );
        let s = Substitution::from_bindings([(y.clone(), ticket.clone())]).unwrap();
        assert_eq!(substitute(&Term::Var(y), &s), ticket);

        let z = v("Z", Sort::Any);
        let x = v("X", Sort::Key);
        let s = Substitution::from_bindings([
            (z.clone(), AtomName::nonce("Nb").into()),
            (x.clone(), AtomName::key("kab").into()),
        ])
        .unwrap();
        assert_eq!(
            substitute(&Term::enc(Term::Var(z), x), &s),
            Term::enc(AtomName::nonce("Nb").into(), AtomName::key("kab"))
        );

        let abn = Term::concat([
            AtomName::identity("A").into(),
            AtomName::identity("B").into(),
            AtomName::nonce("Na").into(),
        ]);
        assert_eq!(substitute(&abn, &Substitution::new()), abn);
    }

    #[test]
    fn substitution_reflattens() {
        let y = v("Y", Sort::Any);
        let m = Term::concat([AtomName::identity("A").into(), Term::Var(y.clone())]);
        let s = Substitution::from_bindings([(
            y,
            Term::concat([
                AtomName::identity("B").into(),
                AtomName::identity("C").into(),
            ]),
        )])
        .unwrap();
        assert!(matches!(substitute(&m, &s), Term::Concat(ref xs) if xs.len() == 3));
    }

    #[test]
    fn from_bindings_checks_sorts() {
        assert!(
            Substitution::from_bindings([(v("N", Sort::Nonce), AtomName::key("k").into())])
                .is_none()
        );
    }

    #[test]
    fn unify_structural() {
        let z = v("Z", Sort::Any);
        let x = v("X", Sort::Key);
        let s = unify(
            &Term::enc(Term::Var(z.clone()), x.clone()),
            &Term::enc(AtomName::nonce("Nb").into(), AtomName::key("kab")),
        )
        .unwrap();
        assert_eq!(s.get(&z), Some(&AtomName::nonce("Nb").into()));
        assert_eq!(s.get(&x), Some(&AtomName::key("kab").into()));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn unify_constructor_clash() {
        let abn = Term::concat([
            AtomName::identity("A").into(),
            AtomName::identity("B").into(),
            AtomName::nonce("Na").into(),
        ]);
        let ticket = Term::enc(
            Term::concat([AtomName::key("kab").into(), AtomName::identity("A").into()]),
            AtomName::key("kbs"),
        );
        assert!(unify(&abn, &ticket).is_none());
    }

    #[test]
    fn nonce_variable_does_not_bind_pred() {
        let nb = v("Nb", Sort::Nonce);
        let nb2 = v("Nb'", Sort::Nonce);
        let kab = v("kab", Sort::Key);
        let kab2 = v("kab'", Sort::Key);
        let t1 = Term::enc(Term::Var(nb), kab);
        let t2 = Term::enc(Term::pred(Term::Var(nb2)), kab2);
        assert!(unify(&t1, &t2).is_none());
    }

    #[test]
    fn occurs_check() {
        let x = v("X", Sort::Any);
        let t = Term::concat([Term::Var(x.clone()), AtomName::identity("A").into()]);
        assert!(unify(&Term::Var(x), &t).is_none());
    }

    #[test]
    fn any_variable_binds_to_sorted_variable() {
        let y = v("Y", Sort::Any);
        let n = v("N", Sort::Nonce);
        let s = unify(&Term::Var(n.clone()), &Term::Var(y.clone())).unwrap();
        assert_eq!(s.get(&y), Some(&Term::Var(n.clone())));
        assert!(unify(&Term::Var(n), &Term::Var(v("K", Sort::Key))).is_none());
    }

    #[test]
    fn unifier_is_idempotent_across_chains() {
        let x = v("X", Sort::Any);
        let y = v("Y", Sort::Any);
        let a: Term = AtomName::identity("A").into();
        let t1 = Term::concat([Term::Var(x.clone()), Term::Var(y.clone())]);
        let t2 = Term::concat([Term::Var(y.clone()), a.clone()]);
        let s = unify(&t1, &t2).unwrap();
        assert!(s.is_idempotent());
        assert_eq!(s.apply(&t1), s.apply(&t2));
        assert_eq!(s.apply(&Term::Var(x)), a);
    }
}
