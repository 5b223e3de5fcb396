//! Term generators over a small fixed alphabet.
#![allow(dead_code)]

use proptest::prelude::*;
use wfcheck_core::{AtomName, Sort, Term, Var};

pub const IDENTITIES: [&str; 2] = ["A", "B"];
pub const KEYS: [&str; 2] = ["k1", "k2"];
pub const NONCES: [&str; 1] = ["N"];

pub fn atoms() -> Vec<Term> {
    let mut out: Vec<Term> = IDENTITIES
        .iter()
        .map(|n| AtomName::identity(*n).into())
        .collect();
    out.extend(KEYS.iter().map(|n| Term::from(AtomName::key(*n))));
    out.extend(NONCES.iter().map(|n| Term::from(AtomName::nonce(*n))));
    out
}

pub fn key_atoms() -> Vec<Term> {
    KEYS.iter().map(|n| AtomName::key(*n).into()).collect()
}

/// Every term of construction depth at most `depth`: atoms, binary
/// concatenations and encryptions under `k1` or `k2`.
pub fn enumerate(depth: usize) -> Vec<Term> {
    let mut layers: Vec<Vec<Term>> = vec![atoms()];
    for _ in 1..depth {
        let below: Vec<Term> = layers.iter().flatten().cloned().collect();
        let prev = layers.last().unwrap().clone();
        let mut next = Vec::new();
        for a in &below {
            for b in &below {
                if prev.contains(a) || prev.contains(b) {
                    next.push(Term::concat([a.clone(), b.clone()]));
                }
            }
        }
        for a in &prev {
            for k in key_atoms() {
                next.push(Term::enc(a.clone(), k));
            }
        }
        layers.push(next);
    }
    layers.into_iter().flatten().collect()
}

pub fn ground_atom() -> impl Strategy<Value = Term> {
    proptest::sample::select(atoms())
}

pub fn key_atom() -> impl Strategy<Value = Term> {
    proptest::sample::select(key_atoms())
}

/// Ground terms; `pred` applications included.
pub fn ground_term(depth: u32) -> impl Strategy<Value = Term> {
    ground_atom().prop_recursive(depth, 24, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..=3).prop_map(Term::concat),
            (inner.clone(), key_atom()).prop_map(|(b, k)| Term::enc(b, k)),
            inner.prop_map(Term::pred),
        ]
    })
}

/// Concatenations are built without flattening, so results may violate
/// the canonical form.
pub fn raw_term(depth: u32) -> impl Strategy<Value = Term> {
    ground_atom().prop_recursive(depth, 24, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..=3).prop_map(Term::Concat),
            (inner.clone(), key_atom()).prop_map(|(b, k)| Term::enc(b, k)),
            inner.prop_map(Term::pred),
        ]
    })
}

pub fn vars() -> Vec<Var> {
    vec![
        Var::new("X", Sort::Nonce),
        Var::new("Y", Sort::Any),
        Var::new("Z", Sort::Identity),
        Var::new("K", Sort::Key),
        Var::new("W", Sort::Any),
    ]
}

fn sorted_leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        3 => ground_atom(),
        2 => proptest::sample::select(vars()).prop_map(Term::Var),
    ]
}

fn key_slot() -> impl Strategy<Value = Term> {
    prop_oneof![
        3 => key_atom(),
        1 => Just(Term::Var(Var::new("K", Sort::Key))),
    ]
}

/// Terms with sorted variables, at most `depth` levels deep.
pub fn sorted_term(depth: u32) -> impl Strategy<Value = Term> {
    sorted_leaf().prop_recursive(depth - 1, 24, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..=3).prop_map(Term::concat),
            (inner.clone(), key_slot()).prop_map(|(b, k)| Term::enc(b, k)),
            inner.prop_map(Term::pred),
        ]
    })
}

/// A value of the given sort, for building instances of a pattern.
pub fn value_of(sort: Sort) -> BoxedStrategy<Term> {
    match sort {
        Sort::Identity => proptest::sample::select(IDENTITIES.to_vec())
            .prop_map(|n| AtomName::identity(n).into())
            .boxed(),
        Sort::Nonce => Just(Term::from(AtomName::nonce("N"))).boxed(),
        Sort::Key => key_atom().boxed(),
        Sort::Any => ground_term(2).boxed(),
    }
}

/// Pairs of sorted terms, half of them a term and an instance of it with
/// some variables replaced, so that unifiable pairs are common.
pub fn term_pair(depth: u32) -> impl Strategy<Value = (Term, Term)> {
    let independent = (sorted_term(depth), sorted_term(depth));
    let instance = (
        sorted_term(depth),
        value_of(Sort::Nonce),
        value_of(Sort::Any),
        value_of(Sort::Identity),
        value_of(Sort::Key),
        value_of(Sort::Any),
        proptest::collection::vec(any::<bool>(), 5),
    )
        .prop_map(|(t, x, y, z, k, w, pick)| {
            let vals = [x, y, z, k, w];
            let names = ["X", "Y", "Z", "K", "W"];
            let inst = t.map_vars(&|v| match names.iter().position(|n| *n == v.name) {
                Some(i) if pick[i] => vals[i].clone(),
                _ => Term::Var(v.clone()),
            });
            (t, inst)
        });
    prop_oneof![independent, instance]
}
