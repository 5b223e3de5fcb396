mod support;

use support::gen::enumerate;
use support::oracle::{oracle_f, OracleContext};
use wfcheck_core::context::{Context, KeySpec, LevelSpec};
use wfcheck_core::{reliable, witness, AtomName, Subject, Term};

struct Setup {
    agents: &'static [&'static str],
    keys: &'static [(&'static str, &'static [&'static str])],
    nonce_level: Option<&'static [&'static str]>,
}

const SETUPS: &[Setup] = &[
    Setup {
        agents: &["A", "B"],
        keys: &[("k1", &["A"]), ("k2", &["A", "B"])],
        nonce_level: Some(&["A", "B"]),
    },
    Setup {
        agents: &["A", "B"],
        keys: &[("k1", &["A", "B"]), ("k2", &["B"])],
        nonce_level: Some(&["A"]),
    },
    Setup {
        agents: &["A", "B", "S"],
        keys: &[("k1", &["A", "S"]), ("k2", &["A", "B", "S"])],
        nonce_level: Some(&["A", "B", "S", "I"]),
    },
    Setup {
        agents: &["A", "B"],
        keys: &[("k1", &["A"]), ("k2", &["B"])],
        nonce_level: None,
    },
];

fn build(s: &Setup) -> (Context, OracleContext) {
    let mut b = Context::builder().agents(s.agents.iter().copied());
    for (k, r) in s.keys {
        b = b.key(*k, KeySpec::shared(r.iter().copied()));
    }
    b = b.nonce(
        "N",
        s.nonce_level.map(|l| LevelSpec::agents(l.iter().copied())),
        None,
    );
    let ctx = b.build().unwrap();
    let mut levels: Vec<(&str, &[&str])> = s.keys.to_vec();
    if let Some(l) = s.nonce_level {
        levels.push(("N", l));
    }
    (ctx, OracleContext::new(s.agents, s.keys, &levels))
}

fn subjects() -> Vec<Term> {
    vec![
        AtomName::identity("A").into(),
        AtomName::identity("B").into(),
        AtomName::key("k1").into(),
        AtomName::key("k2").into(),
        AtomName::nonce("N").into(),
    ]
}

fn subject(t: &Term) -> Subject {
    match t {
        Term::Atom(a) => Subject::Atom(a.clone()),
        Term::Var(v) => Subject::Var(v.clone()),
        _ => unreachable!(),
    }
}

#[test]
fn recursive_f_matches_occurrence_oracle_exhaustively() {
    let terms = enumerate(3);
    assert!(terms.len() > 1000);
    let mut checked = 0;
    for setup in SETUPS {
        let (ctx, oracle) = build(setup);
        for t in &terms {
            for alpha in subjects() {
                let got = reliable(&subject(&alpha), std::slice::from_ref(t), &ctx).unwrap();
                let want = oracle_f(&alpha, std::slice::from_ref(t), &oracle);
                let got: Vec<&str> = got.readers();
                let want: Vec<&str> = want.iter().map(String::as_str).collect();
                assert_eq!(got, want, "F({alpha}, {t})");
                checked += 1;
            }
        }
    }
    assert_eq!(checked, terms.len() * 5 * SETUPS.len());
}

#[test]
fn derivative_equals_f_on_ground_terms() {
    let (ctx, _) = build(&SETUPS[0]);
    for t in enumerate(3) {
        for alpha in subjects() {
            let m = std::slice::from_ref(&t);
            assert_eq!(
                witness(&subject(&alpha), m, &ctx).unwrap(),
                reliable(&subject(&alpha), m, &ctx).unwrap()
            );
        }
    }
}
