use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use wfcheck_bench::NS_SYMMETRIC;
use wfcheck_core::{analyze, parse, parse_term, unify, witness, AnalysisOptions, Subject, Term};

fn parsing(c: &mut Criterion) {
    c.bench_function("parse ns_symmetric", |b| {
        b.iter(|| parse(black_box(NS_SYMMETRIC)).unwrap())
    });
}

fn full_analysis(c: &mut Criterion) {
    let spec = parse(NS_SYMMETRIC).unwrap();
    c.bench_function("analyze ns_symmetric", |b| {
        b.iter(|| analyze(black_box(&spec), AnalysisOptions::default()).unwrap())
    });
    let opts = AnalysisOptions {
        check_tagging: false,
        use_overrides: false,
        ..Default::default()
    };
    c.bench_function("analyze ns_symmetric, derived roles", |b| {
        b.iter(|| analyze(black_box(&spec), opts).unwrap())
    });
}

fn derivative(c: &mut Criterion) {
    let spec = parse(NS_SYMMETRIC).unwrap();
    let ctx = &spec.context;
    let m = parse_term("{Na^i.X.B.Y}kas", &|n| ctx.kind_of(n), true).unwrap();
    let Term::Concat(parts) = (match &m {
        Term::Enc(body, _) => body.as_ref().clone(),
        _ => unreachable!(),
    }) else {
        unreachable!()
    };
    let Term::Var(y) = &parts[3] else {
        unreachable!()
    };
    let y = Subject::Var(y.clone());
    c.bench_function("F' of Y in the server reply", |b| {
        b.iter(|| witness(black_box(&y), std::slice::from_ref(&m), ctx).unwrap())
    });
}

fn unification(c: &mut Criterion) {
    let kinds = |n: &str| match n {
        "A" | "B" => Some(wfcheck_core::AtomKind::Identity),
        "kas" | "kab" => Some(wfcheck_core::AtomKind::Key),
        "Na" => Some(wfcheck_core::AtomKind::Nonce),
        _ => None,
    };
    let left = parse_term("{Na.K:key.B.{K:key.A}kab}kas", &kinds, true).unwrap();
    let right = parse_term("{N:nonce.kab.W.{kab.V}kab}kas", &kinds, true).unwrap();
    c.bench_function("unify nested encryptions", |b| {
        b.iter(|| unify(black_box(&left), black_box(&right)).unwrap())
    });
}

criterion_group!(benches, parsing, full_analysis, derivative, unification);
criterion_main!(benches);
