use std::path::Path;
use std::process::Command;

use wfcheck::json::{level_from_json, JsonReport, JsonRole, JsonTagging};
use wfcheck::{run, Format};
use wfcheck_core::{analyze, parse, AnalysisOptions};

fn protocol(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../protocols")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn exit_codes_follow_the_verdict() {
    assert_eq!(run(["analyze", &protocol("ns_symmetric.wf")]).exit_code, 1);
    assert_eq!(
        run(["analyze", &protocol("tagged_exchange.wf")]).exit_code,
        0
    );
    assert_eq!(run(["analyze", &protocol("untagged.wf")]).exit_code, 2);
    assert_eq!(
        run(["analyze", "--no-tagcheck", &protocol("untagged.wf")]).exit_code,
        0
    );
    assert_eq!(run(["analyze", "missing.wf"]).exit_code, 3);
    assert_eq!(
        run(["analyze", "--bogus", &protocol("ns_symmetric.wf")]).exit_code,
        3
    );
    assert_eq!(run(["frobnicate"]).exit_code, 3);
    assert_eq!(run(["tagcheck", &protocol("untagged.wf")]).exit_code, 2);
    assert_eq!(run(["tagcheck", &protocol("ns_symmetric.wf")]).exit_code, 0);
}

#[test]
fn usage_text_accompanies_argument_errors() {
    let r = run(["analyze"]);
    assert_eq!(r.exit_code, 3);
    assert!(r.body.contains("Usage"), "{}", r.body);
    let help = run(["--help"]);
    assert_eq!(help.exit_code, 0);
    assert!(help.body.contains("analyze"));
}

#[test]
fn parse_errors_name_the_position() {
    let dir = std::env::temp_dir().join(format!("wfcheck-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("bad.wf");
    std::fs::write(&f, "protocol P;\nagents A, B;\nsteps { 1. A -> B : Nc }\n").unwrap();
    let r = run(["analyze".to_string(), f.to_string_lossy().into_owned()]);
    assert_eq!(r.exit_code, 3);
    assert!(r.body.contains("bad.wf:3:"), "{}", r.body);
    assert!(r.body.contains("`Nc`"), "{}", r.body);
}

#[test]
fn json_report_round_trips() {
    let r = run(["analyze", "--format", "json", &protocol("ns_symmetric.wf")]);
    assert_eq!(r.format, Format::Json);
    assert_eq!(r.exit_code, 1);
    let parsed: JsonReport = serde_json::from_str(&r.body).unwrap();
    assert_eq!(parsed.overall, "violation");
    assert_eq!(parsed.tagged, Some(true));
    let fv = parsed.first_violation.as_ref().unwrap();
    assert_eq!((fv.step.as_str(), fv.subject.as_str()), ("S_A^2", "Y"));
    assert!(parsed
        .hint
        .as_deref()
        .unwrap()
        .contains("not a proof of attack"));
    assert_eq!(wfcheck::json::to_string(&parsed), r.body);

    // every level and verdict survives the trip
    let spec = parse(&std::fs::read_to_string(protocol("ns_symmetric.wf")).unwrap()).unwrap();
    let report = analyze(&spec, AnalysisOptions::default()).unwrap();
    let u = spec.context.universe();
    let ours = report.rules.iter().flat_map(|r| &r.verdicts);
    let theirs = parsed
        .rules
        .iter()
        .flat_map(|r| r.subjects.iter().map(move |s| (r, s)));
    let mut n = 0;
    for (v, (rule, s)) in ours.zip(theirs) {
        assert_eq!(rule.label, v.step_label);
        assert_eq!(s.name, v.subject.to_string());
        assert_eq!(level_from_json(&s.level_sent, u).unwrap(), v.level_sent);
        assert_eq!(
            level_from_json(&s.level_received, u).unwrap(),
            v.level_received
        );
        assert_eq!(level_from_json(&s.rhs, u).unwrap(), v.rhs);
        assert_eq!(
            s.level_context
                .as_ref()
                .map(|l| level_from_json(l, u).unwrap()),
            v.level_context
        );
        assert_eq!(s.holds, v.holds);
        n += 1;
    }
    assert_eq!(
        n,
        report.rules.iter().map(|r| r.verdicts.len()).sum::<usize>()
    );
}

#[test]
fn text_and_json_agree() {
    let path = protocol("ns_symmetric.wf");
    let text = run(["analyze", "--diagnostic", &path]).body;
    let json: JsonReport =
        serde_json::from_str(&run(["analyze", "--diagnostic", "--format", "json", &path]).body)
            .unwrap();
    for rule in &json.rules {
        let verdict = if rule.holds {
            "respects"
        } else {
            "does not respect"
        };
        assert!(text.contains(&format!("{} {verdict} Theorem LTWF", rule.label)));
        for s in &rule.subjects {
            let shown = |l: &[String]| {
                let u = ["A", "B", "I", "S"];
                if l.len() == u.len() {
                    "⊥".to_string()
                } else if l.is_empty() {
                    "⊤".to_string()
                } else {
                    format!("{{{}}}", l.join(","))
                }
            };
            assert!(text.contains(&format!("F'({}, r⁺) = {}", s.name, shown(&s.level_sent))));
            assert!(text.contains(&format!(
                "F'({}, R⁻) = {}",
                s.name,
                shown(&s.level_received)
            )));
        }
    }
}

#[test]
fn output_is_deterministic() {
    let path = protocol("ns_symmetric.wf");
    for format in ["text", "json"] {
        let a = run(["analyze", "--format", format, &path]);
        let b = run(["analyze", "--format", format, &path]);
        assert_eq!(a, b);
    }
}

#[test]
fn derivation_layout_lines() {
    let body = run(["analyze", "--diagnostic", &protocol("ns_symmetric.wf")]).body;
    for line in [
        "On sending: r⁺=A.B.Na^i",
        "F'(Na^i, r⁺) = ⊥",
        "F'(Na^i, R⁻) = ⊤",
        "On receiving: R⁻={Na^i.X.B.Y}kas",
        "S_A^1 respects Theorem LTWF",
        "S_A^2 does not respect Theorem LTWF",
        "S_A^3 respects Theorem LTWF",
        "VIOLATION at S_A^2: variable Y: sent=⊥ received={A,B,S}",
    ] {
        assert!(body.contains(line), "missing `{line}`");
    }
    let certified = run(["analyze", &protocol("tagged_exchange.wf")]).body;
    assert!(certified.contains("CERTIFIED"));
}

#[test]
fn ascii_output_has_no_glyphs() {
    let body = run([
        "analyze",
        "--ascii",
        "--diagnostic",
        &protocol("ns_symmetric.wf"),
    ])
    .body;
    assert!(body.is_ascii(), "{body}");
    assert!(body.contains("VIOLATION at S_A^2: variable Y: sent=bottom received={A,B,S}"));
    assert!(body.contains("F'(Na^i, r+) = bottom"));
}

#[test]
fn derived_roles_give_the_same_verdicts() {
    let path = protocol("ns_symmetric.wf");
    let written: JsonReport =
        serde_json::from_str(&run(["analyze", "--format", "json", &path]).body).unwrap();
    let derived: JsonReport =
        serde_json::from_str(&run(["analyze", "--format", "json", "--derive-roles", &path]).body)
            .unwrap();
    type Shape = Vec<(String, Vec<(Vec<String>, bool)>)>;
    let shape = |r: &JsonReport| -> Shape {
        r.rules
            .iter()
            .map(|x| {
                (
                    x.label.clone(),
                    x.subjects
                        .iter()
                        .map(|s| (s.level_sent.clone(), s.holds))
                        .collect(),
                )
            })
            .collect()
    };
    assert_eq!(shape(&written), shape(&derived));
    assert_eq!(derived.first_violation.unwrap().subject, "V2");
}

#[test]
fn roles_and_tagcheck_json() {
    let roles: Vec<JsonRole> = serde_json::from_str(
        &run(["roles", "--format", "json", &protocol("ns_symmetric.wf")]).body,
    )
    .unwrap();
    assert_eq!(roles.len(), 3);
    assert_eq!(roles[1].events[1].message, "{Nb^j}T");
    let text = run(["roles", &protocol("ns_symmetric.wf")]).body;
    assert!(
        text.starts_with("A_G = i.1 A ⟶ I(S) : A.B.Na^i\n"),
        "{text}"
    );

    let t: JsonTagging =
        serde_json::from_str(&run(["tagcheck", "--format", "json", &protocol("untagged.wf")]).body)
            .unwrap();
    assert!(!t.tagged);
    let w = t.witness.unwrap();
    assert_eq!((w.first_step, w.second_step), (1, 2));
}

#[test]
fn eval_modes() {
    let ctx = ["--agents", "A,B", "--key", "kab=A,B", "--level", "N=A,B"];
    let go = |extra: &[&str]| {
        let mut argv: Vec<&str> = vec!["eval"];
        argv.extend(ctx);
        argv.extend(extra);
        run(argv)
    };
    assert_eq!(go(&["--atom", "N", "--term", "N"]).body, "⊥\n");
    assert_eq!(go(&["--atom", "N"]).body, "⊤\n");
    assert_eq!(
        go(&["--atom", "N", "--term", "{A.N}kab", "--ascii"]).body,
        "{A,B}\n"
    );
    assert_eq!(
        go(&["--atom", "N", "--term", "{N}kab", "--term", "N"]).body,
        "⊥\n"
    );
    assert_eq!(go(&["--atom", "X", "--term", "{X.A}kab"]).body, "{A,B}\n");
    let f = go(&["--fn", "f", "--atom", "N", "--term", "{X.N}kab"]);
    assert_eq!(f.exit_code, 3);
    assert!(f.body.contains("fprime"));
    assert_eq!(go(&["--atom", "kab", "--term", "kab"]).exit_code, 3);
    assert_eq!(go(&["--atom", "N", "--term", "{N"]).exit_code, 3);

    let from_file = run([
        "eval",
        "--context",
        &protocol("ns_symmetric.wf"),
        "--atom",
        "Y",
        "--term",
        "{Na^i.X.B.Y}kas",
    ]);
    assert_eq!(from_file.body, "{A,B,S}\n");
    let conflict = run([
        "eval",
        "--context",
        &protocol("ns_symmetric.wf"),
        "--agents",
        "A",
        "--atom",
        "Na",
    ]);
    assert_eq!(conflict.exit_code, 3);
}

#[test]
fn binary_prints_and_exits_like_run() {
    let out = Command::new(env!("CARGO_BIN_EXE_wfcheck"))
        .args(["analyze", &protocol("ns_symmetric.wf")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        run(["analyze", &protocol("ns_symmetric.wf")]).body
    );
    let missing = Command::new(env!("CARGO_BIN_EXE_wfcheck"))
        .args(["analyze", "nope.wf"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(3));
    assert!(missing.stdout.is_empty());
    assert!(!missing.stderr.is_empty());
}
