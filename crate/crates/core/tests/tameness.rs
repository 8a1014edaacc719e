use tamelab::analysis::Regime;
use tamelab::source::SourceModel;
use tamelab::tameness::{classify, error_regime, ClassifyBudget, Grade, Verdict};

fn report(name: &str) -> tamelab::tameness::TamenessReport {
    classify(&SourceModel::builtin(name).unwrap(), &ClassifyBudget::default())
}

#[test]
fn verdicts_and_regimes() {
    let cases = [
        ("uniform-binary", Verdict::Periodic, Regime::Periodic),
        ("dyadic", Verdict::Periodic, Regime::Periodic),
        ("ternary-shift", Verdict::Periodic, Regime::Periodic),
        ("thirds", Verdict::HTameCandidate, Regime::HTame),
        ("biased-binary", Verdict::HTameCandidate, Regime::HTame),
        ("gauss", Verdict::STameCandidate, Regime::STame),
    ];
    for (name, verdict, regime) in cases {
        let r = report(name);
        assert_eq!(r.verdict, verdict, "{name}");
        assert_eq!(error_regime(&r), regime, "{name}");
        assert!(!r.evidence.is_empty());
    }
}

#[test]
fn evidence_grades() {
    let r = report("dyadic");
    assert_eq!(r.grade, Grade::Exact);
    assert!(r.fluctuation);
    let g = report("gauss");
    assert!(g.evidence.iter().all(|e| e.grade == Grade::Evidence));
    let json = serde_json::to_value(&g).unwrap();
    assert_eq!(json["evidence"][0]["grade"], "evidence, not proof");
    let kinds: Vec<&str> = g.evidence.iter().map(|e| e.kind.as_str()).collect();
    for k in ["good-class", "uni-table", "diop-ratios", "resolvent-probe"] {
        assert!(kinds.contains(&k), "{kinds:?}");
    }
}

#[test]
fn deterministic() {
    let a = serde_json::to_string(&report("gauss")).unwrap();
    let b = serde_json::to_string(&report("gauss")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn conjugate_of_the_doubling_map_is_not_strongly_tame() {
    // x/(x+2) and (3x+1)/(x+3): every periodic multiplier is a power of 1/2
    let s = SourceModel::from_json(
        r#"{"type":"dynamical","kind":"moebius","branches":[{"a":1,"b":0,"c":1,"d":2},{"a":3,"b":1,"c":1,"d":3}]}"#,
    )
    .unwrap();
    let r = classify(&s, &ClassifyBudget::default());
    assert_eq!(r.verdict, Verdict::Unresolved);
    assert!(r.notes.iter().any(|n| n.contains("rational")));
}
