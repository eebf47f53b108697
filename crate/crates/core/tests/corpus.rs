// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

use chronos::corpus::{self, CorpusEntry};
use chronos::reasoning::{generate_common, ReasoningError, VerdictKind};
use chronos::scenario::{load, parse, print_document, ElaborateOptions, ScenarioSource};

fn all() -> impl Iterator<Item = &'static CorpusEntry> {
    corpus::ENTRIES.iter().chain(corpus::EXTRAS)
}

#[test]
fn corpus_round_trips_through_the_printer() {
    for e in all() {
        let doc = parse(&e.source()).unwrap();
        let printed = print_document(&doc);
        let again = parse(&ScenarioSource::new("printed", printed.clone())).unwrap();
        assert_eq!(doc, again, "{}", e.id);
        // printing is a fixed point after one pass
        assert_eq!(print_document(&again), printed);
    }
}

#[test]
fn elaboration_is_deterministic() {
    for e in all() {
        let a = load(&e.source(), &ElaborateOptions::default()).unwrap();
        let b = load(&e.source(), &ElaborateOptions::default()).unwrap();
        assert_eq!(a.frameworks.keys().collect::<Vec<_>>(), b.frameworks.keys().collect::<Vec<_>>());
        for (fa, fb) in a.frameworks.values().zip(b.frameworks.values()) {
            assert_eq!(fa.decomposition.minimal(), fb.decomposition.minimal(), "{}", e.id);
            assert_eq!(fa.report, fb.report);
        }
        let ra: Vec<_> = a.execute().into_iter().map(|o| o.result.map(|v| (v.kind, v.raw_probability))).collect();
        let rb: Vec<_> = b.execute().into_iter().map(|o| o.result.map(|v| (v.kind, v.raw_probability))).collect();
        assert_eq!(ra, rb);
    }
}

#[test]
fn every_query_meets_its_annotation() {
    for e in all() {
        let sc = load(&e.source(), &ElaborateOptions::default()).unwrap();
        assert!(!sc.queries.is_empty());
        for o in sc.execute() {
            assert_eq!(o.expectation_met, Some(true), "{}::{} -> {:?}", e.id, o.name, o.result);
        }
    }
}

#[test]
fn spin_half_declares_z_and_x() {
    let sc = load(&corpus::find("spin-half").unwrap().source(), &ElaborateOptions::default()).unwrap();
    let names: Vec<&str> = sc.frameworks.keys().map(String::as_str).collect();
    assert_eq!(names, ["Z", "X"]);
    assert!(sc.frameworks.values().all(|f| f.report.single_time && f.report.verdict));
}

#[test]
fn three_state_kets_are_normalized() {
    let sc = load(&corpus::find("three-state").unwrap().source(), &ElaborateOptions::default()).unwrap();
    for k in ["phi", "psi"] {
        assert!((sc.kets[k].norm() - 1.0).abs() < 1e-12);
    }
    let amp = sc.kets["phi"].amplitudes();
    assert!((amp[0].re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
}

#[test]
fn three_state_frameworks_are_incompatible() {
    let sc = load(&corpus::find("three-state").unwrap().source(), &ElaborateOptions::default()).unwrap();
    let a = sc.frameworks["with_a"].framework.clone().unwrap();
    let b = sc.frameworks["with_b"].framework.clone().unwrap();
    assert!(a.report().verdict && b.report().verdict);
    match generate_common(&[a, b]) {
        Err(ReasoningError::InconsistentRefinement { report }) => assert!(report.worst_magnitude() > 0.1),
        other => panic!("expected an inconsistent refinement, got {other:?}"),
    }
}

#[test]
fn pointer_frameworks_keep_seven_elements() {
    for id in ["spin-measurement", "spin-measurement-mixed"] {
        let sc = load(&corpus::find(id).unwrap().source(), &ElaborateOptions::default()).unwrap();
        for name in ["z_pointer", "x_pointer"] {
            let f = &sc.frameworks[name];
            assert_eq!(f.decomposition.len(), 7, "{id}::{name}");
            assert_eq!(f.dropped, 0);
        }
        assert_eq!(sc.frameworks["x_then_z"].decomposition.len(), 13);
    }
}

#[test]
fn pure_and_mixed_measurement_models_agree() {
    let run = |id: &str| {
        let sc = load(&corpus::find(id).unwrap().source(), &ElaborateOptions::default()).unwrap();
        sc.execute().into_iter().map(|o| (o.name, o.result.unwrap().raw_probability)).collect::<Vec<_>>()
    };
    let pure = run("spin-measurement");
    let mixed = run("spin-measurement-mixed");
    let mut shared = 0;
    for (name, p) in &mixed {
        let (_, q) = pure.iter().find(|(n, _)| n == name).unwrap();
        match (p, q) {
            (Some(p), Some(q)) => assert!((p - q).abs() < 1e-9, "{name}: {p} vs {q}"),
            (None, None) => {}
            _ => panic!("{name}: verdict kinds differ"),
        }
        shared += 1;
    }
    assert!(shared >= 15);
}

#[test]
fn demo_chain_reports_quarter_overlap() {
    let sc = load(&corpus::find("inconsistent-spin-chain").unwrap().source(), &ElaborateOptions::default()).unwrap();
    let chain = &sc.frameworks["chain"];
    assert!(!chain.report.verdict && chain.framework.is_none());
    assert!((chain.report.worst_magnitude() - 0.25).abs() < 1e-9);
    let o = sc.run_query(sc.query("z_x_z").unwrap());
    assert_eq!(o.result.unwrap().kind, VerdictKind::Meaningless);
}
