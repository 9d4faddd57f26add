use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use proptest::prelude::*;
use rovtrace::pipeline::{self, AnalyzeOptions, PipelineError};
use rovtrace::rpki::Asn;
use rovtrace::simnet::{GeneratorParams, RovPolicy, Scenario};
use rovtrace::text::ParseMode;

fn simulate(scenario: &Scenario, dir: &Path) {
    let (_, art) = scenario.run().unwrap();
    pipeline::write_artifacts(&art, dir).unwrap();
}

fn opts() -> AnalyzeOptions {
    AnalyzeOptions {
        skip_spectrum: true,
        ..Default::default()
    }
}

#[test]
fn fig2_reports_round_trip() {
    let input = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    simulate(&Scenario::builtin("fig2").unwrap(), input.path());
    let a = pipeline::analyze_dir(input.path(), &opts()).unwrap();
    pipeline::write_reports(&a, out.path()).unwrap();

    for name in [
        pipeline::CLASSIFICATION_REPORT,
        pipeline::CORRELATION_REPORT,
        pipeline::DIVERGENCE_REPORT,
        pipeline::IXP_REPORT,
        pipeline::IXP_PEERINGS,
        pipeline::GRAPH_METRICS,
        pipeline::SUMMARY,
        pipeline::BY_TYPE,
    ] {
        assert!(out.path().join(name).is_file(), "{name} missing");
    }
    for name in pipeline::GRAPH_EDGES {
        assert!(out.path().join(name).is_file(), "{name} missing");
    }

    let report = fs::read_to_string(out.path().join(pipeline::CLASSIFICATION_REPORT)).unwrap();
    let [control, data] = pipeline::parse_classification_report(&report).unwrap();
    assert_eq!(data, a.data.categories);
    assert_eq!(control, a.control.categories);

    let summary = fs::read_to_string(out.path().join(pipeline::SUMMARY)).unwrap();
    assert!(summary.contains("[C7] "), "{summary}");
}

#[test]
fn fig2_scorecard_counts_strict_enforcer() {
    let input = tempfile::tempdir().unwrap();
    simulate(&Scenario::builtin("fig2").unwrap(), input.path());
    let a = pipeline::analyze_dir(input.path(), &opts()).unwrap();
    pipeline::write_reports(&a, input.path()).unwrap();
    let card = pipeline::score_dir(
        input.path(),
        &input.path().join(pipeline::GROUND_TRUTH),
        ParseMode::Lenient,
    )
    .unwrap();
    let strict = card.detection.iter().find(|d| d.policy == RovPolicy::Strict).unwrap();
    assert_eq!((strict.true_positives, strict.predicted, strict.actual), (1, 1, 1));
    assert_eq!(strict.precision(), Some(1.0));
    let text = pipeline::format_scorecard(&card);
    assert!(text.starts_with("plane,policy,category,count\n"));
    assert!(text.contains("\nstrict,C6+C7,1,1,1,1.0000,1.0000\n"), "{text}");
}

#[test]
fn scoring_rejects_unknown_ases() {
    let mut data = BTreeMap::new();
    data.insert(Asn(7), 1u8);
    data.insert(Asn(9), 4u8);
    let truth = BTreeMap::from([(Asn(7), RovPolicy::None)]);
    let err = pipeline::score(&[BTreeMap::new(), data], &truth).unwrap_err();
    assert!(matches!(err, PipelineError::UniverseMismatch { count: 1, first: Asn(9) }));
}

#[test]
fn same_seed_writes_identical_files() {
    let params = GeneratorParams {
        nodes: 120,
        ..Default::default()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        simulate(&Scenario::generated(params.clone()).with_seed(11), d.path());
    }
    let mut names: Vec<_> = fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 8);
    for n in names {
        let a = fs::read(dirs[0].path().join(&n)).unwrap();
        let b = fs::read(dirs[1].path().join(&n)).unwrap();
        assert!(a == b, "{n:?} differs");
    }
}

#[test]
fn empty_directory_warns_instead_of_failing() {
    let dir = tempfile::tempdir().unwrap();
    let a = pipeline::analyze_dir(dir.path(), &opts()).unwrap();
    assert!(a.data.categories.is_empty());
    assert!(a.metrics.is_none());
    assert!(a.inputs.warnings.iter().any(|w| w.contains("no usable paths")));
}

#[test]
fn strict_parse_rejects_comments_lenient_skips_them() {
    let dir = tempfile::tempdir().unwrap();
    simulate(&Scenario::builtin("fig2").unwrap(), dir.path());
    let path = dir.path().join(pipeline::IP2AS);
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, format!("# annotated\n{text}")).unwrap();

    assert!(pipeline::analyze_dir(dir.path(), &opts()).is_ok());
    let strict = AnalyzeOptions {
        mode: ParseMode::Strict,
        ..opts()
    };
    assert!(matches!(
        pipeline::analyze_dir(dir.path(), &strict),
        Err(PipelineError::Ingest { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // Derived graphs stay spanning subgraphs of G1 and every measured AS
    // lands in exactly one of the seven categories.
    #[test]
    fn generated_topologies_analyze_cleanly(seed in 0u64..10_000, nodes in 30usize..120) {
        let params = GeneratorParams { nodes, ..Default::default() };
        let (_, art) = Scenario::generated(params).with_seed(seed).run().unwrap();
        let dir = tempfile::tempdir().unwrap();
        pipeline::write_artifacts(&art, dir.path()).unwrap();
        let a = pipeline::analyze_dir(dir.path(), &opts()).unwrap();
        let [g1, g2, g3] = &a.graphs;
        prop_assert_eq!(g1.vertices(), g2.vertices());
        prop_assert_eq!(g1.vertices(), g3.vertices());
        prop_assert!(g2.edge_count() <= g1.edge_count());
        prop_assert!(a.data.categories.values().all(|c| (1..=7).contains(c)));
        prop_assert!(a.control.categories.values().all(|c| (1..=7).contains(c)));
        for asn in a.data.categories.keys() {
            prop_assert!(art.ground_truth.contains_key(asn));
        }
    }
}
