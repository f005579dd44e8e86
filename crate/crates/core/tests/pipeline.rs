mod common;

use std::f64::consts::PI;

use clustershape::cluster::Diagnostic;
use clustershape::curvature::shape_score_curve;
use clustershape::ingest::{ingest, Format, Input};
use clustershape::pipeline::*;
use clustershape::svg::{render_svg, SvgError};
use common::*;
use proptest::prelude::*;
use rand::RngExt;

fn annulus(outer: f64, inner: f64) -> Vec<[f64; 2]> {
    let mut pts = circle_points(120, outer, [0.0, 0.0]);
    pts.extend(circle_points(80, inner, [0.0, 0.0]));
    pts
}

fn blobs(seed: u64) -> Vec<[f64; 2]> {
    let mut r = rng(seed);
    let mut pts = Vec::new();
    for cx in [0.0, 12.0] {
        for _ in 0..150 {
            pts.push([cx + gaussian(&mut r), gaussian(&mut r)]);
        }
    }
    pts
}

#[test]
fn annulus_scores_both_circles() {
    let (ro, ri) = (2.0, 1.0);
    let report = run_pipeline(&cloud(&annulus(ro, ri)), &PipelineConfig::default()).unwrap();
    assert_eq!(report.clusters.len(), 1);
    let c = &report.clusters[0];
    assert_eq!(c.loops.len(), 2);
    assert_eq!(c.loops.iter().filter(|l| l.hole).count(), 1);
    // scores are reported in the scaled frame; S_input = S_scaled * scale
    let expected = 2.0 * PI / ro + 2.0 * PI / ri;
    let got = c.score * report.scale;
    assert!((got / expected - 1.0).abs() < 0.05, "{got} vs {expected}");
    for lp in &c.loops {
        assert_eq!(lp.hole, lp.signed_area < 0.0);
    }
}

#[test]
fn two_blobs_two_clusters() {
    let report = run_pipeline(&cloud(&blobs(61)), &PipelineConfig::default()).unwrap();
    let big: Vec<&ClusterReport> = report.clusters.iter().filter(|c| c.point_count > 10).collect();
    assert_eq!(report.clusters.len(), 2);
    assert_eq!(big.len(), 2);
    for c in big {
        assert!(c.score > 0.0 && !c.loops.is_empty());
    }
}

#[test]
fn collinear_input_fails_at_triangulate() {
    let cfg = PipelineConfig { normalize: false, ..Default::default() };
    let err = run_pipeline(&cloud(&[[0., 0.], [1., 1.], [2., 2.]]), &cfg).unwrap_err();
    assert_eq!(err.stage, Stage::Triangulate);
    assert_eq!(err.cluster, None);
    assert_eq!(err.kind(), ErrorKind::Degenerate);
}

#[test]
fn report_invariants_and_schema() {
    let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let mut r = rng(62);
    for case in 0..30 {
        let mut pts = match case % 3 {
            0 => {
                let n = r.random_range(3..300);
                uniform_points(&mut r, n)
            }
            1 => blobs(case),
            _ => annulus(1.0, r.random_range(0.3..0.7)),
        };
        // a few exact duplicates
        for _ in 0..3 {
            let i = r.random_range(0..pts.len());
            pts.push(pts[i]);
        }
        let cfg = PipelineConfig { timing: case % 2 == 0, ..Default::default() };
        let report = match run_pipeline(&cloud(&pts), &cfg) {
            Ok(rep) => rep,
            Err(e) => panic!("case {case}: {e}"),
        };
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        if let Err(e) = validator.validate(&json) {
            panic!("case {case}: {e}");
        }
        for key in ["config", "edge_stats", "clusters", "scale"] {
            assert!(json.get(key).is_some());
        }
        assert_eq!(report.timing.is_some(), cfg.timing);

        // every input row in exactly one cluster
        let mut rows: Vec<usize> = report.clusters.iter().flat_map(|c| c.members.iter().copied()).collect();
        rows.sort_unstable();
        assert_eq!(rows, (0..pts.len()).collect::<Vec<_>>());

        for c in &report.clusters {
            assert!(c.score >= 0.0);
            assert_eq!(c.point_count, c.members.len());
            let curves: Vec<_> = c.loops.iter().filter_map(|l| l.fit.as_ref()).map(|f| f.to_curve().unwrap()).collect();
            let again = shape_score_curve(&curves, c.quadrature_order).unwrap();
            assert!((again.value - c.score).abs() <= 1e-12 * c.score.max(1.0) + c.estimated_error);
            let loop_sum: f64 = c.loops.iter().map(|l| l.score).sum();
            assert!((loop_sum - c.score).abs() <= 1e-9 * c.score.max(1.0));
            if c.loops.is_empty() {
                assert!(c.diagnostics.contains(&Diagnostic::DegenerateCluster));
            }
        }
    }
}

#[test]
fn deterministic_bytes() {
    let c = cloud(&blobs(63));
    let cfg = PipelineConfig::default();
    let first = run_pipeline(&c, &cfg).unwrap().to_json();
    for _ in 0..3 {
        assert_eq!(run_pipeline(&c, &cfg).unwrap().to_json(), first);
    }
}

#[test]
fn svg_output() {
    let cfg = PipelineConfig { normalize: false, m: 8.0, ..Default::default() };
    let circle = run_pipeline(&cloud(&circle_points(100, 1.0, [0.0, 0.0])), &cfg).unwrap();
    let svg = render_svg(&circle).unwrap();
    assert_eq!(svg.matches("<path").count(), 1);
    assert!(svg.contains("Z\""));
    assert!(svg.trim_end().ends_with("</svg>"));

    let two = run_pipeline(&cloud(&blobs(64)), &PipelineConfig::default()).unwrap();
    let svg = render_svg(&two).unwrap();
    assert_eq!(svg.matches("class=\"cluster\"").count(), 2);
    assert!(svg.contains("id=\"cluster-0\"") && svg.contains("id=\"cluster-1\""));

    let mut empty = two.clone();
    empty.clusters.clear();
    let svg = render_svg(&empty).unwrap();
    assert!(svg.starts_with("<svg") && !svg.contains("<path"));

    let mut three_d = empty;
    three_d.dim = 3;
    assert!(matches!(render_svg(&three_d), Err(SvgError::UnsupportedDimension(3))));
}

#[test]
fn ingest_files() {
    let dir = std::env::temp_dir().join(format!("clustershape-ingest-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("pts.csv");
    std::fs::write(&csv, "x,y\n0,0\n1,0\n0,1\n").unwrap();
    match ingest(&csv, None).unwrap() {
        Input::Cloud(c) => assert_eq!((c.len(), c.dim()), (3, 2)),
        other => panic!("{other:?}"),
    }
    let tet = dir.join("one.txt");
    std::fs::write(&tet, "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nt 0 1 2 3\n").unwrap();
    assert!(matches!(ingest(&tet, Some(Format::TetraComplex)).unwrap(), Input::Complex(_)));
    assert!(ingest(&dir.join("missing.csv"), None).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips_through_toml(
        m in 0.0f64..10.0,
        order in 3usize..=8,
        ratio in 1usize..6,
        extra in 0usize..10,
        fixed in proptest::option::of(8usize..40),
        q in 1usize..=64,
        reg in 0.0f64..1.0,
        normalize in any::<bool>(),
        timing in any::<bool>(),
    ) {
        let cfg = PipelineConfig {
            m,
            order,
            control_count: match fixed {
                Some(c) => clustershape::fit::ControlCount::Fixed(c),
                None => clustershape::fit::ControlCount::PerPoints { ratio, min: order + extra },
            },
            quadrature_order: q,
            regularization: reg,
            normalize,
            timing,
            input: Some("in.csv".into()),
            output: None,
            svg: Some("out dir/plot.svg".into()),
        };
        let text = cfg.to_toml();
        prop_assert_eq!(PipelineConfig::from_toml(&text).unwrap(), cfg);
    }
}
