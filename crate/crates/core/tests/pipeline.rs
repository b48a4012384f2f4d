//! Integration tests for the pipeline orchestration: short-circuiting,
//! artifact layout, manifest handling, and worker-count determinism.

mod common;

use std::fs;

use inspect_core::config::PipelineConfig;
use inspect_core::error::Error;
use inspect_core::image::codec::decode_image;
use inspect_core::image::to_grayscale;
use inspect_core::pipeline::{parse_manifest, run_batch, run_pair, write_synthetic_triple, PairOutcome};
use inspect_core::synth::{DefectKind, SyntheticSpec};

fn small_config() -> PipelineConfig {
    PipelineConfig {
        resize_width: 128,
        resize_height: 128,
        filter_length: 128,
        ..Default::default()
    }
}

fn spec_128(kind: DefectKind) -> SyntheticSpec {
    SyntheticSpec::new(kind, 128, 128)
}

#[test]
fn identical_files_short_circuit_before_edge_detection() {
    let dir = tempfile::tempdir().unwrap();
    let (ref_path, _, _) =
        write_synthetic_triple(31, &spec_128(DefectKind::None), dir.path()).unwrap();
    let out = dir.path().join("out");
    let result = run_pair(&ref_path, &ref_path, &small_config(), None, &out, "self").unwrap();
    assert!(!result.defect_present);
    assert!(!result.timings_ms.contains_key("edge_detection"));
    assert!(!result.timings_ms.contains_key("fault_detection"));
    assert!(result.timings_ms.contains_key("subtraction"));
    assert!(result.timings_ms.contains_key("total"));
    // The (empty) mask and the report are still written.
    let mask_bytes = fs::read(result.artifacts.mask.as_ref().unwrap()).unwrap();
    let mask = decode_image(&mask_bytes).unwrap();
    assert!(mask.pixels().iter().all(|&b| b == 0));
    assert!(result.artifacts.report.as_ref().unwrap().exists());
    assert!(result.artifacts.intensity.is_none());
}

#[test]
fn invalid_config_fails_before_any_processing() {
    let cfg = PipelineConfig { ht_min: 0.5, ht_max: 0.1, ..small_config() };
    let out = std::env::temp_dir();
    let missing = std::path::Path::new("definitely-missing.png");
    match run_pair(missing, missing, &cfg, None, &out, "x") {
        Err(Error::InvalidArgument(_)) => {}
        other => panic!("expected threshold validation error, got {other:?}"),
    }
}

#[test]
fn defective_pair_runs_all_stages_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (ref_path, test_path, truth_path) =
        write_synthetic_triple(57, &spec_128(DefectKind::Spot), dir.path()).unwrap();
    let out = dir.path().join("out");
    let result = run_pair(
        &ref_path,
        &test_path,
        &small_config(),
        Some(&truth_path),
        &out,
        "spot",
    )
    .unwrap();
    assert!(result.defect_present);
    assert_eq!(result.truth_defective, Some(true));
    assert!(result.gamma.is_some());
    assert!(result.timings_ms.contains_key("edge_detection"));
    assert!(result.timings_ms.contains_key("fault_detection"));
    let tiles = fs::read_to_string(result.artifacts.tiles.as_ref().unwrap()).unwrap();
    assert!(tiles.starts_with("tile_row,tile_col,rank,intensity\n"));
    assert!(tiles.lines().count() > 1 + 16 * 16 / 2, "tile grid incomplete");
    assert!(result.artifacts.intensity.as_ref().unwrap().exists());
    // Detected mask overlaps the painted truth.
    let mask_img = decode_image(&fs::read(result.artifacts.mask.as_ref().unwrap()).unwrap()).unwrap();
    let truth_img = decode_image(&fs::read(&truth_path).unwrap()).unwrap();
    let gray_mask = to_grayscale::<f64>(&mask_img);
    let gray_truth = to_grayscale::<f64>(&truth_img);
    let mut covered = 0usize;
    let mut total = 0usize;
    for (m, t) in gray_mask.pixels().iter().zip(gray_truth.pixels()) {
        if *t >= 0.5 {
            total += 1;
            if *m >= 0.5 {
                covered += 1;
            }
        }
    }
    assert!(total > 0);
    assert!(
        covered as f64 >= 0.7 * total as f64,
        "mask covers {covered}/{total} truth pixels"
    );
}

#[test]
fn manifest_parser_reports_line_numbers() {
    match parse_manifest("a.png,b.png\nonly-one-field\n") {
        Err(Error::Manifest { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected manifest error, got {other:?}"),
    }
    match parse_manifest("a.png,b.png,,maybe\n") {
        Err(Error::Manifest { line, message }) => {
            assert_eq!(line, 1);
            assert!(message.contains("label"));
        }
        other => panic!("expected manifest error, got {other:?}"),
    }
    // Comments, blanks, and optional fields parse.
    let entries = parse_manifest("# header\n\nr.png,t.png\nr.png,t.png,g.png,1\n").unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0].line, 3);
    assert_eq!(entries[1].label, Some(true));
}

#[test]
fn empty_manifest_is_an_error() {
    assert!(parse_manifest("# nothing here\n").is_err());
}

#[test]
fn batch_records_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let (ref_path, test_path, _) =
        write_synthetic_triple(71, &spec_128(DefectKind::None), dir.path()).unwrap();
    let manifest = dir.path().join("pairs.csv");
    fs::write(
        &manifest,
        format!(
            "{},{}\nmissing.png,{}\n",
            ref_path.display(),
            test_path.display(),
            test_path.display()
        ),
    )
    .unwrap();
    let batch = run_batch(&manifest, &small_config(), &dir.path().join("out")).unwrap();
    assert_eq!(batch.outcomes.len(), 2);
    assert!(matches!(batch.outcomes[0], PairOutcome::Ok(_)));
    match &batch.outcomes[1] {
        PairOutcome::Failed { line, .. } => assert_eq!(*line, 2),
        other => panic!("expected failure, got {other:?}"),
    }
    assert!(batch.report_path.exists());
}

#[test]
fn batch_report_is_identical_across_worker_counts_except_timings() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest_text = String::new();
    for (i, kind) in [DefectKind::Spot, DefectKind::None, DefectKind::LineBreak]
        .iter()
        .enumerate()
    {
        let pair_dir = dir.path().join(format!("pair{i}"));
        let (r, t, g) =
            write_synthetic_triple(100 + i as u64, &spec_128(*kind), &pair_dir).unwrap();
        manifest_text.push_str(&format!(
            "{},{},{},{}\n",
            r.display(),
            t.display(),
            g.display(),
            u8::from(kind.is_defective())
        ));
    }
    let manifest = dir.path().join("pairs.csv");
    fs::write(&manifest, manifest_text).unwrap();

    let strip_timings = |v: &mut serde_json::Value| {
        v.as_object_mut().unwrap().remove("timings_ms");
    };
    let mut reports = Vec::new();
    for workers in [1usize, 8] {
        let cfg = PipelineConfig { workers, ..small_config() };
        let out = dir.path().join(format!("out{workers}"));
        let batch = run_batch(&manifest, &cfg, &out).unwrap();
        let mut json: serde_json::Value =
            serde_json::from_slice(&fs::read(&batch.report_path).unwrap()).unwrap();
        strip_timings(&mut json);
        reports.push(json);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn batch_aggregates_match_individual_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut entries = Vec::new();
    let mut manifest_text = String::new();
    for (i, kind) in [DefectKind::Spot, DefectKind::None].iter().enumerate() {
        let pair_dir = dir.path().join(format!("pair{i}"));
        let (r, t, g) = write_synthetic_triple(7 + i as u64, &spec_128(*kind), &pair_dir).unwrap();
        manifest_text.push_str(&format!("{},{},{}\n", r.display(), t.display(), g.display()));
        entries.push((r, t, g));
    }
    let manifest = dir.path().join("pairs.csv");
    fs::write(&manifest, manifest_text).unwrap();
    let cfg = small_config();
    let batch = run_batch(&manifest, &cfg, &dir.path().join("batch_out")).unwrap();

    // Run the same pairs singly and fold by hand.
    let mut gammas = Vec::new();
    let mut decisions = Vec::new();
    for (i, (r, t, g)) in entries.iter().enumerate() {
        let single = run_pair(r, t, &cfg, Some(g), &dir.path().join("single_out"), &format!("s{i}"))
            .unwrap();
        gammas.push(single.gamma.unwrap());
        decisions.push((single.defect_present, single.truth_defective.unwrap()));
    }
    let mean_gamma = gammas.iter().sum::<f64>() / gammas.len() as f64;
    assert!((batch.report.gamma.unwrap() - mean_gamma).abs() < 1e-12);
    let folded = inspect_core::eval::confusion_metrics(&decisions).unwrap();
    assert_eq!(batch.report.confusion, folded);
}

#[test]
fn synthetic_triple_files_decode_back() {
    let dir = tempfile::tempdir().unwrap();
    let (r, t, g) = write_synthetic_triple(5, &spec_128(DefectKind::Tear), dir.path()).unwrap();
    for path in [&r, &t, &g] {
        let img = decode_image(&fs::read(path).unwrap()).unwrap();
        assert_eq!((img.width(), img.height()), (128, 128));
    }
}
