//! End-to-end orchestration of the six inspection phases, artifact output,
//! per-stage timing, and batch evaluation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::PipelineConfig;
use crate::edgefilter::{design_filter, extract_edges};
use crate::enhance::{histogram_specification, mmsiche};
use crate::error::{Error, Result};
use crate::eval::{binary_similarity, confusion_metrics, ConfusionMetrics, EvalReport};
use crate::image::codec::{decode_image, encode_png_gray, encode_png_mask};
use crate::image::{histogram, resize, to_grayscale, GrayImage};
use crate::mask::BinaryMask;
use crate::register::{
    detect_corners, estimate_affine, match_correspondences, warp_with_footprint, RansacParams,
};
use crate::subtract::{absolute_difference, defect_present, double_threshold, hysteresis, ThresholdPair};
use crate::sylvester::fault_map;
use crate::synth::{generate_synthetic_pair, SyntheticSpec};

/// Corners fed to the matcher.
const MAX_CORNERS: usize = 200;
/// Pixels shaved off the warp footprint before subtraction, absorbing
/// interpolation edge effects and residual registration error.
const FOOTPRINT_ERODE_PX: f64 = 4.0;

/// Output artifacts written for one pair.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Artifacts {
    pub mask: Option<PathBuf>,
    pub intensity: Option<PathBuf>,
    pub tiles: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// Outcome of one pair run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub pair_id: String,
    pub defect_present: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Whether the supplied ground truth marks any defect pixels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth_defective: Option<bool>,
    pub artifacts: Artifacts,
    pub timings_ms: BTreeMap<String, u64>,
}

struct StageClock {
    timings: BTreeMap<String, u64>,
    started: Instant,
}

impl StageClock {
    fn new() -> Self {
        Self { timings: BTreeMap::new(), started: Instant::now() }
    }

    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t0 = Instant::now();
        let out = f()?;
        self.timings.insert(stage.to_string(), t0.elapsed().as_millis() as u64);
        Ok(out)
    }

    fn finish(mut self) -> BTreeMap<String, u64> {
        self.timings.insert("total".into(), self.started.elapsed().as_millis() as u64);
        self.timings
    }
}

fn load_rgb(path: &Path) -> Result<crate::image::RgbImage> {
    let bytes = fs::read(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    decode_image(&bytes)
}

fn load_truth_mask(path: &Path, rows: usize, cols: usize) -> Result<BinaryMask> {
    let gray: GrayImage<f64> = to_grayscale(&load_rgb(path)?);
    let gray = if gray.rows() != rows || gray.cols() != cols {
        resize(&gray, rows, cols)?
    } else {
        gray
    };
    Ok(BinaryMask::from_fn(rows, cols, |r, c| gray.get(r, c) >= 0.5))
}

/// Runs the full pipeline on one reference/test pair and writes artifacts to
/// `out_dir/<pair_id>/`. With a ground-truth mask the binary similarity of the
/// detected fault mask is reported as well.
pub fn run_pair(
    reference: &Path,
    test: &Path,
    cfg: &PipelineConfig,
    truth: Option<&Path>,
    out_dir: &Path,
    pair_id: &str,
) -> Result<RunResult> {
    cfg.validate()?;
    let thresholds = ThresholdPair::new(cfg.ht_min, cfg.ht_max)?;
    let mut clock = StageClock::new();

    let (ref_rgb, test_rgb) =
        clock.time("decode", || Ok((load_rgb(reference)?, load_rgb(test)?)))?;
    let (ref_gray, test_gray) = clock.time("grayscale", || {
        Ok((to_grayscale::<f64>(&ref_rgb), to_grayscale::<f64>(&test_rgb)))
    })?;
    let (ref_gray, test_gray) = clock.time("resize", || {
        Ok((
            resize(&ref_gray, cfg.resize_height, cfg.resize_width)?,
            resize(&test_gray, cfg.resize_height, cfg.resize_width)?,
        ))
    })?;

    let specified = clock.time("histogram_specification", || {
        histogram_specification(&test_gray, &histogram(&ref_gray))
    })?;
    let enhanced = clock.time("mmsiche", || mmsiche(&specified))?;

    let (registered, footprint) = clock.time("registration", || {
        let corners = detect_corners(&ref_gray, MAX_CORNERS)?;
        let pairs = match_correspondences(&ref_gray, &enhanced, &corners)?;
        let params = RansacParams {
            seed: cfg.ransac_seed,
            iterations: cfg.ransac_iterations,
            inlier_radius: cfg.ransac_inlier_radius,
        };
        let transform = estimate_affine(&pairs, &params)?;
        warp_with_footprint(&enhanced, &transform, FOOTPRINT_ERODE_PX)
    })?;

    let present = clock.time("subtraction", || {
        let ad = absolute_difference(&ref_gray, &registered)?;
        let labels = double_threshold(&ad, &thresholds).restricted_to(&footprint)?;
        let mask = hysteresis(&labels);
        Ok(defect_present(&mask, cfg.min_defect_pixels))
    })?;

    let fault = if present {
        let (edges_ref, edges_test) = clock.time("edge_detection", || {
            let filter = design_filter::<f64>(cfg.filter_order, cfg.filter_cutoff, cfg.filter_length)?;
            Ok((extract_edges(&ref_gray, &filter)?, extract_edges(&registered, &filter)?))
        })?;
        Some(clock.time("fault_detection", || {
            fault_map(&edges_ref, &edges_test, cfg.tile_size, cfg.tile_stride, cfg.rank_tolerance)
        })?)
    } else {
        None
    };

    // Detected-fault mask: rank intensities thresholded and restricted to the
    // registered footprint; empty for defect-free pairs.
    let detected = match &fault {
        Some(dm) => dm.binary_mask(cfg.intensity_threshold).and(&footprint)?,
        None => BinaryMask::new(ref_gray.rows(), ref_gray.cols()),
    };

    let (gamma, truth_defective) = match truth {
        Some(truth_path) => {
            let truth_mask = load_truth_mask(truth_path, ref_gray.rows(), ref_gray.cols())?;
            (
                Some(binary_similarity(&detected, &truth_mask)?),
                Some(truth_mask.count_ones() > 0),
            )
        }
        None => (None, None),
    };

    let pair_dir = out_dir.join(pair_id);
    fs::create_dir_all(&pair_dir)?;
    let mut artifacts = Artifacts::default();
    let mask_path = pair_dir.join("mask.png");
    fs::write(&mask_path, encode_png_mask(&detected)?)?;
    artifacts.mask = Some(mask_path);
    if let Some(dm) = &fault {
        let intensity_path = pair_dir.join("intensity.png");
        fs::write(&intensity_path, encode_png_gray(&dm.intensity_image())?)?;
        artifacts.intensity = Some(intensity_path);
        let tiles_path = pair_dir.join("tiles.csv");
        let mut csv = Vec::new();
        dm.write_csv(&mut csv)?;
        fs::write(&tiles_path, csv)?;
        artifacts.tiles = Some(tiles_path);
    }

    let timings_ms = clock.finish();
    let mut result = RunResult {
        pair_id: pair_id.to_string(),
        defect_present: present,
        gamma,
        truth_defective,
        artifacts,
        timings_ms,
    };
    let report_path = pair_dir.join("report.json");
    fs::write(&report_path, serde_json::to_vec_pretty(&result).expect("serializable"))?;
    result.artifacts.report = Some(report_path);
    Ok(result)
}

/// One parsed manifest entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub line: usize,
    pub reference: PathBuf,
    pub test: PathBuf,
    pub truth: Option<PathBuf>,
    pub label: Option<bool>,
}

/// Parses a `reference,test[,truth[,label]]` CSV manifest.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 || fields.len() > 4 {
            return Err(Error::Manifest {
                line: idx + 1,
                message: format!("expected 2 to 4 comma-separated fields, got {}", fields.len()),
            });
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::Manifest {
                line: idx + 1,
                message: "reference and test paths must be non-empty".into(),
            });
        }
        let truth = fields
            .get(2)
            .filter(|s| !s.is_empty())
            .map(PathBuf::from);
        let label = match fields.get(3).filter(|s| !s.is_empty()) {
            None => None,
            Some(&"0") | Some(&"false") => Some(false),
            Some(&"1") | Some(&"true") => Some(true),
            Some(other) => {
                return Err(Error::Manifest {
                    line: idx + 1,
                    message: format!("label must be 0/1/true/false, got '{other}'"),
                })
            }
        };
        entries.push(ManifestEntry {
            line: idx + 1,
            reference: PathBuf::from(fields[0]),
            test: PathBuf::from(fields[1]),
            truth,
            label,
        });
    }
    if entries.is_empty() {
        return Err(Error::arg("manifest lists no pairs"));
    }
    Ok(entries)
}

/// Per-pair outcome inside a batch; failures are recorded, not fatal.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PairOutcome {
    Ok(RunResult),
    Failed { pair_id: String, line: usize, error: String },
}

/// Batch result: the aggregate report (also written to `batch.json`) and the
/// ordered per-pair outcomes.
#[derive(Debug, Clone)]
pub struct BatchResult {
    pub report: EvalReport,
    pub outcomes: Vec<PairOutcome>,
    pub report_path: PathBuf,
}

/// Runs every manifest pair (in parallel up to the configured worker count),
/// aggregates confusion metrics and mean gamma, and writes `batch.json`.
pub fn run_batch(manifest: &Path, cfg: &PipelineConfig, out_dir: &Path) -> Result<BatchResult> {
    cfg.validate()?;
    let text = fs::read_to_string(manifest)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", manifest.display()))))?;
    let entries = parse_manifest(&text)?;
    let started = Instant::now();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.effective_workers())
        .build()
        .map_err(|e| Error::Numeric(format!("worker pool: {e}")))?;
    let outcomes: Vec<PairOutcome> = pool.install(|| {
        use rayon::prelude::*;
        entries
            .par_iter()
            .enumerate()
            .map(|(idx, entry)| {
                let stem = entry
                    .test
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "pair".into());
                let pair_id = format!("{idx:04}_{stem}");
                match run_pair(
                    &entry.reference,
                    &entry.test,
                    cfg,
                    entry.truth.as_deref(),
                    out_dir,
                    &pair_id,
                ) {
                    Ok(result) => PairOutcome::Ok(result),
                    Err(e) => PairOutcome::Failed { pair_id, line: entry.line, error: e.to_string() },
                }
            })
            .collect()
    });

    // Deterministic aggregation in manifest order.
    let mut decisions = Vec::new();
    let mut gammas = Vec::new();
    let mut stage_totals: BTreeMap<String, u64> = BTreeMap::new();
    for (entry, outcome) in entries.iter().zip(&outcomes) {
        if let PairOutcome::Ok(result) = outcome {
            // Image-level ground truth: explicit label first, otherwise a
            // non-empty truth mask.
            let actual = entry.label.or(result.truth_defective);
            if let Some(actual) = actual {
                decisions.push((result.defect_present, actual));
            }
            if let Some(g) = result.gamma {
                gammas.push(g);
            }
            for (stage, ms) in &result.timings_ms {
                *stage_totals.entry(stage.clone()).or_insert(0) += ms;
            }
        }
    }
    let confusion = if decisions.is_empty() {
        ConfusionMetrics {
            tp: 0,
            fp: 0,
            tn: 0,
            fn_: 0,
            accuracy: None,
            precision: None,
            recall: None,
            fp_rate: None,
            fn_rate: None,
        }
    } else {
        confusion_metrics(&decisions)?
    };
    stage_totals.insert("batch_total".into(), started.elapsed().as_millis() as u64);
    let report = EvalReport {
        gamma: if gammas.is_empty() {
            None
        } else {
            Some(gammas.iter().sum::<f64>() / gammas.len() as f64)
        },
        confusion,
        timings_ms: stage_totals,
    };

    fs::create_dir_all(out_dir)?;
    let report_path = out_dir.join("batch.json");
    fs::write(&report_path, serde_json::to_vec_pretty(&report).expect("serializable"))?;
    Ok(BatchResult { report, outcomes, report_path })
}

/// Writes a synthetic triple as PNG files and returns their paths.
pub fn write_synthetic_triple(
    seed: u64,
    spec: &SyntheticSpec,
    dir: &Path,
) -> Result<(PathBuf, PathBuf, PathBuf)> {
    let pair = generate_synthetic_pair(seed, spec)?;
    fs::create_dir_all(dir)?;
    let ref_path = dir.join("reference.png");
    let test_path = dir.join("test.png");
    let truth_path = dir.join("truth.png");
    fs::write(&ref_path, encode_png_gray(&pair.reference)?)?;
    fs::write(&test_path, encode_png_gray(&pair.test)?)?;
    fs::write(&truth_path, encode_png_mask(&pair.truth)?)?;
    Ok((ref_path, test_path, truth_path))
}
