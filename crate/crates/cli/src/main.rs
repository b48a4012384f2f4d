//! `inspect` — referential fabric defect detection.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 processing failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use inspect_core::config::PipelineConfig;
use inspect_core::pipeline::{run_batch, run_pair, write_synthetic_triple, PairOutcome};
use inspect_core::synth::{DefectKind, SyntheticSpec};

#[derive(Parser)]
#[command(name = "inspect", about = "Referential fabric defect detection", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Pipeline config file (flat `key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for masks, intensity maps and reports.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the Sylvester tile size (and stride) with 4, 8 or 12.
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect one reference/test pair.
    Run {
        /// Known-good reference image (PNG or binary PGM/PPM).
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Test image to inspect.
        #[arg(long)]
        test: PathBuf,
        /// Optional ground-truth defect mask for gamma scoring.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Inspect every pair in a CSV manifest (`reference,test[,truth[,label]]`).
    Batch {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Generate a synthetic reference/test/truth triple.
    Synth {
        #[arg(long)]
        seed: u64,
        /// none | line-break | spot | tear | illumination-gradient+spot
        #[arg(long)]
        kind: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Square image side in pixels.
        #[arg(long, default_value_t = 1024)]
        size: usize,
        /// Skip the random affine skew.
        #[arg(long)]
        no_skew: bool,
        /// Skip the illumination ramp.
        #[arg(long)]
        no_illumination: bool,
    },
}

fn load_config(common: &CommonOpts) -> Result<PipelineConfig, String> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            PipelineConfig::parse(&text).map_err(|e| e.to_string())?
        }
        None => PipelineConfig::default(),
    };
    if let Some(window) = common.window {
        if ![4, 8, 12].contains(&window) {
            return Err(format!("--window must be 4, 8 or 12, got {window}"));
        }
        cfg.tile_size = window;
        cfg.tile_stride = window;
    }
    if let Ok(workers) = std::env::var("INSPECT_WORKERS") {
        cfg.workers = workers
            .parse()
            .map_err(|_| format!("INSPECT_WORKERS must be an integer, got '{workers}'"))?;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Keep clap's help/version on stdout with success, everything
            // else is a usage error.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    match cli.command {
        Command::Run { reference, test, truth, common } => {
            let cfg = match load_config(&common) {
                Ok(cfg) => cfg,
                Err(msg) => return usage_error(&msg),
            };
            let pair_id = test
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "pair".into());
            match run_pair(&reference, &test, &cfg, truth.as_deref(), &common.out, &pair_id) {
                Ok(result) => {
                    println!(
                        "{}: {}",
                        result.pair_id,
                        if result.defect_present { "DEFECTIVE" } else { "defect-free" }
                    );
                    if let Some(gamma) = result.gamma {
                        println!("gamma: {gamma:.4}");
                    }
                    for (stage, ms) in &result.timings_ms {
                        println!("  {stage}: {ms} ms");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => processing_error(&e.to_string()),
            }
        }
        Command::Batch { manifest, common } => {
            let cfg = match load_config(&common) {
                Ok(cfg) => cfg,
                Err(msg) => return usage_error(&msg),
            };
            match run_batch(&manifest, &cfg, &common.out) {
                Ok(batch) => {
                    let failed: Vec<_> = batch
                        .outcomes
                        .iter()
                        .filter_map(|o| match o {
                            PairOutcome::Failed { pair_id, line, error } => {
                                Some(format!("{pair_id} (line {line}): {error}"))
                            }
                            PairOutcome::Ok(_) => None,
                        })
                        .collect();
                    for failure in &failed {
                        eprintln!("pair failed: {failure}");
                    }
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&batch.report).expect("serializable")
                    );
                    println!("report: {}", batch.report_path.display());
                    if failed.is_empty() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => processing_error(&e.to_string()),
            }
        }
        Command::Synth { seed, kind, out, size, no_skew, no_illumination } => {
            let kind = match DefectKind::parse(&kind) {
                Ok(kind) => kind,
                Err(e) => return usage_error(&e.to_string()),
            };
            if size < 32 {
                return usage_error("--size must be at least 32");
            }
            let mut spec = SyntheticSpec::new(kind, size, size);
            spec.skew = !no_skew;
            spec.illumination = !no_illumination;
            match write_synthetic_triple(seed, &spec, &out) {
                Ok((r, t, g)) => {
                    println!("reference: {}", r.display());
                    println!("test: {}", t.display());
                    println!("truth: {}", g.display());
                    ExitCode::SUCCESS
                }
                Err(e) => processing_error(&e.to_string()),
            }
        }
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn processing_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}
