use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use morphomics::commands::{self, EvaluateOptions, ExtractOptions, SynthOptions, TrainOptions};
use morphomics::{meshio, tables};
use morphomics_core::{HistogramSpec, PipelineConfig};

/// Curvature-distribution shape features for 3D masks.
///
/// Set MORPHOMICS_LOG=error|warn|info|debug to control logging.
#[derive(Parser)]
#[command(name = "morphomics", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the 11 features from every mask in a directory or file.
    Extract {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        bins: usize,
        #[arg(long, default_value_t = -0.2, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
        hi: f64,
        /// Drop out-of-window curvatures instead of clamping them.
        #[arg(long)]
        no_clamp: bool,
        /// Isotropic resampling target in mm.
        #[arg(long, default_value_t = 0.625)]
        spacing: f64,
        /// Patch side in voxels; 0 keeps the whole grid.
        #[arg(long, default_value_t = 64)]
        patch: usize,
        /// CSV with `id,label` columns; adds a label column.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
    },
    /// Tune on an 80/20 split, refit on all rows and write the model.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        tune_budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        final_lr: f64,
        #[arg(long, default_value_t = 1000)]
        final_rounds: usize,
        #[arg(long, default_value_t = 0.2)]
        valid_fraction: f64,
        #[arg(long)]
        importance: Option<PathBuf>,
        #[arg(long)]
        tuning: Option<PathBuf>,
    },
    /// Score a labeled feature table and write an evaluation report.
    Evaluate {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5000)]
        bootstrap: usize,
        #[arg(long)]
        roc: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Welch t-test between the bootstrap AUCs of two reports.
    Compare {
        #[arg(long)]
        report_a: PathBuf,
        #[arg(long)]
        report_b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a labeled synthetic corpus of NRRD masks.
    Synth {
        #[arg(long)]
        benign: usize,
        #[arg(long)]
        malignant: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
    },
    /// Export the surface mesh and per-vertex curvature of one mask.
    Mesh {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        off: Option<PathBuf>,
        #[arg(long)]
        stl: Option<PathBuf>,
        #[arg(long)]
        curvature: Option<PathBuf>,
        #[arg(long, default_value_t = 0.625)]
        spacing: f64,
        #[arg(long, default_value_t = 64)]
        patch: usize,
    },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn patch(side: usize) -> Option<usize> {
    (side > 0).then_some(side)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract {
            input,
            out,
            bins,
            lo,
            hi,
            no_clamp,
            spacing,
            patch: side,
            labels,
            jobs,
        } => {
            let opts = ExtractOptions {
                spec: HistogramSpec {
                    bin_count: bins,
                    lo,
                    hi,
                    clamp_out_of_range: !no_clamp,
                },
                spacing_mm: spacing,
                patch: patch(side),
                labels,
                jobs,
                ..ExtractOptions::new(input, out)
            };
            let s = commands::run_extract(&opts)?;
            println!("{} rows written, {} skipped", s.written, s.skipped.len());
        }
        Command::Train {
            features,
            out,
            tune_budget,
            seed,
            final_lr,
            final_rounds,
            valid_fraction,
            importance,
            tuning,
        } => {
            let opts = TrainOptions {
                tune_budget,
                seed,
                final_lr,
                final_rounds,
                valid_fraction,
                importance,
                tuning,
                ..TrainOptions::new(features, out)
            };
            let m = commands::run_train(&opts)?;
            println!("model with {} trees written to {}", m.trees.len(), opts.out.display());
        }
        Command::Evaluate {
            features,
            model,
            out,
            bootstrap,
            roc,
            seed,
        } => {
            let opts = EvaluateOptions {
                bootstrap,
                roc,
                seed,
                ..EvaluateOptions::new(features, model, out)
            };
            let r = commands::run_evaluate(&opts)?;
            println!(
                "auc {:.4}  bootstrap {:.4} ± {:.4} [{:.4} {:.4}]  sensitivity {:.3}  specificity {:.3}  accuracy {:.3}",
                r.auc,
                r.bootstrap.mean,
                r.bootstrap.stdev,
                r.bootstrap.ci_low,
                r.bootstrap.ci_high,
                r.sensitivity,
                r.specificity,
                r.accuracy
            );
        }
        Command::Compare {
            report_a,
            report_b,
            out,
        } => {
            let c = commands::run_compare(&report_a, &report_b)?;
            let json = serde_json::to_string_pretty(&c)?;
            if let Some(out) = out {
                std::fs::write(out, json.clone() + "\n")?;
            }
            println!("{json}");
        }
        Command::Synth {
            benign,
            malignant,
            out,
            seed,
            jobs,
        } => {
            let opts = SynthOptions {
                jobs,
                ..SynthOptions::new(benign, malignant, out, seed)
            };
            let recs = commands::run_synth(&opts)?;
            println!("{} masks written to {}", recs.len(), opts.out.display());
        }
        Command::Mesh {
            input,
            off,
            stl,
            curvature,
            spacing,
            patch: side,
        } => {
            let config = PipelineConfig {
                patch_side: patch(side),
                ..PipelineConfig::with_spacing(spacing)
            };
            let (mesh, field) = commands::mesh_of(&input, &config)?;
            if let Some(p) = off {
                meshio::write_off(p, &mesh)?;
            }
            if let Some(p) = stl {
                meshio::write_stl(p, &mesh)?;
            }
            if let Some(p) = curvature {
                tables::write_curvature(p, &mesh, &field)?;
            }
            println!(
                "{} vertices, {} triangles, total mean curvature {:.4} mm",
                mesh.vertex_count(),
                mesh.triangle_count(),
                field.total_mean()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MORPHOMICS_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e:#}");
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
