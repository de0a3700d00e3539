//! The subcommands as library calls. Seeds for each step are derived from
//! the user seed with fixed tags (`train/tune`, `train/search`,
//! `train/final`, `evaluate/bootstrap`), so runs repeat exactly.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use morphomics_core::classifier::{
    feature_importance, final_config, train, tune, GbtConfig, GbtModel, RandomSearch, SearchSpace, TuneOptions,
    TuneResult,
};
use morphomics_core::eval::{evaluate, welch_test, EvalReport, WelchResult};
use morphomics_core::pipeline::extract_morphomics_detailed;
use morphomics_core::synth::{corpus_plan, make_case, CorpusConfig};
use morphomics_core::{seed, CurvatureField, FeatureVector, HistogramSpec, PipelineConfig, TriangleMesh, VoxelGrid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::modelio::{load_model, load_report, save_model, save_report};
use crate::nrrd::{read_nrrd, write_nrrd, Encoding};
use crate::rawvol::read_raw;
use crate::tables::{read_labels, write_importance, write_labels, write_roc, FeatureRow, FeatureTable, LabelRecord};

/// Reads a mask by extension: `.nrrd`, or `.raw` with a `.json` sidecar.
pub fn load_mask(path: &Path) -> Result<VoxelGrid> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("nrrd") => read_nrrd(path).with_context(|| format!("reading {}", path.display())),
        Some("raw") => read_raw(path).with_context(|| format!("reading {}", path.display())),
        _ => bail!("unrecognized mask format: {}", path.display()),
    }
}

fn is_mask(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("nrrd" | "raw"))
}

/// Mask files under `input` (a file or a flat directory) as `(id, path)`
/// sorted by id, where the id is the file stem.
pub fn discover_inputs(input: &Path) -> Result<Vec<(String, PathBuf)>> {
    let paths: Vec<PathBuf> = if input.is_dir() {
        let mut v = Vec::new();
        for entry in std::fs::read_dir(input).with_context(|| format!("reading {}", input.display()))? {
            let p = entry?.path();
            if p.is_file() && is_mask(&p) {
                v.push(p);
            }
        }
        v
    } else if input.is_file() {
        vec![input.to_path_buf()]
    } else {
        bail!("input {} does not exist", input.display());
    };
    let mut out: Vec<(String, PathBuf)> = paths
        .into_iter()
        .map(|p| (p.file_stem().unwrap_or_default().to_string_lossy().into_owned(), p))
        .collect();
    out.sort();
    if let Some(w) = out.windows(2).find(|w| w[0].0 == w[1].0) {
        bail!("two inputs share the id `{}`", w[0].0);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub input: PathBuf,
    pub out: PathBuf,
    pub spec: HistogramSpec,
    pub spacing_mm: f64,
    /// Patch side in voxels, `None` for the whole grid.
    pub patch: Option<usize>,
    pub labels: Option<PathBuf>,
    pub jobs: usize,
}

impl ExtractOptions {
    pub fn new(input: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            out: out.into(),
            spec: HistogramSpec::default(),
            spacing_mm: morphomics_core::volume::DEFAULT_SPACING_MM,
            patch: Some(morphomics_core::volume::DEFAULT_PATCH_SIDE),
            labels: None,
            jobs: 1,
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            patch_side: self.patch,
            ..PipelineConfig::with_spacing(self.spacing_mm)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractSummary {
    pub written: usize,
    /// `(id, reason)` for every skipped input.
    pub skipped: Vec<(String, String)>,
}

pub fn extract_one(path: &Path, spec: &HistogramSpec, config: &PipelineConfig) -> Result<FeatureVector> {
    let grid = load_mask(path)?;
    Ok(extract_morphomics_detailed(&grid, spec, config)?.features)
}

/// One CSV row per readable mask, in id order whatever `jobs` is. Failing
/// inputs are logged and skipped; it is an error if none succeeds.
pub fn run_extract(opts: &ExtractOptions) -> Result<ExtractSummary> {
    opts.spec.validate()?;
    let inputs = discover_inputs(&opts.input)?;
    if inputs.is_empty() {
        bail!("no masks found in {}", opts.input.display());
    }
    let labels = opts.labels.as_deref().map(read_labels).transpose()?;
    let config = opts.pipeline();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .context("building worker pool")?;
    let results: Vec<Result<FeatureRow, String>> = pool.install(|| {
        inputs
            .par_iter()
            .map(|(id, path)| {
                let label = match &labels {
                    Some(map) => Some(*map.get(id).ok_or_else(|| "no entry in labels file".to_string())?),
                    None => None,
                };
                let fv = extract_one(path, &opts.spec, &config).map_err(|e| format!("{e:#}"))?;
                log::debug!("extracted {id}");
                Ok(FeatureRow {
                    id: id.clone(),
                    values: fv.to_row(),
                    label,
                })
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for ((id, _), r) in inputs.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(reason) => {
                log::warn!("skipping {id}: {reason}");
                skipped.push((id.clone(), reason));
            }
        }
    }
    if rows.is_empty() {
        bail!("none of the {} inputs could be processed", inputs.len());
    }
    let table = FeatureTable {
        names: FeatureVector::names(opts.spec.bin_count),
        rows,
    };
    table
        .write(&opts.out)
        .with_context(|| format!("writing {}", opts.out.display()))?;
    log::info!("wrote {} rows, skipped {}", table.rows.len(), skipped.len());
    Ok(ExtractSummary {
        written: table.rows.len(),
        skipped,
    })
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub features: PathBuf,
    pub out: PathBuf,
    pub tune_budget: usize,
    pub seed: u64,
    pub final_lr: f64,
    pub final_rounds: usize,
    pub valid_fraction: f64,
    /// Defaults to `<out>.importance.csv`.
    pub importance: Option<PathBuf>,
    /// Defaults to `<out>.tuning.json`.
    pub tuning: Option<PathBuf>,
}

impl TrainOptions {
    pub fn new(features: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            features: features.into(),
            out: out.into(),
            tune_budget: 100,
            seed: 0,
            final_lr: 0.01,
            final_rounds: 1000,
            valid_fraction: 0.2,
            importance: None,
            tuning: None,
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// Search record written next to the model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuningRecord {
    pub search: TuneResult,
    pub final_config: GbtConfig,
}

pub fn tune_and_fit(
    data: &morphomics_core::Dataset,
    budget: usize,
    valid_fraction: f64,
    final_lr: f64,
    final_rounds: usize,
    seed_value: u64,
) -> Result<(GbtModel, TuningRecord)> {
    let options = TuneOptions {
        valid_fraction,
        budget,
        seed: seed::derive(seed_value, "train/tune"),
    };
    let mut sampler = RandomSearch {
        space: SearchSpace::default(),
        seed: seed::derive(seed_value, "train/search"),
    };
    let search = tune(data, &options, &mut sampler)?;
    let config = final_config(
        &search.best,
        data,
        final_lr,
        final_rounds,
        seed::derive(seed_value, "train/final"),
    );
    let model = train(data, &config)?;
    Ok((
        model,
        TuningRecord {
            search,
            final_config: config,
        },
    ))
}

/// Tunes on an 80/20 split, refits on all rows with the final learning rate
/// and round count, and writes the model, importance CSV and tuning record.
pub fn run_train(opts: &TrainOptions) -> Result<GbtModel> {
    let table = FeatureTable::read(&opts.features).with_context(|| format!("reading {}", opts.features.display()))?;
    let data = table.to_dataset()?;
    let (model, record) = tune_and_fit(
        &data,
        opts.tune_budget,
        opts.valid_fraction,
        opts.final_lr,
        opts.final_rounds,
        opts.seed,
    )?;
    save_model(&opts.out, &model).with_context(|| format!("writing {}", opts.out.display()))?;
    let imp_path = opts
        .importance
        .clone()
        .unwrap_or_else(|| sibling(&opts.out, "importance.csv"));
    write_importance(&imp_path, &feature_importance(&model))?;
    let tuning_path = opts.tuning.clone().unwrap_or_else(|| sibling(&opts.out, "tuning.json"));
    std::fs::write(&tuning_path, serde_json::to_string_pretty(&record)? + "\n")?;
    log::info!(
        "best validation log-loss {:.4} over {} trials",
        record.search.best_loss,
        record.search.trials.len()
    );
    Ok(model)
}

#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    pub features: PathBuf,
    pub model: PathBuf,
    pub out: PathBuf,
    pub bootstrap: usize,
    pub roc: Option<PathBuf>,
    pub seed: u64,
}

impl EvaluateOptions {
    pub fn new(features: impl Into<PathBuf>, model: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            features: features.into(),
            model: model.into(),
            out: out.into(),
            bootstrap: morphomics_core::eval::DEFAULT_BOOTSTRAP,
            roc: None,
            seed: 0,
        }
    }
}

pub fn run_evaluate(opts: &EvaluateOptions) -> Result<EvalReport> {
    let model = load_model(&opts.model).with_context(|| format!("reading {}", opts.model.display()))?;
    let table = FeatureTable::read(&opts.features).with_context(|| format!("reading {}", opts.features.display()))?;
    let table = table
        .select(&model.feature_names)
        .map_err(|m| anyhow::anyhow!("feature mismatch between model and table: {m}"))?;
    let data = table.to_dataset()?;
    let scores = model.predict_many(data.rows())?;
    let report = evaluate(
        &scores,
        data.labels(),
        opts.bootstrap,
        seed::derive(opts.seed, "evaluate/bootstrap"),
    )?;
    save_report(&opts.out, &report).with_context(|| format!("writing {}", opts.out.display()))?;
    if let Some(roc) = &opts.roc {
        write_roc(roc, &report.roc_points)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Comparison {
    pub auc_a: f64,
    pub auc_b: f64,
    pub bootstrap_mean_a: f64,
    pub bootstrap_mean_b: f64,
    pub welch: WelchResult,
}

/// Welch test on the stored bootstrap AUC samples of two reports.
pub fn run_compare(report_a: &Path, report_b: &Path) -> Result<Comparison> {
    let a = load_report(report_a).with_context(|| format!("reading {}", report_a.display()))?;
    let b = load_report(report_b).with_context(|| format!("reading {}", report_b.display()))?;
    Ok(Comparison {
        auc_a: a.auc,
        auc_b: b.auc,
        bootstrap_mean_a: a.bootstrap.mean,
        bootstrap_mean_b: b.bootstrap.mean,
        welch: welch_test(&a.bootstrap.samples, &b.bootstrap.samples)?,
    })
}

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub benign: usize,
    pub malignant: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub jobs: usize,
    pub corpus: CorpusConfig,
}

impl SynthOptions {
    pub fn new(benign: usize, malignant: usize, out: impl Into<PathBuf>, seed: u64) -> Self {
        Self {
            benign,
            malignant,
            out: out.into(),
            seed,
            jobs: 1,
            corpus: CorpusConfig::default(),
        }
    }
}

/// Writes `<id>.nrrd` for every case plus `labels.csv`.
pub fn run_synth(opts: &SynthOptions) -> Result<Vec<LabelRecord>> {
    if opts.benign == 0 || opts.malignant == 0 {
        bail!("both class counts must be at least 1");
    }
    std::fs::create_dir_all(&opts.out).with_context(|| format!("creating {}", opts.out.display()))?;
    let plan = corpus_plan(opts.benign, opts.malignant);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs.max(1)).build()?;
    let records: Vec<Result<LabelRecord>> = pool.install(|| {
        plan.par_iter()
            .map(|(id, malignant, i)| {
                let case = make_case(*malignant, *i, &opts.corpus, opts.seed)?;
                write_nrrd(opts.out.join(format!("{id}.nrrd")), &case.grid, Encoding::Gzip)?;
                Ok(LabelRecord {
                    id: id.clone(),
                    label: case.label,
                    kind: case.spec.kind.name().to_string(),
                    seed: case.spec.seed,
                })
            })
            .collect()
    });
    let records: Vec<LabelRecord> = records.into_iter().collect::<Result<_>>()?;
    write_labels(opts.out.join("labels.csv"), &records)?;
    Ok(records)
}

/// Mesh and curvature of one mask, for inspection.
pub fn mesh_of(path: &Path, config: &PipelineConfig) -> Result<(TriangleMesh, CurvatureField)> {
    let grid = load_mask(path)?;
    let m = extract_morphomics_detailed(&grid, &HistogramSpec::default(), config)?;
    Ok((m.mesh, m.curvature))
}
