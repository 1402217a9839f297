//! Filter bank → scattering of both acquisitions → per-pixel features →
//! SVM training on a balanced draw → classification of every pixel.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use ssn_core::eval::{confusion, metrics, ChangeMask, MetricsReport};
use ssn_core::features::{
    apply_standardization, assemble_features, fit_standardization, sample_from_mask, ClassLabel, Shortfall,
    StandardizationStats,
};
use ssn_core::scattering::scatter;
use ssn_core::stransform::build_filter_bank;
use ssn_core::svm::{predict, train_svm, SvmParams, TrainingSummary};
use ssn_core::{RealField64, SvmModel64};

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::io::write_mask;

/// Wall-clock seconds per stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub filter_bank: f64,
    pub scattering: f64,
    pub features: f64,
    pub training: f64,
    pub prediction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub changed: usize,
    pub unchanged: usize,
    pub shortfalls: Vec<Shortfall>,
    pub gamma: f64,
    pub support_vectors: usize,
    /// `None` when the draw held a single class and a constant model was used.
    pub solver: Option<TrainingSummary>,
    pub constant_model: Option<ClassLabel>,
}

#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub change_map: ChangeMask,
    pub metrics: MetricsReport,
    pub model: SvmModel64,
    pub standardization: StandardizationStats<f64>,
    pub feature_dim: usize,
    pub training: TrainingReport,
    pub timings: StageTimings,
}

/// Runs the detector on an in-memory pair. CT covers every stage and no file I/O.
pub fn run_pipeline(
    config: &PipelineConfig,
    image1: &RealField64,
    image2: &RealField64,
    truth: &ChangeMask,
) -> Result<PipelineOutcome> {
    config.validate()?;
    if image1.dims() != image2.dims() || image1.dims() != truth.dims() {
        return Err(CliError::Config(format!(
            "inputs are not coregistered: image1 {:?}, image2 {:?}, truth {:?}",
            image1.dims(),
            image2.dims(),
            truth.dims()
        )));
    }
    match config.threads {
        None => detect(config, image1, image2, truth),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(|| detect(config, image1, image2, truth)),
    }
}

fn detect(
    config: &PipelineConfig,
    image1: &RealField64,
    image2: &RealField64,
    truth: &ChangeMask,
) -> Result<PipelineOutcome> {
    let start = Instant::now();
    let mut timings = StageTimings::default();
    let (w, h) = image1.dims();

    let t = Instant::now();
    let bank = build_filter_bank(config.params()?, config.radial, config.rotations, w, h)?;
    timings.filter_bank = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (s1, s2) = rayon::join(
        || scatter(image1, &bank, config.order, config.rule),
        || scatter(image2, &bank, config.order, config.rule),
    );
    let (s1, s2) = (s1?, s2?);
    timings.scattering = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let raw = assemble_features(&s1, &s2)?;
    drop((s1, s2));
    let draw = sample_from_mask(truth, config.train_count, config.seed)?;
    let rows = draw.rows();
    let standardization = fit_standardization(&raw, &rows)?;
    let features = apply_standardization(&raw, &standardization)?;
    drop(raw);
    let dim = features.feature_dim();
    timings.features = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let gamma = config.svm_gamma.unwrap_or(1.0 / dim as f64);
    let x = features.select_rows(&rows);
    let y: Vec<i8> = draw.samples.iter().map(|s| s.label.sign()).collect();
    let (changed, unchanged) = (draw.count(ClassLabel::Changed), draw.count(ClassLabel::Unchanged));
    let (mut model, solver, constant_model) = if changed > 0 && unchanged > 0 {
        let params = SvmParams {
            tol: config.svm_tol,
            seed: config.seed,
            ..SvmParams::new(config.svm_c, gamma)
        };
        let (model, summary) = train_svm(&x, &y, &params)?;
        (model, Some(summary), None)
    } else {
        let label = if changed > 0 { ClassLabel::Changed } else { ClassLabel::Unchanged };
        let model = SvmModel64::constant(dim, label.sign() as f64, gamma, config.svm_c);
        (model, None, Some(label))
    };
    model.feature_labels = features.channel_labels().iter().map(|l| l.to_string()).collect();
    timings.training = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let prediction = predict(&model, features.values())?;
    if let Some(i) = prediction.decisions.iter().position(|d| !d.is_finite()) {
        return Err(CliError::Numerical(format!("non-finite decision value at pixel {i}")));
    }
    let change_map = ChangeMask::new(w, h, prediction.labels.iter().map(|&l| l > 0).collect())?;
    timings.prediction = t.elapsed().as_secs_f64();

    let ct = start.elapsed().as_secs_f64();
    let metrics = metrics(&confusion(&change_map, truth)?, ct)?;
    Ok(PipelineOutcome {
        change_map,
        metrics,
        training: TrainingReport {
            changed,
            unchanged,
            shortfalls: draw.shortfalls,
            gamma,
            support_vectors: model.support_vectors.len(),
            solver,
            constant_model,
        },
        model,
        standardization,
        feature_dim: dim,
        timings,
    })
}

/// Flat metrics record with the configuration echoed alongside.
#[derive(Clone, Debug, Serialize)]
pub struct MetricsRecord {
    #[serde(flatten)]
    pub metrics: MetricsReport,
    #[serde(flatten)]
    pub config: PipelineConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InputEcho {
    pub image1: Option<PathBuf>,
    pub image2: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub width: usize,
    pub height: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputFiles {
    pub change_map: PathBuf,
    pub metrics: PathBuf,
    pub model: PathBuf,
    pub manifest: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: PipelineConfig,
    pub inputs: InputEcho,
    pub outputs: OutputFiles,
    pub feature_dim: usize,
    pub feature_labels: Vec<String>,
    pub standardization: StandardizationStats<f64>,
    pub training: TrainingReport,
    pub timings: StageTimings,
    pub metrics: MetricsReport,
}

pub fn output_files(out_dir: &Path, stem: &str) -> OutputFiles {
    OutputFiles {
        change_map: out_dir.join(format!("{stem}_changemap.png")),
        metrics: out_dir.join(format!("{stem}_metrics.json")),
        model: out_dir.join(format!("{stem}_model.bin")),
        manifest: out_dir.join(format!("{stem}_manifest.json")),
    }
}

pub fn write_json(path: &Path, value: &impl Serialize, pretty: bool) -> Result<()> {
    let mut text = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes change map, metrics, model and manifest; returns the manifest.
pub fn write_outputs(
    out_dir: &Path,
    stem: &str,
    config: &PipelineConfig,
    inputs: InputEcho,
    outcome: &PipelineOutcome,
) -> Result<Manifest> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let files = output_files(out_dir, stem);
    write_mask(&files.change_map, &outcome.change_map)?;
    write_json(
        &files.metrics,
        &MetricsRecord {
            metrics: outcome.metrics,
            config: config.clone(),
        },
        false,
    )?;
    let mut model_bytes = Vec::new();
    outcome.model.write_to(&mut model_bytes)?;
    fs::write(&files.model, model_bytes).map_err(|e| CliError::io(&files.model, e))?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        inputs,
        outputs: files.clone(),
        feature_dim: outcome.feature_dim,
        feature_labels: outcome.model.feature_labels.clone(),
        standardization: outcome.standardization.clone(),
        training: outcome.training.clone(),
        timings: outcome.timings,
        metrics: outcome.metrics,
    };
    write_json(&files.manifest, &manifest, true)?;
    Ok(manifest)
}
