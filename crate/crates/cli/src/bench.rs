//! Parameter sweeps over one scene, one report row per configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ssn_core::datagen::{generate_scene, SceneSpec};
use ssn_core::eval::{render_table, ChangeMask, MetricsReport};
use ssn_core::RealField64;

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::io::{read_image, read_truth, Preprocessing};
use crate::pipeline::{run_pipeline, write_json, write_outputs, InputEcho};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub label: String,
    #[serde(flatten)]
    pub config: PipelineConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputFiles {
    pub image1: PathBuf,
    pub image2: PathBuf,
    pub truth: PathBuf,
}

/// Scene source for a sweep: image files or a synthetic scene (the default scene when neither is given).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Sweep {
    pub scene: Option<SceneSpec>,
    pub inputs: Option<InputFiles>,
    pub rows: Vec<SweepRow>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SweepFile {
    Rows(Vec<SweepRow>),
    Full(Sweep),
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub label: String,
    pub config: PipelineConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn read_sweep(path: &Path) -> Result<Sweep> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let parsed: SweepFile = serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let sweep = match parsed {
        SweepFile::Rows(rows) => Sweep {
            rows,
            ..Sweep::default()
        },
        SweepFile::Full(s) => s,
    };
    if sweep.scene.is_some() && sweep.inputs.is_some() {
        return Err(CliError::Config("sweep names both a scene and input files".into()));
    }
    Ok(sweep)
}

struct LoadedScene {
    image1: RealField64,
    image2: RealField64,
    truth: ChangeMask,
}

fn load(sweep: &Sweep, preproc: Preprocessing) -> Result<LoadedScene> {
    match &sweep.inputs {
        Some(files) => Ok(LoadedScene {
            image1: read_image(&files.image1, preproc)?,
            image2: read_image(&files.image2, preproc)?,
            truth: read_truth(&files.truth)?,
        }),
        None => {
            let scene = generate_scene::<f64>(&sweep.scene.clone().unwrap_or_default())?;
            Ok(LoadedScene {
                image1: scene.image_t1,
                image2: scene.image_t2,
                truth: scene.truth,
            })
        }
    }
}

/// File-name-safe form of a row label.
fn stem_for(label: &str, index: usize) -> String {
    let clean: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{index:02}_{clean}")
}

/// Runs every row in order; a failing row is recorded and the sweep continues.
pub fn run_benchmark(sweep: &Sweep, out_dir: Option<&Path>) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(sweep.rows.len());
    // synthetic scenes do not depend on preprocessing, so one load suffices
    let mut cached: Option<(Preprocessing, LoadedScene)> = None;
    for (i, row) in sweep.rows.iter().enumerate() {
        let result = (|| -> Result<MetricsReport> {
            row.config.validate()?;
            let stale = match &cached {
                Some((p, _)) => sweep.inputs.is_some() && *p != row.config.preproc,
                None => true,
            };
            if stale {
                cached = Some((row.config.preproc, load(sweep, row.config.preproc)?));
            }
            let scene = &cached.as_ref().expect("scene loaded above").1;
            let outcome = run_pipeline(&row.config, &scene.image1, &scene.image2, &scene.truth)?;
            if let Some(dir) = out_dir {
                let (width, height) = scene.image1.dims();
                let inputs = InputEcho {
                    image1: sweep.inputs.as_ref().map(|f| f.image1.clone()),
                    image2: sweep.inputs.as_ref().map(|f| f.image2.clone()),
                    truth: sweep.inputs.as_ref().map(|f| f.truth.clone()),
                    width,
                    height,
                };
                write_outputs(dir, &stem_for(&row.label, i), &row.config, inputs, &outcome)?;
            }
            Ok(outcome.metrics)
        })();
        rows.push(match result {
            Ok(m) => BenchRow {
                label: row.label.clone(),
                config: row.config.clone(),
                metrics: Some(m),
                error: None,
            },
            Err(e) => BenchRow {
                label: row.label.clone(),
                config: row.config.clone(),
                metrics: None,
                error: Some(e.to_string()),
            },
        });
    }
    Ok(rows)
}

/// Aligned table of successful rows followed by one line per failed row.
pub fn render_rows(rows: &[BenchRow]) -> String {
    let ok: Vec<(String, MetricsReport)> = rows
        .iter()
        .filter_map(|r| r.metrics.map(|m| (r.label.clone(), m)))
        .collect();
    let mut out = render_table(&ok);
    for r in rows {
        if let Some(e) = &r.error {
            out.push_str(&format!("{}: error: {e}\n", r.label));
        }
    }
    out
}

/// Writes `bench.json` and `bench.txt` into `out_dir`.
pub fn write_bench(out_dir: &Path, rows: &[BenchRow]) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    write_json(&out_dir.join("bench.json"), &rows, true)?;
    let txt = out_dir.join("bench.txt");
    fs::write(&txt, render_rows(rows)).map_err(|e| CliError::io(&txt, e))
}
