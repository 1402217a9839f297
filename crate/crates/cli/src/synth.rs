//! Writes a synthetic scene to disk as 8-bit rasters.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use ssn_core::datagen::{generate_scene, SceneSpec};

use crate::error::{CliError, Result};
use crate::io::{quantize, write_mask};
use crate::pipeline::write_json;

#[derive(Clone, Debug, Serialize)]
pub struct SynthFiles {
    pub image1: PathBuf,
    pub image2: PathBuf,
    pub truth: PathBuf,
    pub spec: PathBuf,
}

pub fn read_scene_spec(path: &Path) -> Result<SceneSpec> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Generates `spec` and writes `t1.png`, `t2.png`, `truth.png` and `scene.json` into `out_dir`.
pub fn write_scene(spec: &SceneSpec, out_dir: &Path) -> Result<SynthFiles> {
    let scene = generate_scene::<f64>(spec)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let files = SynthFiles {
        image1: out_dir.join("t1.png"),
        image2: out_dir.join("t2.png"),
        truth: out_dir.join("truth.png"),
        spec: out_dir.join("scene.json"),
    };
    crate::io::write_gray8(&files.image1, &quantize(&scene.image_t1))?;
    crate::io::write_gray8(&files.image2, &quantize(&scene.image_t2))?;
    write_mask(&files.truth, &scene.truth)?;
    write_json(&files.spec, spec, true)?;
    Ok(files)
}
