//! 8-bit grayscale raster I/O (binary PGM and PNG).

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::str::FromStr;

use image::codecs::png::PngEncoder;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};
use serde::{Deserialize, Serialize};
use ssn_core::eval::ChangeMask;
use ssn_core::RealField64;

use crate::error::{CliError, Result};

/// Mapping from 8-bit gray levels to field values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preprocessing {
    /// `v / 255`
    #[default]
    Linear,
    /// `ln(1 + v) / ln(256)`
    Log,
}

impl Preprocessing {
    pub fn apply(self, v: u8) -> f64 {
        match self {
            Preprocessing::Linear => v as f64 / 255.0,
            Preprocessing::Log => (v as f64).ln_1p() / 256f64.ln(),
        }
    }
}

impl FromStr for Preprocessing {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Preprocessing::Linear),
            "log" => Ok(Preprocessing::Log),
            other => Err(format!("unknown preprocessing '{other}' (expected linear or log)")),
        }
    }
}

/// Raw 8-bit grayscale raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gray8 {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Gray8 {
    pub fn to_field(&self, preproc: Preprocessing) -> Result<RealField64> {
        let values = self.pixels.iter().map(|&v| preproc.apply(v)).collect();
        Ok(RealField64::new(self.width, self.height, values)?)
    }
}

fn image_error(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Image {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Reads a PGM or PNG file; anything but single-channel 8-bit data is rejected.
pub fn read_gray8(path: &Path) -> Result<Gray8> {
    let reader = ImageReader::open(path)
        .map_err(|e| CliError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| CliError::io(path, e))?;
    let decoded = reader.decode().map_err(|e| image_error(path, e.to_string()))?;
    match decoded {
        DynamicImage::ImageLuma8(img) => Ok(Gray8 {
            width: img.width() as usize,
            height: img.height() as usize,
            pixels: img.into_raw(),
        }),
        other => Err(image_error(
            path,
            format!("expected 8-bit grayscale, found {:?}", other.color()),
        )),
    }
}

pub fn read_image(path: &Path, preproc: Preprocessing) -> Result<RealField64> {
    read_gray8(path)?.to_field(preproc)
}

/// Reads a ground-truth raster; zero is unchanged, the single nonzero level is changed.
pub fn read_truth(path: &Path) -> Result<ChangeMask> {
    let raw = read_gray8(path)?;
    let field = RealField64::new(raw.width, raw.height, raw.pixels.iter().map(|&v| v as f64).collect())?;
    ChangeMask::from_field(&field).map_err(|e| image_error(path, e.to_string()))
}

/// Writes PNG, or binary PGM when the extension is `pgm`.
pub fn write_gray8(path: &Path, image: &Gray8) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let out = BufWriter::new(file);
    let (w, h) = (image.width as u32, image.height as u32);
    let is_pgm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let res = if is_pgm {
        PnmEncoder::new(out)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&image.pixels, w, h, ExtendedColorType::L8)
    } else {
        PngEncoder::new(out).write_image(&image.pixels, w, h, ExtendedColorType::L8)
    };
    res.map_err(|e| image_error(path, e.to_string()))
}

pub fn write_mask(path: &Path, mask: &ChangeMask) -> Result<()> {
    let (width, height) = mask.dims();
    write_gray8(
        path,
        &Gray8 {
            width,
            height,
            pixels: mask.to_bytes(),
        },
    )
}

/// Quantizes a field to 8 bits: values clamped to `[0, 1]`, scaled by 255 and rounded.
pub fn quantize(field: &RealField64) -> Gray8 {
    let (width, height) = field.dims();
    Gray8 {
        width,
        height,
        pixels: field
            .values()
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect(),
    }
}
