//! Per-pixel feature vectors from the scattering outputs of both acquisitions.

use std::fmt;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::ChangeMask;
use crate::grid::RealField;
use crate::scalar::Scalar;
use crate::scattering::{Path, ScatteringMaps};

/// Standard deviations are floored here so constant channels standardize to zero.
pub const STDDEV_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeTag {
    T1,
    T2,
}

impl fmt::Display for TimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeTag::T1 => "t1",
            TimeTag::T2 => "t2",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelLabel {
    pub time: TimeTag,
    pub path: Path,
}

impl fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.time, self.path)
    }
}

/// Row-major `pixel_count × feature_dim` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelFeatureMatrix<T> {
    pixel_count: usize,
    feature_dim: usize,
    values: Vec<T>,
    labels: Vec<ChannelLabel>,
}

impl<T: Scalar> PixelFeatureMatrix<T> {
    pub fn new(pixel_count: usize, labels: Vec<ChannelLabel>, values: Vec<T>) -> Result<Self> {
        let feature_dim = labels.len();
        if values.len() != pixel_count * feature_dim {
            return Err(Error::InvalidArgument(format!(
                "{} values for {pixel_count} rows of {feature_dim} features",
                values.len()
            )));
        }
        Ok(Self {
            pixel_count,
            feature_dim,
            values,
            labels,
        })
    }

    pub fn pixel_count(&self) -> usize {
        self.pixel_count
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn channel_labels(&self) -> &[ChannelLabel] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks(self.feature_dim.max(1))
    }

    /// Copies the selected rows into a new dense matrix.
    pub fn select_rows(&self, rows: &[usize]) -> Vec<Vec<T>> {
        rows.iter().map(|&r| self.row(r).to_vec()).collect()
    }
}

/// Concatenates `[S maps of I₁ at q ‖ S maps of I₂ at q]` for every pixel `q`.
pub fn assemble_features<T: Scalar>(
    s1: &ScatteringMaps<T>,
    s2: &ScatteringMaps<T>,
) -> Result<PixelFeatureMatrix<T>> {
    if s1.dims() != s2.dims() {
        return Err(Error::DimensionMismatch {
            expected: s1.dims(),
            got: s2.dims(),
        });
    }
    if s1.order() != s2.order() || !s1.paths().eq(s2.paths()) {
        return Err(Error::IncompatibleMaps("path sets differ between acquisitions".into()));
    }
    let paths: Vec<&Path> = s1.paths().collect();
    let maps: Vec<&RealField<T>> = paths
        .iter()
        .map(|p| &s1.s_maps()[*p])
        .chain(paths.iter().map(|p| &s2.s_maps()[*p]))
        .collect();
    let labels: Vec<ChannelLabel> = [TimeTag::T1, TimeTag::T2]
        .into_iter()
        .flat_map(|time| {
            paths.iter().map(move |p| ChannelLabel {
                time,
                path: (*p).clone(),
            })
        })
        .collect();

    let (w, h) = s1.dims();
    let pixel_count = w * h;
    let dim = maps.len();
    let mut values = vec![T::zero(); pixel_count * dim];
    values
        .par_chunks_mut(dim)
        .enumerate()
        .for_each(|(q, row)| {
            for (slot, m) in row.iter_mut().zip(&maps) {
                *slot = m.values()[q];
            }
        });
    PixelFeatureMatrix::new(pixel_count, labels, values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats<T> {
    pub means: Vec<T>,
    pub stddevs: Vec<T>,
}

/// Per-column mean and population standard deviation over `train_rows` only.
pub fn fit_standardization<T: Scalar>(
    features: &PixelFeatureMatrix<T>,
    train_rows: &[usize],
) -> Result<StandardizationStats<T>> {
    if train_rows.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if let Some(&r) = train_rows.iter().find(|&&r| r >= features.pixel_count) {
        return Err(Error::InvalidArgument(format!("training row {r} out of range")));
    }
    let dim = features.feature_dim;
    let n = T::from_usize_lossy(train_rows.len());
    let mut means = vec![T::zero(); dim];
    for &r in train_rows {
        for (m, &v) in means.iter_mut().zip(features.row(r)) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut vars = vec![T::zero(); dim];
    for &r in train_rows {
        for ((s, &v), &m) in vars.iter_mut().zip(features.row(r)).zip(&means) {
            let d = v - m;
            *s += d * d;
        }
    }
    let floor = T::lit(STDDEV_FLOOR);
    let stddevs = vars.into_iter().map(|s| (s / n).sqrt().max(floor)).collect();
    Ok(StandardizationStats { means, stddevs })
}

/// `(value − mean) / stddev` per column.
pub fn apply_standardization<T: Scalar>(
    features: &PixelFeatureMatrix<T>,
    stats: &StandardizationStats<T>,
) -> Result<PixelFeatureMatrix<T>> {
    let dim = features.feature_dim;
    if stats.means.len() != dim || stats.stddevs.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "standardization stats have {} columns, features have {dim}",
            stats.means.len()
        )));
    }
    let mut values = features.values.clone();
    values.par_chunks_mut(dim.max(1)).for_each(|row| {
        for ((v, &m), &s) in row.iter_mut().zip(&stats.means).zip(&stats.stddevs) {
            *v = (*v - m) / s;
        }
    });
    Ok(PixelFeatureMatrix {
        values,
        ..features.clone()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Changed,
    Unchanged,
}

impl ClassLabel {
    /// `+1` for changed, `−1` for unchanged.
    pub fn sign(&self) -> i8 {
        match self {
            ClassLabel::Changed => 1,
            ClassLabel::Unchanged => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub pixel_index: usize,
    pub label: ClassLabel,
}

/// A class that had fewer pixels than requested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortfall {
    pub label: ClassLabel,
    pub requested: usize,
    pub available: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingDraw {
    pub samples: Vec<LabeledSample>,
    pub shortfalls: Vec<Shortfall>,
}

impl TrainingDraw {
    pub fn count(&self, label: ClassLabel) -> usize {
        self.samples.iter().filter(|s| s.label == label).count()
    }

    pub fn rows(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.pixel_index).collect()
    }
}

/// Draws `total/2` changed and `total/2` unchanged pixels without replacement.
///
/// Changed samples come first. A class with fewer pixels than requested
/// contributes all of its pixels and is listed in `shortfalls`.
pub fn sample_training_pixels<T: Scalar>(
    ground_truth: &RealField<T>,
    total: usize,
    seed: u64,
) -> Result<TrainingDraw> {
    let mask = ChangeMask::from_field(ground_truth)?;
    sample_from_mask(&mask, total, seed)
}

pub fn sample_from_mask(mask: &ChangeMask, total: usize, seed: u64) -> Result<TrainingDraw> {
    if total == 0 || !total.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "training sample count must be positive and even, got {total}"
        )));
    }
    let per_class = total / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(total);
    let mut shortfalls = Vec::new();
    for label in [ClassLabel::Changed, ClassLabel::Unchanged] {
        let want = label == ClassLabel::Changed;
        let pool: Vec<usize> = mask
            .values()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == want)
            .map(|(i, _)| i)
            .collect();
        if pool.len() < per_class {
            shortfalls.push(Shortfall {
                label,
                requested: per_class,
                available: pool.len(),
            });
        }
        let take = per_class.min(pool.len());
        for i in index::sample(&mut rng, pool.len(), take) {
            samples.push(LabeledSample {
                pixel_index: pool[i],
                label,
            });
        }
    }
    Ok(TrainingDraw {
        samples,
        shortfalls,
    })
}
