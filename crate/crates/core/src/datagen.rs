//! Synthetic bitemporal scenes with L-look gamma speckle and a known change mask.
//!
//! Shapes are rasterized by pixel-center inclusion: pixel `(x, y)` belongs
//! to a shape when `(x + 0.5, y + 0.5)` lies inside it. Rectangles use
//! half-open extents so integer-aligned rectangles cover exactly `w × h`
//! pixels.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::ChangeMask;
use crate::grid::RealField;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChangeShape {
    Rect {
        center: [f64; 2],
        size: [f64; 2],
    },
    Disk {
        center: [f64; 2],
        radius: f64,
    },
}

impl ChangeShape {
    fn contains(&self, px: f64, py: f64) -> bool {
        match *self {
            ChangeShape::Rect { center, size } => {
                let (x0, y0) = (center[0] - size[0] / 2.0, center[1] - size[1] / 2.0);
                px >= x0 && px < x0 + size[0] && py >= y0 && py < y0 + size[1]
            }
            ChangeShape::Disk { center, radius } => {
                let (dx, dy) = (px - center[0], py - center[1]);
                dx * dx + dy * dy <= radius * radius
            }
        }
    }

    fn within(&self, width: f64, height: f64) -> bool {
        let (lo, hi) = match *self {
            ChangeShape::Rect { center, size } => {
                if size[0] <= 0.0 || size[1] <= 0.0 {
                    return false;
                }
                (
                    [center[0] - size[0] / 2.0, center[1] - size[1] / 2.0],
                    [center[0] + size[0] / 2.0, center[1] + size[1] / 2.0],
                )
            }
            ChangeShape::Disk { center, radius } => {
                if radius <= 0.0 {
                    return false;
                }
                (
                    [center[0] - radius, center[1] - radius],
                    [center[0] + radius, center[1] + radius],
                )
            }
        };
        lo[0] >= 0.0 && lo[1] >= 0.0 && hi[0] <= width && hi[1] <= height
    }

    pub fn area(&self) -> f64 {
        match *self {
            ChangeShape::Rect { size, .. } => size[0] * size[1],
            ChangeShape::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub background_level: f64,
    pub changed_level: f64,
    pub change_shapes: Vec<ChangeShape>,
    /// Number of looks; speckle variance is `1/looks`.
    pub looks: u32,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            width: 128,
            height: 128,
            background_level: 0.2,
            changed_level: 0.6,
            change_shapes: vec![ChangeShape::Rect {
                center: [64.0, 64.0],
                size: [40.0, 40.0],
            }],
            looks: 4,
            seed: 42,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidScene("empty image".into()));
        }
        if self.looks < 1 {
            return Err(Error::InvalidScene(format!("looks must be >= 1, got {}", self.looks)));
        }
        let levels_ok = |l: f64| l.is_finite() && l >= 0.0;
        if !levels_ok(self.background_level) || !levels_ok(self.changed_level) {
            return Err(Error::InvalidScene("levels must be finite and non-negative".into()));
        }
        if self.background_level == self.changed_level {
            return Err(Error::InvalidScene("background and changed levels must differ".into()));
        }
        for s in &self.change_shapes {
            if !s.within(self.width as f64, self.height as f64) {
                return Err(Error::InvalidScene(format!("shape {s:?} leaves the image")));
            }
        }
        Ok(())
    }

    pub fn truth_mask(&self) -> Result<ChangeMask> {
        let mut changed = Vec::with_capacity(self.width * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
                changed.push(self.change_shapes.iter().any(|s| s.contains(px, py)));
            }
        }
        ChangeMask::new(self.width, self.height, changed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene<T> {
    pub image_t1: RealField<T>,
    pub image_t2: RealField<T>,
    pub truth: ChangeMask,
}

/// Unit-mean gamma field with shape `looks`. Stream 0 and 1 of the seeded
/// generator feed the two acquisitions.
pub fn speckle_field<T: Scalar>(width: usize, height: usize, looks: u32, seed: u64, stream: u64) -> Result<RealField<T>> {
    let gamma = Gamma::new(looks as f64, 1.0 / looks as f64).map_err(|e| Error::InvalidScene(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let values = (0..width * height).map(|_| T::lit(gamma.sample(&mut rng))).collect();
    RealField::new(width, height, values)
}

pub fn generate_scene<T: Scalar>(spec: &SceneSpec) -> Result<Scene<T>> {
    spec.validate()?;
    let truth = spec.truth_mask()?;
    let (w, h) = (spec.width, spec.height);
    let bg = T::lit(spec.background_level);
    let ch = T::lit(spec.changed_level);
    let n1 = speckle_field::<T>(w, h, spec.looks, spec.seed, 0)?;
    let n2 = speckle_field::<T>(w, h, spec.looks, spec.seed, 1)?;
    let t1 = n1.values().iter().map(|&s| bg * s).collect();
    let t2 = n2
        .values()
        .iter()
        .zip(truth.values())
        .map(|(&s, &c)| if c { ch * s } else { bg * s })
        .collect();
    Ok(Scene {
        image_t1: RealField::new(w, h, t1)?,
        image_t2: RealField::new(w, h, t2)?,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_speckle_approaches_clean_levels() {
        let spec = SceneSpec {
            looks: 1_000_000,
            ..SceneSpec::default()
        };
        let s = generate_scene::<f64>(&spec).unwrap();
        for (i, (&a, &b)) in s.image_t1.values().iter().zip(s.image_t2.values()).enumerate() {
            assert!((a / 0.2 - 1.0).abs() < 0.01);
            let clean = if s.truth.values()[i] { 0.6 } else { 0.2 };
            assert!((b / clean - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn no_shapes_means_no_change() {
        let spec = SceneSpec {
            change_shapes: vec![],
            ..SceneSpec::default()
        };
        let s = generate_scene::<f64>(&spec).unwrap();
        assert_eq!(s.truth.changed_count(), 0);
    }

    #[test]
    fn speckle_moments() {
        let f = speckle_field::<f64>(256, 256, 4, 9, 0).unwrap();
        let n = f.len() as f64;
        let mean = f.values().iter().sum::<f64>() / n;
        let var = f.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!((0.99..=1.01).contains(&mean), "mean {mean}");
        assert!((0.24..=0.26).contains(&var), "var {var}");
    }

    #[test]
    fn seeded_and_streams_independent() {
        let spec = SceneSpec::default();
        let a = generate_scene::<f64>(&spec).unwrap();
        assert_eq!(a, generate_scene::<f64>(&spec).unwrap());
        assert_ne!(a.image_t1, generate_scene::<f64>(&SceneSpec { seed: 43, ..spec }).unwrap().image_t1);
    }

    #[test]
    fn zero_background_stays_zero() {
        let spec = SceneSpec {
            background_level: 0.0,
            ..SceneSpec::default()
        };
        let s = generate_scene::<f64>(&spec).unwrap();
        for (i, &c) in s.truth.values().iter().enumerate() {
            if !c {
                assert_eq!(s.image_t1.values()[i], 0.0);
                assert_eq!(s.image_t2.values()[i], 0.0);
            }
        }
    }

    #[test]
    fn rect_area_is_exact() {
        let spec = SceneSpec {
            change_shapes: vec![
                ChangeShape::Rect {
                    center: [20.0, 30.0],
                    size: [10.0, 6.0],
                },
                ChangeShape::Rect {
                    center: [90.5, 70.5],
                    size: [7.0, 9.0],
                },
            ],
            ..SceneSpec::default()
        };
        let area: f64 = spec.change_shapes.iter().map(|s| s.area()).sum();
        assert_eq!(spec.truth_mask().unwrap().changed_count() as f64, area);
        assert_eq!(SceneSpec::default().truth_mask().unwrap().changed_count(), 1600);
    }

    #[test]
    fn disk_area_close_to_analytic() {
        let spec = SceneSpec {
            change_shapes: vec![ChangeShape::Disk {
                center: [64.0, 64.0],
                radius: 30.0,
            }],
            ..SceneSpec::default()
        };
        let got = spec.truth_mask().unwrap().changed_count() as f64;
        assert!((got / spec.change_shapes[0].area() - 1.0).abs() < 0.01);
    }

    #[test]
    fn invalid_specs_rejected() {
        let bad = |s: SceneSpec| assert!(generate_scene::<f64>(&s).is_err());
        bad(SceneSpec { looks: 0, ..SceneSpec::default() });
        bad(SceneSpec { changed_level: 0.2, ..SceneSpec::default() });
        bad(SceneSpec { width: 0, ..SceneSpec::default() });
        bad(SceneSpec {
            change_shapes: vec![ChangeShape::Disk { center: [5.0, 5.0], radius: 10.0 }],
            ..SceneSpec::default()
        });
    }
}
