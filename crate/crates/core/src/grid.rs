//! Real and complex rasters plus the 2-D DFT machinery used by every other module.
//!
//! Fields are stored row-major: the value at column `x`, row `y` lives at
//! index `y * width + x`. All convolutions downstream are circular, so shifts
//! and rotations here wrap around the image borders.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyField { width, height });
    }
    if width * height != len {
        return Err(Error::ValueCount {
            width,
            height,
            got: len,
        });
    }
    Ok(())
}

/// Real-valued image.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Scalar> RealField<T> {
    pub fn new(width: usize, height: usize, values: Vec<T>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, T::zero())
    }

    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    /// Wraps values produced internally by operations that preserve finiteness.
    pub(crate) fn from_raw(width: usize, height: usize, values: Vec<T>) -> Self {
        debug_assert_eq!(width * height, values.len());
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.values[y * self.width + x]
    }

    pub fn to_complex(&self) -> ComplexField<T> {
        ComplexField::from_raw(
            self.width,
            self.height,
            self.values.iter().map(|&v| Complex::new(v, T::zero())).collect(),
        )
    }

    /// Sum of squared values.
    pub fn energy(&self) -> T {
        self.values.iter().map(|&v| v * v).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dims(), other.dims());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }
}

/// Complex-valued image, used for spectra and filter responses.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField<T> {
    width: usize,
    height: usize,
    values: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexField<T> {
    pub fn new(width: usize, height: usize, values: Vec<Complex<T>>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    pub(crate) fn from_raw(width: usize, height: usize, values: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(width * height, values.len());
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn get(&self, x: usize, y: usize) -> Complex<T> {
        self.values[y * self.width + x]
    }

    pub fn re(&self) -> RealField<T> {
        RealField::from_raw(self.width, self.height, self.values.iter().map(|v| v.re).collect())
    }

    pub fn modulus(&self) -> RealField<T> {
        RealField::from_raw(self.width, self.height, self.values.iter().map(|v| v.norm()).collect())
    }

    pub fn max_abs_im(&self) -> T {
        self.values.iter().map(|v| v.im.abs()).fold(T::zero(), T::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dims(), other.dims());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }
}

/// Reusable row/column FFT plans for one image size.
#[derive(Clone)]
pub struct Fft2Plan<T: Scalar> {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<T>>,
    row_inv: Arc<dyn Fft<T>>,
    col_fwd: Arc<dyn Fft<T>>,
    col_inv: Arc<dyn Fft<T>>,
}

impl<T: Scalar> std::fmt::Debug for Fft2Plan<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2Plan")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish()
    }
}

impl<T: Scalar> Fft2Plan<T> {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyField { width, height });
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn check(&self, field: &ComplexField<T>) -> Result<()> {
        if field.dims() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                got: field.dims(),
            });
        }
        Ok(())
    }

    fn transform(&self, data: &mut [Complex<T>], rows: &dyn Fft<T>, cols: &dyn Fft<T>) {
        let (w, h) = (self.width, self.height);
        rows.process(data);
        let mut t = transpose(data, w, h);
        cols.process(&mut t);
        let back = transpose(&t, h, w);
        data.copy_from_slice(&back);
    }

    /// Unnormalized forward DFT, in place.
    pub fn forward_in_place(&self, data: &mut [Complex<T>]) {
        assert_eq!(data.len(), self.width * self.height);
        self.transform(data, self.row_fwd.as_ref(), self.col_fwd.as_ref());
    }

    /// Inverse DFT including the 1/(W·H) factor, in place.
    pub fn inverse_in_place(&self, data: &mut [Complex<T>]) {
        assert_eq!(data.len(), self.width * self.height);
        self.transform(data, self.row_inv.as_ref(), self.col_inv.as_ref());
        let scale = T::one() / T::from_usize_lossy(self.width * self.height);
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    pub fn forward(&self, field: &ComplexField<T>) -> Result<ComplexField<T>> {
        self.check(field)?;
        let mut data = field.values.clone();
        self.forward_in_place(&mut data);
        Ok(ComplexField::from_raw(self.width, self.height, data))
    }

    pub fn inverse(&self, field: &ComplexField<T>) -> Result<ComplexField<T>> {
        self.check(field)?;
        let mut data = field.values.clone();
        self.inverse_in_place(&mut data);
        Ok(ComplexField::from_raw(self.width, self.height, data))
    }
}

fn transpose<T: Copy>(data: &[T], w: usize, h: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(data.len());
    for x in 0..w {
        for y in 0..h {
            out.push(data[y * w + x]);
        }
    }
    out
}

/// Unnormalized forward 2-D DFT.
pub fn fft2<T: Scalar>(field: &ComplexField<T>) -> Result<ComplexField<T>> {
    Fft2Plan::new(field.width, field.height)?.forward(field)
}

/// Inverse 2-D DFT, normalized by 1/(W·H).
pub fn ifft2<T: Scalar>(field: &ComplexField<T>) -> Result<ComplexField<T>> {
    Fft2Plan::new(field.width, field.height)?.inverse(field)
}

/// Periodic shift: output(x, y) = input((x - dx) mod W, (y - dy) mod H).
pub fn circular_shift<T: Scalar>(field: &RealField<T>, dx: isize, dy: isize) -> RealField<T> {
    let (w, h) = field.dims();
    let sx = dx.rem_euclid(w as isize) as usize;
    let sy = dy.rem_euclid(h as isize) as usize;
    let mut out = Vec::with_capacity(field.len());
    for y in 0..h {
        let src_y = (y + h - sy) % h;
        for x in 0..w {
            let src_x = (x + w - sx) % w;
            out.push(field.values[src_y * w + src_x]);
        }
    }
    RealField::from_raw(w, h, out)
}

/// Quarter-turn rotation about the origin pixel on a periodic square grid.
///
/// With coordinates `(x, y)` the output is `input(y, -x mod W)`, i.e. the
/// image content is rotated by +90° in the (x, y) plane.
pub fn rotate_quarter_turn<T: Scalar>(field: &RealField<T>) -> Result<RealField<T>> {
    let (w, h) = field.dims();
    if w != h {
        return Err(Error::InvalidArgument(format!(
            "quarter-turn rotation requires a square grid, got {w}x{h}"
        )));
    }
    RealField::from_fn(w, h, |x, y| field.get(y, (w - x) % w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_complex(w: usize, h: usize, seed: u64) -> ComplexField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexField::from_fn(w, h, |_, _| {
            Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .unwrap()
    }

    fn random_real(w: usize, h: usize, seed: u64) -> RealField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RealField::from_fn(w, h, |_, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn impulse_spectrum_is_flat() {
        let f = ComplexField::from_fn(4, 4, |x, y| {
            if x == 0 && y == 0 {
                Complex::new(1.0, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        })
        .unwrap();
        let s = fft2(&f).unwrap();
        for v in s.values() {
            assert!((v - Complex::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_spectrum_is_dc_only() {
        let f = RealField::filled(4, 4, 1.0f64).unwrap().to_complex();
        let s = fft2(&f).unwrap();
        assert!((s.get(0, 0) - Complex::new(16.0, 0.0)).norm() < 1e-12);
        for (i, v) in s.values().iter().enumerate().skip(1) {
            assert!(v.norm() < 1e-12, "bin {i} = {v}");
        }
    }

    #[test]
    fn roundtrip_identity() {
        let x = random_complex(8, 8, 3);
        let back = ifft2(&fft2(&x).unwrap()).unwrap();
        assert!(back.max_abs_diff(&x) < 1e-12);
    }

    #[test]
    fn non_power_of_two_roundtrip() {
        let x = random_complex(291, 306, 11);
        let back = ifft2(&fft2(&x).unwrap()).unwrap();
        assert!(back.max_abs_diff(&x) < 1e-12);
    }

    #[test]
    fn fft_matches_naive_dft_on_odd_size() {
        let (w, h) = (5, 3);
        let x = random_complex(w, h, 5);
        let s = fft2(&x).unwrap();
        for ky in 0..h {
            for kx in 0..w {
                let mut acc = Complex::new(0.0, 0.0);
                for y in 0..h {
                    for x_ in 0..w {
                        let ph = -2.0 * std::f64::consts::PI
                            * ((kx * x_) as f64 / w as f64 + (ky * y) as f64 / h as f64);
                        acc += x.get(x_, y) * Complex::from_polar(1.0, ph);
                    }
                }
                assert!((acc - s.get(kx, ky)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn parseval() {
        let x = random_complex(12, 7, 9);
        let s = fft2(&x).unwrap();
        let e_space: f64 = x.values().iter().map(|v| v.norm_sqr()).sum();
        let e_freq: f64 = s.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / 84.0;
        assert!(((e_space - e_freq) / e_space).abs() < 1e-10);
    }

    #[test]
    fn linearity() {
        let x = random_complex(6, 10, 1);
        let y = random_complex(6, 10, 2);
        let (a, b) = (Complex::new(0.3, -1.2), Complex::new(-2.0, 0.5));
        let combo = ComplexField::new(
            6,
            10,
            x.values().iter().zip(y.values()).map(|(u, v)| a * u + b * v).collect(),
        )
        .unwrap();
        let lhs = fft2(&combo).unwrap();
        let fx = fft2(&x).unwrap();
        let fy = fft2(&y).unwrap();
        let rhs = ComplexField::new(
            6,
            10,
            fx.values().iter().zip(fy.values()).map(|(u, v)| a * u + b * v).collect(),
        )
        .unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn rejects_empty_and_bad_counts() {
        assert!(matches!(RealField::<f64>::new(0, 3, vec![]), Err(Error::EmptyField { .. })));
        assert!(matches!(RealField::new(2, 2, vec![1.0f64; 3]), Err(Error::ValueCount { .. })));
        assert!(matches!(RealField::new(1, 1, vec![f64::NAN]), Err(Error::NonFinite(0))));
        assert!(Fft2Plan::<f64>::new(0, 4).is_err());
    }

    #[test]
    fn shift_examples() {
        let x = random_real(4, 4, 7);
        assert_eq!(circular_shift(&x, 0, 0), x);
        assert_eq!(circular_shift(&x, 4, 4), x);
        let imp = RealField::from_fn(4, 4, |x, y| if x == 0 && y == 0 { 1.0f64 } else { 0.0 }).unwrap();
        let moved = circular_shift(&imp, 1, 2);
        assert_eq!(moved.get(1, 2), 1.0);
        assert_eq!(moved.values().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn shifts_compose_additively() {
        let x = random_real(5, 7, 13);
        let a = circular_shift(&circular_shift(&x, 2, -3), -7, 11);
        let b = circular_shift(&x, -5, 8);
        assert_eq!(a, b);
    }

    #[test]
    fn four_quarter_turns_are_identity() {
        let x = random_real(6, 6, 17);
        let mut r = x.clone();
        for _ in 0..4 {
            r = rotate_quarter_turn(&r).unwrap();
        }
        assert_eq!(r, x);
        assert!(rotate_quarter_turn(&random_real(4, 5, 1)).is_err());
    }

    #[test]
    fn f32_roundtrip() {
        let x = ComplexField::<f32>::from_fn(9, 4, |x, y| Complex::new(x as f32, y as f32 - 1.5)).unwrap();
        let back = ifft2(&fft2(&x).unwrap()).unwrap();
        assert!(back.max_abs_diff(&x) < 1e-4);
    }
}
