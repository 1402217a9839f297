//! Three-parameter Stockwell windows, directional kernels and the frequency-domain filter bank.
//!
//! Units: spatial offsets are in pixels, and a radial index `p` denotes a
//! carrier of `p` cycles per image extent along the reference axis `(1, 0)`.
//! The window width factor `k·f^b + c` is evaluated at the frequency
//! magnitude of the channel (`p` for bandpass, `0` for the lowpass) and acts
//! as the inverse spatial standard deviation of a normalized Gaussian along
//! each axis.
//!
//! Spectra are built analytically: the DFT of a sampled, periodized
//! modulated Gaussian is a sum of shifted Gaussians, one per alias.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Fft2Plan, RealField};
use crate::scalar::Scalar;

/// Window parameters `(k, b, c)`: width mode, width changing rate and the
/// ST/STFT tradeoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet<T> {
    pub k: T,
    pub b: T,
    pub c: T,
}

impl<T: Scalar> ParameterSet<T> {
    pub fn new(k: T, b: T, c: T) -> Result<Self> {
        if !(k.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidArgument("window parameters must be finite".into()));
        }
        if k < T::zero() {
            return Err(Error::InvalidArgument(format!("k must be >= 0, got {k}")));
        }
        Ok(Self { k, b, c })
    }

    /// Wavelet reduction `(1/a, 1, 0)` for scale `a`.
    pub fn wavelet(scale: T) -> Result<Self> {
        Self::new(T::one() / scale, T::one(), T::zero())
    }

    /// Fixed-width STFT reduction `(0, 1, c)`.
    pub fn stft(c: T) -> Result<Self> {
        Self::new(T::zero(), T::one(), c)
    }

    /// Signed width factor `k·f^b + c`. At `f = 0` the factor is `c` for any `b`.
    pub fn width_factor(&self, f: T) -> T {
        if f == T::zero() {
            self.c
        } else {
            self.k * f.abs().powf(self.b) + self.c
        }
    }

    fn checked_width(&self, f: T, channel: Option<ChannelIndex>) -> Result<T> {
        let s = self.width_factor(f).abs();
        if s == T::zero() || !s.is_finite() {
            return Err(Error::DegenerateWindow {
                frequency: f.as_f64(),
                channel,
            });
        }
        Ok(s)
    }
}

/// Gaussian amplitude `|k·f^b + c| / sqrt(2π)` of the window at frequency magnitude `f`.
pub fn window_amplitude<T: Scalar>(params: &ParameterSet<T>, f: T) -> Result<T> {
    let s = params.checked_width(f, None)?;
    Ok(s / T::lit((2.0 * PI).sqrt()))
}

/// Orientation channel `(p, n)`: radial frequency index and rotation index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChannelIndex {
    pub p: usize,
    pub n: usize,
}

impl ChannelIndex {
    pub fn new(p: usize, n: usize, rotations: usize) -> Result<Self> {
        let ch = Self { p, n };
        ch.validate(rotations)?;
        Ok(ch)
    }

    pub fn validate(&self, rotations: usize) -> Result<()> {
        if self.p == 0 || self.n == 0 || self.n > rotations {
            return Err(Error::InvalidChannel {
                p: self.p,
                n: self.n,
                rotations,
            });
        }
        Ok(())
    }

    /// Same radial index, rotation index advanced by `steps` (mod `N`).
    pub fn rotated(&self, steps: usize, rotations: usize) -> Self {
        Self {
            p: self.p,
            n: (self.n - 1 + steps) % rotations + 1,
        }
    }
}

impl fmt::Display for ChannelIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.n)
    }
}

/// All channels for `P` radial frequencies and `N` rotations, ordered by `p` then `n`.
pub fn channels(radial: usize, rotations: usize) -> Vec<ChannelIndex> {
    (1..=radial)
        .flat_map(|p| (1..=rotations).map(move |n| ChannelIndex { p, n }))
        .collect()
}

/// Returns `(cos θ, sin θ)` for `θ = 2πn/N`, exact at multiples of π/2.
fn angle<T: Scalar>(n: usize, rotations: usize) -> (T, T) {
    let n = n % rotations;
    if (4 * n).is_multiple_of(rotations) {
        let (c, s) = match (4 * n / rotations) % 4 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        };
        return (T::lit(c), T::lit(s));
    }
    let theta = 2.0 * PI * n as f64 / rotations as f64;
    (T::lit(theta.cos()), T::lit(theta.sin()))
}

/// Rotation `[[cos θ, -sin θ], [sin θ, cos θ]]` with `θ = 2πn/N`.
pub fn rotation_matrix<T: Scalar>(n: usize, rotations: usize) -> [[T; 2]; 2] {
    assert!(rotations >= 1, "rotation group needs at least one element");
    let (c, s) = angle::<T>(n, rotations);
    [[c, -s], [s, c]]
}

/// Center frequency `r_n⁻¹ · (p, 0)` in cycles per image extent, as `(fx, fy)`.
pub fn center_frequency<T: Scalar>(channel: ChannelIndex, rotations: usize) -> (T, T) {
    let (c, s) = angle::<T>(channel.n, rotations);
    let p = T::from_usize_lossy(channel.p);
    // r⁻¹ = rᵀ
    (c * p, -s * p)
}

/// DFT of the periodized samples of `sqrt(σ²/2π)·exp(-t²σ²/2)·exp(j2π·center·t/len)`.
///
/// By Poisson summation each bin is a sum of Gaussian aliases
/// `exp(-2π²(ν - ν₀ - l)²/σ²)` over integers `l`, with `ν = k/len`.
fn axis_spectrum<T: Scalar>(len: usize, center: T, sigma: T) -> Vec<T> {
    let sigma = sigma.as_f64();
    let nu0 = center.as_f64() / len as f64;
    // exp(-2π²L²/σ²) < 1e-20 beyond this many aliases
    let reach = (sigma * (46.0f64 / (2.0 * PI * PI)).sqrt()).ceil() as i64 + 1;
    let scale = -2.0 * PI * PI / (sigma * sigma);
    (0..len)
        .map(|k| {
            let d = k as f64 / len as f64 - nu0;
            let d = d - d.round();
            let mut acc = 0.0;
            for l in -reach..=reach {
                let u = d - l as f64;
                acc += (scale * u * u).exp();
            }
            T::lit(acc)
        })
        .collect()
}

fn separable_spectrum<T: Scalar>(
    width: usize,
    height: usize,
    center: (T, T),
    sigma: T,
) -> Result<ComplexField<T>> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyField { width, height });
    }
    let gx = axis_spectrum(width, center.0, sigma);
    let gy = axis_spectrum(height, center.1, sigma);
    let mut values = Vec::with_capacity(width * height);
    for vy in &gy {
        for vx in &gx {
            values.push(Complex::new(*vx * *vy, T::zero()));
        }
    }
    ComplexField::new(width, height, values)
}

/// Spectrum of the directional kernel for `channel`: a Gaussian bump of
/// width factor `|k·p^b + c|` centered at `r_n⁻¹·(p, 0)`.
pub fn directional_filter_spectrum<T: Scalar>(
    params: &ParameterSet<T>,
    channel: ChannelIndex,
    rotations: usize,
    width: usize,
    height: usize,
) -> Result<ComplexField<T>> {
    channel.validate(rotations)?;
    let sigma = params.checked_width(T::from_usize_lossy(channel.p), Some(channel))?;
    separable_spectrum(width, height, center_frequency(channel, rotations), sigma)
}

/// Spectrum of the unmodulated window at `f = 0` (width factor `|c|`).
pub fn lowpass_filter_spectrum<T: Scalar>(
    params: &ParameterSet<T>,
    width: usize,
    height: usize,
) -> Result<ComplexField<T>> {
    let sigma = params.checked_width(T::zero(), None)?;
    separable_spectrum(width, height, (T::zero(), T::zero()), sigma)
}

/// Bandpass spectra for every channel `(p, n)`, in channel order.
pub fn build_bandpass_filters<T: Scalar>(
    params: &ParameterSet<T>,
    radial: usize,
    rotations: usize,
    width: usize,
    height: usize,
) -> Result<Vec<(ChannelIndex, ComplexField<T>)>> {
    if radial == 0 || rotations == 0 {
        return Err(Error::InvalidArgument(format!(
            "bank needs P >= 1 and N >= 1, got P={radial}, N={rotations}"
        )));
    }
    channels(radial, rotations)
        .into_par_iter()
        .map(|ch| directional_filter_spectrum(params, ch, rotations, width, height).map(|s| (ch, s)))
        .collect()
}

/// Lowpass plus `P × N` directional bandpass spectra for one image size.
#[derive(Clone, Debug)]
pub struct FilterBank<T: Scalar> {
    params: ParameterSet<T>,
    radial: usize,
    rotations: usize,
    lowpass: ComplexField<T>,
    bandpass: Vec<(ChannelIndex, ComplexField<T>)>,
    plan: Fft2Plan<T>,
}

pub fn build_filter_bank<T: Scalar>(
    params: ParameterSet<T>,
    radial: usize,
    rotations: usize,
    width: usize,
    height: usize,
) -> Result<FilterBank<T>> {
    let bandpass = build_bandpass_filters(&params, radial, rotations, width, height)?;
    let lowpass = lowpass_filter_spectrum(&params, width, height)?;
    Ok(FilterBank {
        params,
        radial,
        rotations,
        lowpass,
        bandpass,
        plan: Fft2Plan::new(width, height)?,
    })
}

impl<T: Scalar> FilterBank<T> {
    pub fn params(&self) -> &ParameterSet<T> {
        &self.params
    }

    pub fn radial(&self) -> usize {
        self.radial
    }

    pub fn rotations(&self) -> usize {
        self.rotations
    }

    pub fn dims(&self) -> (usize, usize) {
        self.lowpass.dims()
    }

    pub fn lowpass(&self) -> &ComplexField<T> {
        &self.lowpass
    }

    pub fn bandpass(&self, channel: ChannelIndex) -> Option<&ComplexField<T>> {
        self.bandpass.iter().find(|(c, _)| *c == channel).map(|(_, f)| f)
    }

    pub fn bandpass_filters(&self) -> &[(ChannelIndex, ComplexField<T>)] {
        &self.bandpass
    }

    pub fn channels(&self) -> impl Iterator<Item = ChannelIndex> + '_ {
        self.bandpass.iter().map(|(c, _)| *c)
    }

    pub fn plan(&self) -> &Fft2Plan<T> {
        &self.plan
    }

    /// Largest summed squared bandpass gain over all frequency bins.
    pub fn frame_bound(&self) -> T {
        let n = self.lowpass.values().len();
        (0..n)
            .map(|i| {
                self.bandpass
                    .iter()
                    .map(|(_, f)| f.values()[i].norm_sqr())
                    .sum::<T>()
            })
            .fold(T::zero(), T::max)
    }

    /// Forward spectrum of a real field, checked against the bank size.
    pub fn spectrum_of(&self, field: &RealField<T>) -> Result<Vec<Complex<T>>> {
        if field.dims() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                got: field.dims(),
            });
        }
        let mut data: Vec<Complex<T>> = field
            .values()
            .iter()
            .map(|&v| Complex::new(v, T::zero()))
            .collect();
        self.plan.forward_in_place(&mut data);
        Ok(data)
    }

    /// `ifft2(spectrum ⊙ filter)` for a spectrum already produced by [`Self::spectrum_of`].
    pub fn apply_to_spectrum(&self, spectrum: &[Complex<T>], filter: &ComplexField<T>) -> ComplexField<T> {
        let mut data: Vec<Complex<T>> = spectrum
            .iter()
            .zip(filter.values())
            .map(|(a, b)| a * b)
            .collect();
        self.plan.inverse_in_place(&mut data);
        let (w, h) = self.dims();
        ComplexField::from_raw(w, h, data)
    }
}

/// Anything that can be fed to [`st_convolve`].
pub trait SpatialInput<T: Scalar> {
    fn dims(&self) -> (usize, usize);
    fn complex_values(&self) -> Vec<Complex<T>>;
}

impl<T: Scalar> SpatialInput<T> for RealField<T> {
    fn dims(&self) -> (usize, usize) {
        RealField::dims(self)
    }

    fn complex_values(&self) -> Vec<Complex<T>> {
        self.values().iter().map(|&v| Complex::new(v, T::zero())).collect()
    }
}

impl<T: Scalar> SpatialInput<T> for ComplexField<T> {
    fn dims(&self) -> (usize, usize) {
        ComplexField::dims(self)
    }

    fn complex_values(&self) -> Vec<Complex<T>> {
        self.values().to_vec()
    }
}

/// Circular convolution of `image` with the kernel whose spectrum is `filter`.
pub fn st_convolve<T: Scalar, I: SpatialInput<T>>(image: &I, filter: &ComplexField<T>) -> Result<ComplexField<T>> {
    if image.dims() != filter.dims() {
        return Err(Error::DimensionMismatch {
            expected: filter.dims(),
            got: image.dims(),
        });
    }
    let (w, h) = filter.dims();
    let plan = Fft2Plan::new(w, h)?;
    let mut data = image.complex_values();
    plan.forward_in_place(&mut data);
    for (v, g) in data.iter_mut().zip(filter.values()) {
        *v *= g;
    }
    plan.inverse_in_place(&mut data);
    Ok(ComplexField::from_raw(w, h, data))
}
