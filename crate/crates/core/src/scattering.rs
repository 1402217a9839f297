//! Stockwell scattering network: cascaded filter/modulus propagation and lowpass outputs.
//!
//! Layer 0 holds the input image. Each propagation step convolves every
//! retained field with all admitted bandpass filters, keeps the modulus as
//! the next layer, and smooths the field itself with the lowpass to produce
//! its scattering output. The deepest layer is only smoothed. No spatial
//! subsampling is performed: every map keeps the input resolution.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RealField;
use crate::scalar::Scalar;
use crate::stransform::{channels, ChannelIndex, FilterBank};

/// Ordered sequence of channels. The empty path is the input itself.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Path(Vec<ChannelIndex>);

impl Path {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn new(channels: Vec<ChannelIndex>) -> Self {
        Self(channels)
    }

    pub fn channels(&self) -> &[ChannelIndex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<ChannelIndex> {
        self.0.last().copied()
    }

    pub fn extended(&self, ch: ChannelIndex) -> Self {
        let mut v = self.0.clone();
        v.push(ch);
        Self(v)
    }

    /// Shifts every rotation index by `steps` (mod `N`).
    pub fn rotated(&self, steps: usize, rotations: usize) -> Self {
        Self(self.0.iter().map(|c| c.rotated(steps, rotations)).collect())
    }
}

/// Shorter paths first, then lexicographic by `(p, n)`.
impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("()");
        }
        for c in &self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Which channel sequences are propagated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathRule {
    /// Every ordered sequence of channels.
    All,
    /// Radial index strictly decreasing along the path.
    #[default]
    #[serde(alias = "decreasing")]
    FrequencyDecreasing,
}

impl PathRule {
    pub fn admits(&self, path: &Path, next: ChannelIndex) -> bool {
        match self {
            PathRule::All => true,
            PathRule::FrequencyDecreasing => path.last().is_none_or(|last| next.p < last.p),
        }
    }
}

impl FromStr for PathRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(PathRule::All),
            "decreasing" | "frequency-decreasing" => Ok(PathRule::FrequencyDecreasing),
            _ => Err(Error::InvalidArgument(format!("unknown path rule {s:?}"))),
        }
    }
}

impl fmt::Display for PathRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathRule::All => "all",
            PathRule::FrequencyDecreasing => "frequency-decreasing",
        })
    }
}

/// All admitted paths of length `0..=max_len`, shortest first, lexicographic within a length.
pub fn enumerate_paths(radial: usize, rotations: usize, max_len: usize, rule: PathRule) -> Vec<Path> {
    let chans = channels(radial, rotations);
    let mut out = vec![Path::empty()];
    let mut frontier = vec![Path::empty()];
    for _ in 0..max_len {
        let next: Vec<Path> = frontier
            .iter()
            .flat_map(|path| {
                chans
                    .iter()
                    .filter(|&&c| rule.admits(path, c))
                    .map(|&c| path.extended(c))
                    .collect::<Vec<_>>()
            })
            .collect();
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Output of one propagation step.
#[derive(Clone, Debug)]
pub struct Propagation<T> {
    pub lowpass: RealField<T>,
    pub moduli: Vec<(ChannelIndex, RealField<T>)>,
}

fn propagate_selected<T: Scalar>(
    field: &RealField<T>,
    bank: &FilterBank<T>,
    select: impl Fn(ChannelIndex) -> bool,
) -> Result<Propagation<T>> {
    let spectrum = bank.spectrum_of(field)?;
    let low = bank.apply_to_spectrum(&spectrum, bank.lowpass());
    debug_assert!(
        low.max_abs_im() <= T::epsilon() * T::lit(1e4) * (T::one() + field.values().iter().fold(T::zero(), |m, v| m.max(v.abs()))),
        "lowpass output has imaginary residue {}",
        low.max_abs_im()
    );
    let moduli = bank
        .bandpass_filters()
        .iter()
        .filter(|(c, _)| select(*c))
        .map(|(c, filt)| (*c, bank.apply_to_spectrum(&spectrum, filt).modulus()))
        .collect();
    Ok(Propagation {
        lowpass: low.re(),
        moduli,
    })
}

/// One scattering propagator step: lowpass average and the modulus of every bandpass response.
pub fn propagate<T: Scalar>(field: &RealField<T>, bank: &FilterBank<T>) -> Result<Propagation<T>> {
    propagate_selected(field, bank, |_| true)
}

/// Propagated modulus fields and smoothed outputs, keyed by path.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringMaps<T> {
    order: usize,
    rule: PathRule,
    u_maps: BTreeMap<Path, RealField<T>>,
    s_maps: BTreeMap<Path, RealField<T>>,
}

impl<T: Scalar> ScatteringMaps<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rule(&self) -> PathRule {
        self.rule
    }

    pub fn dims(&self) -> (usize, usize) {
        self.s_maps.values().next().map(|f| f.dims()).unwrap_or((0, 0))
    }

    /// Propagated fields `U[χ]` for paths shorter than `order`.
    pub fn u_maps(&self) -> &BTreeMap<Path, RealField<T>> {
        &self.u_maps
    }

    /// Scattering outputs `S[χ]` for every retained path up to length `order`.
    pub fn s_maps(&self) -> &BTreeMap<Path, RealField<T>> {
        &self.s_maps
    }

    pub fn s(&self, path: &Path) -> Option<&RealField<T>> {
        self.s_maps.get(path)
    }

    pub fn u(&self, path: &Path) -> Option<&RealField<T>> {
        self.u_maps.get(path)
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.s_maps.keys()
    }
}

/// Smoothed output of one node and its propagated children.
type LayerStep<T> = (Path, RealField<T>, Vec<(Path, RealField<T>)>);

/// Runs the network to depth `order` (number of propagation steps).
pub fn scatter<T: Scalar>(
    image: &RealField<T>,
    bank: &FilterBank<T>,
    order: usize,
    rule: PathRule,
) -> Result<ScatteringMaps<T>> {
    if order < 1 {
        return Err(Error::InvalidArgument("scattering order must be >= 1".into()));
    }
    if image.dims() != bank.dims() {
        return Err(Error::DimensionMismatch {
            expected: bank.dims(),
            got: image.dims(),
        });
    }
    let mut u_maps = BTreeMap::new();
    let mut s_maps = BTreeMap::new();
    let mut layer: Vec<(Path, RealField<T>)> = vec![(Path::empty(), image.clone())];

    for _ in 0..order {
        let results: Vec<Result<LayerStep<T>>> = layer
            .par_iter()
            .map(|(path, u)| {
                let prop = propagate_selected(u, bank, |c| rule.admits(path, c))?;
                let children = prop
                    .moduli
                    .into_iter()
                    .map(|(c, m)| (path.extended(c), m))
                    .collect();
                Ok((path.clone(), prop.lowpass, children))
            })
            .collect();
        let mut next = Vec::new();
        for ((path, u), res) in layer.into_iter().zip(results) {
            let (_, s, children) = res?;
            s_maps.insert(path.clone(), s);
            u_maps.insert(path, u);
            next.extend(children);
        }
        layer = next;
    }

    // deepest layer: smoothing only
    let finals: Vec<Result<(Path, RealField<T>)>> = layer
        .par_iter()
        .map(|(path, u)| {
            let spectrum = bank.spectrum_of(u)?;
            Ok((path.clone(), bank.apply_to_spectrum(&spectrum, bank.lowpass()).re()))
        })
        .collect();
    for r in finals {
        let (path, s) = r?;
        s_maps.insert(path, s);
    }

    Ok(ScatteringMaps {
        order,
        rule,
        u_maps,
        s_maps,
    })
}
