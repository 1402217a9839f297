//! Gaussian-kernel soft-margin SVM trained by sequential minimal optimization.
//!
//! The solver works on the dual
//!
//! ```text
//! max  Σ αᵢ − ½ Σᵢⱼ αᵢ αⱼ yᵢ yⱼ K(xᵢ, xⱼ)   s.t.  0 ≤ αᵢ ≤ C,  Σ yᵢ αᵢ = 0
//! ```
//!
//! choosing each pair by maximal violation for the first index and
//! second-order gain for the second. It stops once the largest KKT violation
//! gap drops below `tol`, which bounds `y·f(x)` on every training sample to
//! within `tol` of its KKT target.

use std::collections::{HashMap, VecDeque};
use std::io::{Read, Write};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MODEL_MAGIC: &[u8; 8] = b"SSNSVM\0\x01";
const CACHE_BYTES: usize = 512 << 20;

/// Squared-distance Gaussian kernel `exp(−γ‖x − y‖²)`.
pub fn rbf_kernel<T: Scalar>(x: &[T], y: &[T], gamma: T) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: (x.len(), 1),
            got: (y.len(), 1),
        });
    }
    Ok(rbf_unchecked(x, y, gamma))
}

#[inline]
fn rbf_unchecked<T: Scalar>(x: &[T], y: &[T], gamma: T) -> T {
    let d2: T = x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmParams<T> {
    /// Box constraint.
    pub c: T,
    pub gamma: T,
    /// Stopping tolerance on the KKT violation gap.
    pub tol: T,
    pub max_iterations: usize,
    /// Seeds the sample permutation used for tie-breaking in pair selection.
    pub seed: u64,
}

impl<T: Scalar> SvmParams<T> {
    pub fn new(c: T, gamma: T) -> Self {
        Self {
            c,
            gamma,
            tol: T::lit(1e-3),
            max_iterations: 10_000_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub iterations: usize,
    pub converged: bool,
    /// Final `max violation − min violation` gap.
    pub gap: f64,
}

/// Trained classifier. `alphas[i]` already carries the label sign.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmModel<T> {
    pub dim: usize,
    pub support_vectors: Vec<Vec<T>>,
    pub alphas: Vec<T>,
    pub bias: T,
    pub gamma: T,
    pub c: T,
    pub feature_labels: Vec<String>,
}

impl<T: Scalar> SvmModel<T> {
    /// A model without support vectors; predicts `sign(bias)` everywhere.
    pub fn constant(dim: usize, bias: T, gamma: T, c: T) -> Self {
        Self {
            dim,
            support_vectors: Vec::new(),
            alphas: Vec::new(),
            bias,
            gamma,
            c,
            feature_labels: Vec::new(),
        }
    }

    pub fn decision(&self, x: &[T]) -> T {
        self.support_vectors
            .iter()
            .zip(&self.alphas)
            .map(|(sv, &a)| a * rbf_unchecked(sv, x, self.gamma))
            .sum::<T>()
            + self.bias
    }

    /// Dual objective `Σ|aᵢ| − ½ Σᵢⱼ aᵢ aⱼ K(svᵢ, svⱼ)`.
    pub fn dual_objective(&self) -> T {
        let mut quad = T::zero();
        for (i, (si, &ai)) in self.support_vectors.iter().zip(&self.alphas).enumerate() {
            for (sj, &aj) in self.support_vectors.iter().zip(&self.alphas).skip(i) {
                let k = rbf_unchecked(si, sj, self.gamma);
                let term = ai * aj * k;
                quad += if std::ptr::eq(si, sj) { term } else { term + term };
            }
        }
        self.alphas.iter().map(|a| a.abs()).sum::<T>() - quad / T::lit(2.0)
    }
}

struct KernelCache<'a, T: Scalar> {
    data: &'a [Vec<T>],
    gamma: T,
    capacity: usize,
    rows: HashMap<usize, Arc<Vec<T>>>,
    order: VecDeque<usize>,
}

impl<'a, T: Scalar> KernelCache<'a, T> {
    fn new(data: &'a [Vec<T>], gamma: T) -> Self {
        let row_bytes = data.len().max(1) * std::mem::size_of::<T>();
        Self {
            data,
            gamma,
            capacity: (CACHE_BYTES / row_bytes).max(2),
            rows: HashMap::new(),
            order: VecDeque::new(),
        }
    }

    fn row(&mut self, i: usize) -> Arc<Vec<T>> {
        if let Some(r) = self.rows.get(&i) {
            return r.clone();
        }
        let xi = &self.data[i];
        let gamma = self.gamma;
        let row: Vec<T> = self
            .data
            .par_iter()
            .map(|xj| rbf_unchecked(xi, xj, gamma))
            .collect();
        let row = Arc::new(row);
        if self.rows.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.rows.remove(&old);
            }
        }
        self.rows.insert(i, row.clone());
        self.order.push_back(i);
        row
    }
}

/// Trains on `features` (one row per sample) with labels in `{−1, +1}`.
pub fn train_svm<T: Scalar>(
    features: &[Vec<T>],
    labels: &[i8],
    params: &SvmParams<T>,
) -> Result<(SvmModel<T>, TrainingSummary)> {
    let n = features.len();
    if labels.len() != n {
        return Err(Error::InvalidArgument(format!("{n} samples but {} labels", labels.len())));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    if !(params.c > T::zero() && params.gamma > T::zero() && params.tol > T::zero()) {
        return Err(Error::InvalidArgument("C, gamma and tol must be positive".into()));
    }
    let dim = features[0].len();
    for (i, row) in features.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: (dim, 1),
                got: (row.len(), 1),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
    }
    if labels.iter().any(|&y| y != 1 && y != -1) {
        return Err(Error::InvalidArgument("labels must be +1 or -1".into()));
    }
    if labels.iter().all(|&y| y == labels[0]) {
        return Err(Error::SingleClass);
    }

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));
    let data: Vec<Vec<T>> = perm.iter().map(|&i| features[i].clone()).collect();
    let y: Vec<T> = perm.iter().map(|&i| T::lit(labels[i] as f64)).collect();

    let c = params.c;
    let tau = T::lit(1e-12);
    let mut cache = KernelCache::new(&data, params.gamma);
    let mut alpha = vec![T::zero(); n];
    let mut grad = vec![-T::one(); n];
    let zero = T::zero();
    let in_up = |a: T, yt: T| (yt > zero && a < c) || (yt < zero && a > zero);
    let in_low = |a: T, yt: T| (yt < zero && a < c) || (yt > zero && a > zero);

    let mut iterations = 0;
    let mut gap = T::infinity();
    let mut converged = false;
    while iterations < params.max_iterations {
        // first index: maximal violation over I_up
        let mut gmax = T::neg_infinity();
        let mut i_sel = None;
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let mut gmin = T::infinity();
        for t in 0..n {
            if in_low(alpha[t], y[t]) {
                gmin = gmin.min(-y[t] * grad[t]);
            }
        }
        gap = gmax - gmin;
        let Some(i) = i_sel else {
            converged = true;
            break;
        };
        if gap < params.tol {
            converged = true;
            break;
        }

        // second index: largest second-order decrease over violating I_low
        let ki = cache.row(i);
        let mut best = T::infinity();
        let mut j_sel = None;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let b = gmax + y[t] * grad[t];
            if b > zero {
                let mut a = ki[i] + T::one() - (ki[t] + ki[t]);
                if a <= zero {
                    a = tau;
                }
                let obj = -(b * b) / a;
                if obj < best {
                    best = obj;
                    j_sel = Some(t);
                }
            }
        }
        let Some(j) = j_sel else {
            converged = true;
            break;
        };
        let kj = cache.row(j);

        let (ai_old, aj_old) = (alpha[i], alpha[j]);
        let mut quad = ki[i] + kj[j] - (ki[j] + ki[j]);
        if quad <= zero {
            quad = tau;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > zero {
                if alpha[j] < zero {
                    alpha[j] = zero;
                    alpha[i] = diff;
                }
            } else if alpha[i] < zero {
                alpha[i] = zero;
                alpha[j] = -diff;
            }
            if diff > zero {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < zero {
                    alpha[j] = zero;
                    alpha[i] = sum;
                }
                if alpha[i] < zero {
                    alpha[i] = zero;
                    alpha[j] = sum;
                }
            }
        }

        let di = alpha[i] - ai_old;
        let dj = alpha[j] - aj_old;
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
        iterations += 1;
    }

    // bias from free vectors, else the midpoint of the feasible interval
    let mut free_sum = T::zero();
    let mut free_count = 0usize;
    let mut ub = T::infinity();
    let mut lb = T::neg_infinity();
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < zero {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= zero {
            if y[t] > zero {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_count += 1;
            free_sum += yg;
        }
    }
    let rho = if free_count > 0 {
        free_sum / T::from_usize_lossy(free_count)
    } else {
        (ub + lb) / T::lit(2.0)
    };

    let mut support_vectors = Vec::new();
    let mut alphas = Vec::new();
    for t in 0..n {
        if alpha[t] > zero {
            support_vectors.push(data[t].clone());
            alphas.push(y[t] * alpha[t]);
        }
    }
    let model = SvmModel {
        dim,
        support_vectors,
        alphas,
        bias: -rho,
        gamma: params.gamma,
        c,
        feature_labels: Vec::new(),
    };
    Ok((
        model,
        TrainingSummary {
            iterations,
            converged,
            gap: gap.as_f64(),
        },
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction<T> {
    /// `+1` changed, `−1` unchanged; a zero decision maps to `+1`.
    pub labels: Vec<i8>,
    pub decisions: Vec<T>,
}

/// Classifies a row-major matrix with `model.dim` columns.
pub fn predict<T: Scalar>(model: &SvmModel<T>, features: &[T]) -> Result<Prediction<T>> {
    let dim = model.dim;
    if dim == 0 || !features.len().is_multiple_of(dim) {
        return Err(Error::DimensionMismatch {
            expected: (dim, 1),
            got: (features.len(), 1),
        });
    }
    let decisions: Vec<T> = features.par_chunks(dim).map(|row| model.decision(row)).collect();
    let labels = decisions
        .iter()
        .map(|&d| if d >= T::zero() { 1 } else { -1 })
        .collect();
    Ok(Prediction { labels, decisions })
}

fn put_u64(w: &mut impl Write, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_scalar<T: Scalar>(w: &mut impl Write, v: T) -> std::io::Result<()> {
    w.write_all(&v.as_f64().to_bits().to_le_bytes())
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_scalar<T: Scalar>(r: &mut impl Read) -> Result<T> {
    Ok(T::lit(f64::from_bits(get_u64(r)?)))
}

impl<T: Scalar> SvmModel<T> {
    /// Binary record: magic, scalar width, counts, `gamma`, `C`, bias,
    /// alphas, support vectors, then length-prefixed UTF-8 feature labels.
    /// All numbers are little-endian; scalars are stored as `f64` bit patterns.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MODEL_MAGIC)?;
        put_u64(w, std::mem::size_of::<T>() as u64)?;
        put_u64(w, self.support_vectors.len() as u64)?;
        put_u64(w, self.dim as u64)?;
        put_scalar(w, self.gamma)?;
        put_scalar(w, self.c)?;
        put_scalar(w, self.bias)?;
        for &a in &self.alphas {
            put_scalar(w, a)?;
        }
        for sv in &self.support_vectors {
            for &v in sv {
                put_scalar(w, v)?;
            }
        }
        put_u64(w, self.feature_labels.len() as u64)?;
        for l in &self.feature_labels {
            put_u64(w, l.len() as u64)?;
            w.write_all(l.as_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MODEL_MAGIC {
            return Err(Error::ModelFormat("bad magic".into()));
        }
        let width = get_u64(r)?;
        if width != std::mem::size_of::<T>() as u64 {
            return Err(Error::ModelFormat(format!(
                "model stores {width}-byte scalars, reader expects {}",
                std::mem::size_of::<T>()
            )));
        }
        let n_sv = get_u64(r)? as usize;
        let dim = get_u64(r)? as usize;
        let gamma = get_scalar(r)?;
        let c = get_scalar(r)?;
        let bias = get_scalar(r)?;
        let alphas = (0..n_sv).map(|_| get_scalar(r)).collect::<Result<Vec<T>>>()?;
        let support_vectors = (0..n_sv)
            .map(|_| (0..dim).map(|_| get_scalar(r)).collect::<Result<Vec<T>>>())
            .collect::<Result<Vec<_>>>()?;
        let n_labels = get_u64(r)? as usize;
        let mut feature_labels = Vec::with_capacity(n_labels);
        for _ in 0..n_labels {
            let len = get_u64(r)? as usize;
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf)?;
            feature_labels.push(String::from_utf8(buf).map_err(|e| Error::ModelFormat(e.to_string()))?);
        }
        Ok(Self {
            dim,
            support_vectors,
            alphas,
            bias,
            gamma,
            c,
            feature_labels,
        })
    }
}
