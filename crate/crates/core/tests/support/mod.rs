//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls the FFT, the analytic filter construction or the SMO
//! solver of the library; every oracle is a direct evaluation.

#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssn_core::grid::{ComplexField, RealField};
use ssn_core::Complex;

pub type C64 = Complex<f64>;

pub fn random_real(w: usize, h: usize, seed: u64) -> RealField<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RealField::from_fn(w, h, |_, _| rng.random_range(0.0..1.0)).unwrap()
}

pub fn random_complex(w: usize, h: usize, seed: u64) -> ComplexField<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexField::from_fn(w, h, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
    .unwrap()
}

/// O(n⁴) DFT; `sign = -1` forward, `+1` inverse (unnormalized).
pub fn naive_dft(values: &[C64], w: usize, h: usize, sign: f64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); w * h];
    for ky in 0..h {
        for kx in 0..w {
            let mut acc = C64::new(0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let ph = sign
                        * 2.0
                        * PI
                        * (((kx * x) % w) as f64 / w as f64 + ((ky * y) % h) as f64 / h as f64);
                    acc += values[y * w + x] * C64::from_polar(1.0, ph);
                }
            }
            out[ky * w + kx] = acc;
        }
    }
    out
}

pub fn naive_idft(values: &[C64], w: usize, h: usize) -> Vec<C64> {
    let n = (w * h) as f64;
    naive_dft(values, w, h, 1.0).into_iter().map(|v| v / n).collect()
}

/// Direct circular convolution `out(t) = Σ_τ h(τ) g(t − τ)`.
pub fn direct_circular_convolution(h: &[C64], g: &[C64], w: usize, hh: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); w * hh];
    for ty in 0..hh {
        for tx in 0..w {
            let mut acc = C64::new(0.0, 0.0);
            for sy in 0..hh {
                for sx in 0..w {
                    let gx = (tx + w - sx) % w;
                    let gy = (ty + hh - sy) % hh;
                    acc += h[sy * w + sx] * g[gy * w + gx];
                }
            }
            out[ty * w + tx] = acc;
        }
    }
    out
}

/// Sampled, periodized `(σ²/2π)·exp(−|t|²σ²/2)·exp(j2π(fx·tx/W + fy·ty/H))`.
///
/// `sigma` is the window width factor `|k·f^b + c|`; `(fx, fy)` the center
/// frequency in cycles per image extent.
pub fn periodized_kernel(w: usize, h: usize, sigma: f64, fx: f64, fy: f64) -> Vec<C64> {
    let reach = ((12.0 / sigma) / w.min(h) as f64).ceil() as i64 + 2;
    let mut out = vec![C64::new(0.0, 0.0); w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = C64::new(0.0, 0.0);
            for my in -reach..=reach {
                for mx in -reach..=reach {
                    let tx = x as f64 + (mx * w as i64) as f64;
                    let ty = y as f64 + (my * h as i64) as f64;
                    let env = sigma * sigma / (2.0 * PI) * (-(tx * tx + ty * ty) * sigma * sigma / 2.0).exp();
                    let ph = 2.0 * PI * (fx * tx / w as f64 + fy * ty / h as f64);
                    acc += C64::from_polar(env, ph);
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Spectrum of a rotated, dilated complex Gabor wavelet on an `n × n` grid.
///
/// Mother wavelet `ψ(u) = (1/2π)·exp(−|u|²/2)·exp(j2π·κ·u_x)` with
/// `κ = scale/n`; channel `(p, rot)` uses dilation `s = scale/p` and
/// `ψ_{p,rot}(t) = s⁻²·ψ(R_rot·t / s)` where `R_rot` rotates by `2π·rot/N`.
pub fn wavelet_spectrum(n: usize, scale: f64, p: usize, rot: usize, rotations: usize) -> Vec<C64> {
    let theta = 2.0 * PI * rot as f64 / rotations as f64;
    let (ct, st) = (theta.cos(), theta.sin());
    let s = scale / p as f64;
    let kappa = scale / n as f64;
    let reach = ((12.0 * s) / n as f64).ceil() as i64 + 2;
    let mut spatial = vec![C64::new(0.0, 0.0); n * n];
    for y in 0..n {
        for x in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for my in -reach..=reach {
                for mx in -reach..=reach {
                    let tx = x as f64 + (mx * n as i64) as f64;
                    let ty = y as f64 + (my * n as i64) as f64;
                    let ux = (ct * tx - st * ty) / s;
                    let uy = (st * tx + ct * ty) / s;
                    let mother = (1.0 / (2.0 * PI)) * (-(ux * ux + uy * uy) / 2.0).exp();
                    acc += C64::from_polar(mother / (s * s), 2.0 * PI * kappa * ux);
                }
            }
            spatial[y * n + x] = acc;
        }
    }
    naive_dft(&spatial, n, n, -1.0)
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff_real(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn gram(points: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|a| {
            points
                .iter()
                .map(|b| {
                    let d2: f64 = a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum();
                    (-gamma * d2).exp()
                })
                .collect()
        })
        .collect()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-13 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

pub fn dual_objective(alpha: &[f64], y: &[f64], k: &[Vec<f64>]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
        }
    }
    alpha.iter().sum::<f64>() - quad / 2.0
}

/// Exact maximum of the SVM dual by enumerating every assignment of each
/// multiplier to {0, C, free} and solving the equality-constrained
/// stationarity system on the free set.
pub fn brute_force_dual(points: &[Vec<f64>], labels: &[i8], c: f64, gamma: f64) -> (f64, Vec<f64>) {
    let n = points.len();
    let k = gram(points, gamma);
    let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let combos = 3usize.pow(n as u32);
    for code in 0..combos {
        let mut state = vec![0u8; n];
        let mut rem = code;
        for s in state.iter_mut() {
            *s = (rem % 3) as u8;
            rem /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        let fixed_sum: f64 = (0..n).filter(|&i| state[i] != 2).map(|i| y[i] * alpha[i]).sum();
        if free.is_empty() {
            if fixed_sum.abs() > 1e-12 {
                continue;
            }
        } else {
            // [Q_FF  y_F] [α_F]   [1 − Q_FB α_B]
            // [y_Fᵀ  0  ] [λ  ] = [−y_Bᵀ α_B   ]
            let m = free.len();
            let mut a = vec![vec![0.0; m + 1]; m + 1];
            let mut b = vec![0.0; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (cc, &j) in free.iter().enumerate() {
                    a[r][cc] = y[i] * y[j] * k[i][j];
                }
                a[r][m] = y[i];
                a[m][r] = y[i];
                let qb: f64 = (0..n)
                    .filter(|&j| state[j] != 2)
                    .map(|j| y[i] * y[j] * k[i][j] * alpha[j])
                    .sum();
                b[r] = 1.0 - qb;
            }
            b[m] = -fixed_sum;
            let Some(sol) = solve(a, b) else { continue };
            if sol[..m].iter().any(|&v| v < -1e-12 || v > c + 1e-12) {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r].clamp(0.0, c);
            }
        }
        let obj = dual_objective(&alpha, &y, &k);
        if obj > best.0 {
            best = (obj, alpha);
        }
    }
    best
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}
