//! Resolved pipeline configuration.

use serde::{Deserialize, Serialize};
use ssn_core::scattering::PathRule;
use ssn_core::ParameterSet64;

use crate::error::{CliError, Result};
use crate::io::Preprocessing;

pub const MAX_ORDER: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Window parameters `(k, b, c)`.
    pub lambda: [f64; 3],
    #[serde(rename = "P")]
    pub radial: usize,
    #[serde(rename = "N")]
    pub rotations: usize,
    /// Number of propagation steps.
    pub order: usize,
    pub rule: PathRule,
    /// Total training pixels, half per class.
    pub train_count: usize,
    pub seed: u64,
    pub svm_c: f64,
    /// Defaults to `1 / feature_dim` when absent.
    pub svm_gamma: Option<f64>,
    pub svm_tol: f64,
    pub preproc: Preprocessing,
    /// Worker threads; the global pool when absent.
    pub threads: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            lambda: [2.62, 1.0, -0.98],
            radial: 3,
            rotations: 4,
            order: 3,
            rule: PathRule::FrequencyDecreasing,
            train_count: 6000,
            seed: 0,
            svm_c: 10.0,
            svm_gamma: None,
            svm_tol: 1e-3,
            preproc: Preprocessing::Linear,
            threads: None,
        }
    }
}

impl PipelineConfig {
    pub fn params(&self) -> Result<ParameterSet64> {
        let [k, b, c] = self.lambda;
        ParameterSet64::new(k, b, c).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let params = self.params()?;
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.radial == 0 || self.rotations == 0 {
            return bad(format!("P and N must be >= 1 (P={}, N={})", self.radial, self.rotations));
        }
        if !(1..=MAX_ORDER).contains(&self.order) {
            return bad(format!("order must be in 1..={MAX_ORDER}, got {}", self.order));
        }
        if self.train_count == 0 || !self.train_count.is_multiple_of(2) {
            return bad(format!("train_count must be positive and even, got {}", self.train_count));
        }
        if !(self.svm_c.is_finite() && self.svm_c > 0.0) {
            return bad(format!("svm_c must be positive, got {}", self.svm_c));
        }
        if let Some(g) = self.svm_gamma {
            if !(g.is_finite() && g > 0.0) {
                return bad(format!("svm_gamma must be positive, got {g}"));
            }
        }
        if !(self.svm_tol.is_finite() && self.svm_tol > 0.0) {
            return bad(format!("svm_tol must be positive, got {}", self.svm_tol));
        }
        if self.threads == Some(0) {
            return bad("threads must be >= 1".into());
        }
        if params.width_factor(0.0) == 0.0 {
            return bad("c = 0 gives a degenerate lowpass window".into());
        }
        Ok(())
    }
}

/// Parses `k,b,c`.
pub fn parse_lambda(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected k,b,c, got '{s}'"));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("'{p}' is not a number"))?;
    }
    Ok(out)
}
