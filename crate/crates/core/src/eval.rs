//! Confusion counts and the change-detection scores FP, FN, OE, PCC and KC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RealField;
use crate::scalar::Scalar;

/// Binary change map: `true` = changed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChangeMask {
    width: usize,
    height: usize,
    changed: Vec<bool>,
}

impl ChangeMask {
    pub fn new(width: usize, height: usize, changed: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyField { width, height });
        }
        if changed.len() != width * height {
            return Err(Error::ValueCount {
                width,
                height,
                got: changed.len(),
            });
        }
        Ok(Self {
            width,
            height,
            changed,
        })
    }

    /// Accepts fields with at most one nonzero level (e.g. {0, 1} or {0, 255}).
    pub fn from_field<T: Scalar>(field: &RealField<T>) -> Result<Self> {
        let mut level: Option<T> = None;
        for (index, &v) in field.values().iter().enumerate() {
            if v == T::zero() {
                continue;
            }
            match level {
                None => level = Some(v),
                Some(l) if l == v => {}
                Some(_) => {
                    return Err(Error::NonBinary {
                        index,
                        value: v.as_f64(),
                    })
                }
            }
        }
        let (w, h) = field.dims();
        Self::new(w, h, field.values().iter().map(|&v| v != T::zero()).collect())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[bool] {
        &self.changed
    }

    pub fn changed_count(&self) -> usize {
        self.changed.iter().filter(|&&c| c).count()
    }

    /// 0 for unchanged, 255 for changed.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.changed.iter().map(|&c| if c { 255 } else { 0 }).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub r#fn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.r#fn
    }
}

pub fn confusion(predicted: &ChangeMask, truth: &ChangeMask) -> Result<ConfusionMatrix> {
    if predicted.dims() != truth.dims() {
        return Err(Error::DimensionMismatch {
            expected: truth.dims(),
            got: predicted.dims(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in predicted.values().iter().zip(truth.values()) {
        match (p, t) {
            (true, true) => cm.tp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.r#fn += 1,
        }
    }
    Ok(cm)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub fp: u64,
    pub r#fn: u64,
    pub oe: u64,
    /// Percent.
    pub pcc: f64,
    /// Percent; negative when agreement is worse than chance.
    pub kc: f64,
    pub ct_seconds: f64,
}

/// Computes OE, PCC and two-class Cohen's kappa from the counts.
pub fn metrics(cm: &ConfusionMatrix, ct_seconds: f64) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InvalidArgument("confusion matrix is empty".into()));
    }
    let n = total as f64;
    let (tp, tn, fp, fn_) = (cm.tp as f64, cm.tn as f64, cm.fp as f64, cm.r#fn as f64);
    let po = (tp + tn) / n;
    let pe = ((tp + fp) * (tp + fn_) + (tn + fn_) * (tn + fp)) / (n * n);
    let kc = if pe >= 1.0 {
        // only reachable when prediction and truth are the same single class
        if po >= 1.0 {
            100.0
        } else {
            0.0
        }
    } else {
        100.0 * (po - pe) / (1.0 - pe)
    };
    Ok(MetricsReport {
        fp: cm.fp,
        r#fn: cm.r#fn,
        oe: cm.fp + cm.r#fn,
        pcc: 100.0 * po,
        kc,
        ct_seconds,
    })
}

/// Aligned text table with one row per labelled report.
pub fn render_table(rows: &[(String, MetricsReport)]) -> String {
    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(6);
    let mut out = format!(
        "{:<label_w$}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}  {:>9}\n",
        "method", "FP", "FN", "OE", "PCC(%)", "KC(%)", "CT(s)"
    );
    for (label, m) in rows {
        out.push_str(&format!(
            "{:<label_w$}  {:>8}  {:>8}  {:>8}  {:>8.2}  {:>8.2}  {:>9.3}\n",
            label, m.fp, m.r#fn, m.oe, m.pcc, m.kc, m.ct_seconds
        ));
    }
    out
}
