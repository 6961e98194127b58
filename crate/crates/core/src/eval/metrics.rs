use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_labels(y_true: &[u8], y_pred: &[u8]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::LengthMismatch { left: y_true.len(), right: y_pred.len() });
        }
        let mut c = Confusion::default();
        for (&t, &p) in y_true.iter().zip(y_pred) {
            match (t, p) {
                (1, 1) => c.tp += 1,
                (0, 1) => c.fp += 1,
                (1, 0) => c.fn_ += 1,
                _ => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Recall, precision, F-score and accuracy. Undefined ratios are 0.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub recall: f64,
    pub precision: f64,
    pub f_score: f64,
    pub accuracy: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_confusion(c: &Confusion) -> Self {
        let recall = ratio(c.tp, c.tp + c.fn_);
        let precision = ratio(c.tp, c.tp + c.fp);
        let f_score = if recall == 0.0 || precision == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics { recall, precision, f_score, accuracy: ratio(c.tp + c.tn, c.total()) }
    }

    pub fn get(&self, name: MetricName) -> f64 {
        match name {
            MetricName::Recall => self.recall,
            MetricName::Precision => self.precision,
            MetricName::FScore => self.f_score,
            MetricName::Accuracy => self.accuracy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricName {
    Recall,
    Precision,
    FScore,
    Accuracy,
}

impl MetricName {
    pub const ALL: [MetricName; 4] = [MetricName::Recall, MetricName::Precision, MetricName::FScore, MetricName::Accuracy];

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricName::Recall => "recall",
            MetricName::Precision => "precision",
            MetricName::FScore => "f_score",
            MetricName::Accuracy => "accuracy",
        }
    }
}

pub fn metrics(y_true: &[u8], y_pred: &[u8]) -> Result<Metrics> {
    Ok(Metrics::from_confusion(&Confusion::from_labels(y_true, y_pred)?))
}

/// Relative improvement over a baseline, in percent.
pub fn rela_impr(method: f64, baseline: f64) -> Result<f64> {
    if baseline <= 0.0 {
        return Err(Error::BaselineZero);
    }
    Ok((method / baseline - 1.0) * 100.0)
}
