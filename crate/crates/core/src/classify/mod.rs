//! Pluggable base classifiers trained on `X` or `[X, Z]`.

pub mod forest;
pub mod logistic;

use std::path::Path;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

pub use forest::{ForestModel, ForestParams};
pub use logistic::{LogisticModel, LogisticParams};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Version tag written into model files.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierKind {
    LogisticRegression(LogisticParams),
    RandomForest(ForestParams),
}

impl ClassifierKind {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::LogisticRegression(_) => "logistic_regression",
            ClassifierKind::RandomForest(_) => "random_forest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    /// Probability at or above which a transaction is labelled fraud.
    pub threshold: f64,
    pub seed: u64,
    /// Reweight classes to equal total weight.
    #[serde(default)]
    pub class_weighting: bool,
}

impl ClassifierSpec {
    pub fn logistic() -> Self {
        ClassifierSpec {
            kind: ClassifierKind::LogisticRegression(LogisticParams::default()),
            threshold: 0.5,
            seed: 0,
            class_weighting: false,
        }
    }

    pub fn random_forest() -> Self {
        ClassifierSpec {
            kind: ClassifierKind::RandomForest(ForestParams::default()),
            threshold: 0.5,
            seed: 0,
            class_weighting: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::ConfigInvalid(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        match self.kind {
            ClassifierKind::LogisticRegression(p) if p.epochs == 0 => {
                Err(Error::ConfigInvalid("epochs must be at least 1".into()))
            }
            ClassifierKind::RandomForest(p) if p.n_trees == 0 => {
                Err(Error::ConfigInvalid("tree count must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound(deserialize = "T: Scalar"))]
pub enum ModelParams<T> {
    LogisticRegression(LogisticModel<T>),
    RandomForest(ForestModel<T>),
}

/// A fitted classifier. Immutable; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct TrainedModel<T> {
    pub format_version: u32,
    pub spec: ClassifierSpec,
    pub n_features: usize,
    pub params: ModelParams<T>,
}

fn check_finite<T: Scalar>(x: ArrayView2<T>) -> Result<()> {
    for ((row, col), v) in x.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFiniteFeature { row, col });
        }
    }
    Ok(())
}

/// Fits `spec` on the rows of `x` with 0/1 labels `y`.
pub fn fit<T: Scalar>(spec: &ClassifierSpec, x: ArrayView2<T>, y: &[u8]) -> Result<TrainedModel<T>> {
    spec.validate()?;
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch { left: x.nrows(), right: y.len() });
    }
    let positives = y.iter().filter(|&&v| v == 1).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::SingleClassTrainingSet);
    }
    check_finite(x)?;
    let class_weight = if spec.class_weighting {
        let n = y.len() as f64;
        [n / (2.0 * (y.len() - positives) as f64), n / (2.0 * positives as f64)]
    } else {
        [1.0, 1.0]
    };
    let params = match &spec.kind {
        ClassifierKind::LogisticRegression(p) => {
            let w: Vec<T> = y.iter().map(|&v| T::of(class_weight[v as usize])).collect();
            ModelParams::LogisticRegression(logistic::fit(p, x, y, &w))
        }
        ClassifierKind::RandomForest(p) => ModelParams::RandomForest(forest::fit(p, x, y, class_weight, spec.seed)),
    };
    Ok(TrainedModel { format_version: MODEL_FORMAT_VERSION, spec: *spec, n_features: x.ncols(), params })
}

impl<T: Scalar> TrainedModel<T> {
    pub fn predict_proba(&self, x: ArrayView2<T>) -> Result<Vec<T>> {
        if x.ncols() != self.n_features {
            return Err(Error::ShapeMismatch { expected: self.n_features, got: x.ncols() });
        }
        Ok(match &self.params {
            ModelParams::LogisticRegression(m) => m.predict_proba(x),
            ModelParams::RandomForest(m) => m.predict_proba(x),
        })
    }

    /// Labels at the spec's threshold.
    pub fn predict(&self, x: ArrayView2<T>) -> Result<Vec<u8>> {
        self.predict_labels(x, T::of(self.spec.threshold))
    }

    pub fn predict_labels(&self, x: ArrayView2<T>, threshold: T) -> Result<Vec<u8>> {
        Ok(threshold_labels(&self.predict_proba(x)?, threshold))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: TrainedModel<T> = serde_json::from_str(&text).map_err(|e| Error::Model(e.to_string()))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Model(format!("unsupported model format version {}", model.format_version)));
        }
        Ok(model)
    }
}

/// `1` iff `proba >= threshold`.
pub fn threshold_labels<T: Scalar>(proba: &[T], threshold: T) -> Vec<u8> {
    proba.iter().map(|&p| u8::from(p >= threshold)).collect()
}
