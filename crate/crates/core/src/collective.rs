//! Iterative collective prediction.
//!
//! Iteration 0 fits the base classifier on `X` alone and seeds the test
//! labels. Every later iteration freezes the current labels, recomputes all
//! meta-path features from that snapshot, fits a fresh classifier on
//! `[X, Z]` and replaces every test label at once.

use std::time::{Duration, Instant};

use log::{debug, warn};
use ndarray::{concatenate, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::classify::{self, ClassifierSpec, TrainedModel};
use crate::error::{Error, Result};
use crate::eval::{metrics, Metrics};
use crate::features::{compute_all_features, FeatureOptions};
use crate::hin::LabelState;
use crate::metapath::MetaPaths;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    pub max_iterations: usize,
    /// Stop once fewer than this fraction of test labels change.
    pub early_stop_fraction: f64,
    pub classifier: ClassifierSpec,
    pub features: FeatureOptions,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            max_iterations: 10,
            early_stop_fraction: 0.001,
            classifier: ClassifierSpec::random_forest(),
            features: FeatureOptions::default(),
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::ConfigInvalid("max_iterations must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.early_stop_fraction) {
            return Err(Error::ConfigInvalid(format!(
                "early_stop_fraction {} outside [0, 1)",
                self.early_stop_fraction
            )));
        }
        self.classifier.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct IterationRecord<T> {
    pub iteration: usize,
    pub test_predictions: Vec<u8>,
    pub test_probabilities: Vec<T>,
    /// Fraction of test labels that differ from the previous iteration.
    pub change_fraction: Option<f64>,
    pub metrics: Option<Metrics>,
}

/// Entry 0 is the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct LoopHistory<T> {
    pub iterations: Vec<IterationRecord<T>>,
    /// Iteration at which the change fraction first fell below the threshold.
    pub converged_at: Option<usize>,
}

impl<T> LoopHistory<T> {
    pub fn baseline(&self) -> &IterationRecord<T> {
        &self.iterations[0]
    }

    pub fn last(&self) -> &IterationRecord<T> {
        self.iterations.last().expect("history holds the baseline")
    }
}

/// Wall-clock spent per phase of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseTimes {
    pub features: Duration,
    pub fit: Duration,
    pub predict: Duration,
}

#[derive(Debug, Clone)]
pub struct LoopOutcome<T> {
    pub history: LoopHistory<T>,
    pub labels: LabelState<T>,
    pub model: TrainedModel<T>,
    /// Meta-path features the final model was trained on.
    pub meta_features: Array2<T>,
    pub timings: Vec<PhaseTimes>,
}

/// Fraction of positions where the two label vectors disagree.
pub fn label_change_fraction(prev: &[u8], curr: &[u8]) -> Result<f64> {
    if prev.len() != curr.len() {
        return Err(Error::LengthMismatch { left: prev.len(), right: curr.len() });
    }
    if prev.is_empty() {
        return Ok(0.0);
    }
    let changed = prev.iter().zip(curr).filter(|(a, b)| a != b).count();
    Ok(changed as f64 / prev.len() as f64)
}

fn fit_and_predict<T: Scalar>(
    spec: &ClassifierSpec,
    x: ArrayView2<T>,
    labels: &LabelState<T>,
    times: &mut PhaseTimes,
) -> Result<(TrainedModel<T>, Vec<u8>, Vec<T>)> {
    let start = Instant::now();
    let x_train = x.select(Axis(0), labels.train_indices());
    let model = classify::fit(spec, x_train.view(), &labels.train_labels())?;
    times.fit += start.elapsed();
    let start = Instant::now();
    let x_test = x.select(Axis(0), labels.test_indices());
    let proba = model.predict_proba(x_test.view())?;
    let pred = classify::threshold_labels(&proba, T::of(spec.threshold));
    times.predict += start.elapsed();
    Ok((model, pred, proba))
}

/// Fits on the training rows of `x` alone and predicts the test rows.
pub fn run_baseline<T: Scalar>(
    x: ArrayView2<T>,
    labels: &LabelState<T>,
    spec: &ClassifierSpec,
) -> Result<(TrainedModel<T>, Vec<u8>, Vec<T>)> {
    if labels.test_indices().is_empty() {
        return Err(Error::EmptyTestSet);
    }
    fit_and_predict(spec, x, labels, &mut PhaseTimes::default())
}

fn record<T: Scalar>(
    iteration: usize,
    pred: Vec<u8>,
    proba: Vec<T>,
    prev: Option<&[u8]>,
    test_truth: Option<&[u8]>,
) -> Result<IterationRecord<T>> {
    let change_fraction = prev.map(|p| label_change_fraction(p, &pred)).transpose()?;
    let metrics = test_truth.map(|t| metrics(t, &pred)).transpose()?;
    Ok(IterationRecord { iteration, test_predictions: pred, test_probabilities: proba, change_fraction, metrics })
}

/// Runs the baseline and then up to `max_iterations` feature-augmented
/// rounds. `truth`, when given, covers all transactions and is used only
/// for the recorded metrics. `observe` sees the frozen label snapshot at the
/// start of each round.
pub fn run_collective<T: Scalar>(
    meta: &MetaPaths<T>,
    x: ArrayView2<T>,
    mut labels: LabelState<T>,
    config: &LoopConfig,
    truth: Option<&[u8]>,
    mut observe: impl FnMut(usize, &[T]),
) -> Result<LoopOutcome<T>> {
    config.validate()?;
    if labels.test_indices().is_empty() {
        return Err(Error::EmptyTestSet);
    }
    if x.nrows() != labels.len() {
        return Err(Error::LengthMismatch { left: x.nrows(), right: labels.len() });
    }
    if let Some(t) = truth {
        if t.len() != labels.len() {
            return Err(Error::LengthMismatch { left: t.len(), right: labels.len() });
        }
    }
    let test_truth: Option<Vec<u8>> = truth.map(|t| labels.test_indices().iter().map(|&i| t[i]).collect());
    let train_labels = labels.train_labels();
    let fallback = labels.train_prior();

    let mut timings = vec![PhaseTimes::default()];
    let (mut model, pred, proba) = fit_and_predict(&config.classifier, x, &labels, &mut timings[0])?;
    labels.set_test_predictions(&pred, &proba)?;
    let mut history = LoopHistory { iterations: vec![record(0, pred, proba, None, test_truth.as_deref())?], converged_at: None };
    let mut meta_features = Array2::zeros((labels.len(), meta.c()));

    for t in 1..=config.max_iterations {
        let mut times = PhaseTimes::default();
        let start = Instant::now();
        let snapshot = labels.snapshot(config.features.label_mode);
        observe(t, &snapshot);
        let z = compute_all_features(meta, &snapshot, fallback, config.features.self_exclusion)?;
        let xz = concatenate(Axis(1), &[x, z.view()]).expect("row counts agree");
        times.features = start.elapsed();
        let (m, pred, proba) = fit_and_predict(&config.classifier, xz.view(), &labels, &mut times)?;
        labels.set_test_predictions(&pred, &proba)?;
        assert_eq!(labels.train_labels(), train_labels, "train labels changed during iteration {t}");
        let rec = record(t, pred, proba, Some(&history.last().test_predictions), test_truth.as_deref())?;
        let change = rec.change_fraction.unwrap_or(0.0);
        debug!("iteration {t}: label change fraction {change:.5}");
        history.iterations.push(rec);
        timings.push(times);
        model = m;
        meta_features = z;
        if change < config.early_stop_fraction {
            history.converged_at = Some(t);
            break;
        }
    }
    if history.converged_at.is_none() {
        warn!(
            "labels still changing after {} iterations (last change fraction {:.5})",
            config.max_iterations,
            history.last().change_fraction.unwrap_or(0.0)
        );
    }
    Ok(LoopOutcome { history, labels, model, meta_features, timings })
}
