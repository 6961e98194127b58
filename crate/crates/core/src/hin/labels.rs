use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

/// How the label vector is presented to feature computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    /// 0/1 labels; test entries are thresholded predictions.
    #[default]
    Hard,
    /// Test entries are predicted fraud probabilities.
    Soft,
}

/// Train ground truth plus the current test predictions.
///
/// Train entries are fixed at construction. Test entries start at 0 and are
/// replaced wholesale by [`LabelState::set_test_predictions`].
#[derive(Debug, Clone)]
pub struct LabelState<T> {
    y: Vec<u8>,
    mask: Vec<Split>,
    timestamps: Vec<i64>,
    proba: Vec<T>,
    train: Vec<usize>,
    test: Vec<usize>,
}

impl<T: Scalar> LabelState<T> {
    pub fn new(truth: &[u8], timestamps: &[i64], mask: &[Split]) -> Result<Self> {
        if truth.len() != mask.len() {
            return Err(Error::LengthMismatch { left: truth.len(), right: mask.len() });
        }
        if truth.len() != timestamps.len() {
            return Err(Error::LengthMismatch { left: truth.len(), right: timestamps.len() });
        }
        if let Some(bad) = truth.iter().find(|&&v| v > 1) {
            return Err(Error::ConfigInvalid(format!("label {bad} is not 0/1")));
        }
        let y: Vec<u8> = truth.iter().zip(mask).map(|(&v, &s)| if s == Split::Train { v } else { 0 }).collect();
        let proba = y.iter().map(|&v| T::of_usize(v as usize)).collect();
        let train = (0..mask.len()).filter(|&i| mask[i] == Split::Train).collect();
        let test = (0..mask.len()).filter(|&i| mask[i] == Split::Test).collect();
        Ok(LabelState { y, mask: mask.to_vec(), timestamps: timestamps.to_vec(), proba, train, test })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Hard labels: train truth and current test predictions.
    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn mask(&self) -> &[Split] {
        &self.mask
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn train_indices(&self) -> &[usize] {
        &self.train
    }

    pub fn test_indices(&self) -> &[usize] {
        &self.test
    }

    pub fn train_labels(&self) -> Vec<u8> {
        self.train.iter().map(|&i| self.y[i]).collect()
    }

    pub fn test_predictions(&self) -> Vec<u8> {
        self.test.iter().map(|&i| self.y[i]).collect()
    }

    pub fn test_probabilities(&self) -> Vec<T> {
        self.test.iter().map(|&i| self.proba[i]).collect()
    }

    /// Fraud rate of the training partition; 0 when there is no training data.
    pub fn train_prior(&self) -> T {
        if self.train.is_empty() {
            return T::zero();
        }
        let frauds = self.train.iter().filter(|&&i| self.y[i] == 1).count();
        T::of_usize(frauds) / T::of_usize(self.train.len())
    }

    /// Overwrites the test entries, in test-index order.
    pub fn set_test_predictions(&mut self, labels: &[u8], proba: &[T]) -> Result<()> {
        if labels.len() != self.test.len() {
            return Err(Error::LengthMismatch { left: labels.len(), right: self.test.len() });
        }
        if proba.len() != self.test.len() {
            return Err(Error::LengthMismatch { left: proba.len(), right: self.test.len() });
        }
        for (k, &i) in self.test.iter().enumerate() {
            self.y[i] = labels[k];
            self.proba[i] = proba[k];
        }
        Ok(())
    }

    /// Label vector over all transactions for feature computation.
    pub fn snapshot(&self, mode: LabelMode) -> Vec<T> {
        match mode {
            LabelMode::Hard => self.y.iter().map(|&v| T::of_usize(v as usize)).collect(),
            LabelMode::Soft => self.proba.clone(),
        }
    }
}
