//! Full-batch gradient descent on the L2-regularized log-loss.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams { learning_rate: 0.1, epochs: 200, l2: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct LogisticModel<T> {
    pub weights: Vec<T>,
    pub bias: T,
}

#[inline]
pub fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

impl<T: Scalar> LogisticModel<T> {
    pub fn zeros(d: usize) -> Self {
        LogisticModel { weights: vec![T::zero(); d], bias: T::zero() }
    }

    #[inline]
    pub fn score(&self, row: impl IntoIterator<Item = T>) -> T {
        row.into_iter().zip(&self.weights).fold(self.bias, |acc, (x, &w)| acc + x * w)
    }

    pub fn predict_proba(&self, x: ArrayView2<T>) -> Vec<T> {
        x.rows().into_iter().map(|r| sigmoid(self.score(r.iter().copied()))).collect()
    }
}

/// Weighted mean log-loss plus `l2 / 2 · ‖w‖²` (bias unpenalized).
pub fn loss<T: Scalar>(model: &LogisticModel<T>, x: ArrayView2<T>, y: &[u8], sample_weight: &[T], l2: T) -> T {
    let n = T::of_usize(y.len());
    let eps = T::of(1e-15);
    let data: T = x
        .rows()
        .into_iter()
        .zip(y)
        .zip(sample_weight)
        .map(|((r, &yi), &w)| {
            let p = sigmoid(model.score(r.iter().copied()));
            let term = if yi == 1 { -(p.max(eps)).ln() } else { -((T::one() - p).max(eps)).ln() };
            w * term
        })
        .sum();
    let reg: T = model.weights.iter().map(|&w| w * w).sum();
    data / n + l2 * reg / T::of(2.0)
}

/// Gradient of [`loss`] with respect to `(weights, bias)`.
pub fn gradient<T: Scalar>(
    model: &LogisticModel<T>,
    x: ArrayView2<T>,
    y: &[u8],
    sample_weight: &[T],
    l2: T,
) -> (Vec<T>, T) {
    let n = T::of_usize(y.len());
    let mut gw = vec![T::zero(); model.weights.len()];
    let mut gb = T::zero();
    for ((r, &yi), &w) in x.rows().into_iter().zip(y).zip(sample_weight) {
        let p = sigmoid(model.score(r.iter().copied()));
        let err = w * (p - T::of_usize(yi as usize));
        gb += err;
        for (g, &xj) in gw.iter_mut().zip(r.iter()) {
            *g += err * xj;
        }
    }
    for (g, &wj) in gw.iter_mut().zip(&model.weights) {
        *g = *g / n + l2 * wj;
    }
    (gw, gb / n)
}

pub fn fit<T: Scalar>(params: &LogisticParams, x: ArrayView2<T>, y: &[u8], sample_weight: &[T]) -> LogisticModel<T> {
    let lr = T::of(params.learning_rate);
    let l2 = T::of(params.l2);
    let mut model = LogisticModel::zeros(x.ncols());
    for _ in 0..params.epochs {
        let (gw, gb) = gradient(&model, x, y, sample_weight, l2);
        for (w, g) in model.weights.iter_mut().zip(gw) {
            *w -= lr * g;
        }
        model.bias -= lr * gb;
    }
    model
}
