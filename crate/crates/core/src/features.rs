//! Meta-path label-aggregation features.
//!
//! A feature column is the weighted fraction of fraud labels among the
//! transactions a transaction reaches through the meta-path `P = P₁ × P₂ᵀ`.
//! The fast route never forms the `n × n` matrix `P`: it aggregates labels
//! at the shared end type (`P₂ᵀ y`, normalized per end node) and gathers the
//! result back through `P₁`. When `P₁` is simple this equals the literal
//! row-normalized `D P y`; when `P₁` is complex it is the end-node-normalized
//! variant, which weighs a shared rare end node above a popular one.
//!
//! Rows with no neighbours (zero weight) take a fallback value, normally the
//! training fraud rate.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hin::LabelMode;
use crate::metapath::{DownsizedPath, MetaPathPair, MetaPaths};
use crate::scalar::Scalar;

/// Default largest transaction count the dense oracle accepts.
pub const DEFAULT_ORACLE_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureOptions {
    /// Drop a transaction's own contribution from its feature.
    pub self_exclusion: bool,
    pub label_mode: LabelMode,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions { self_exclusion: true, label_mode: LabelMode::Hard }
    }
}

/// Per-row numerator and weight of a weighted label fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedFraction<T> {
    pub numerator: Vec<T>,
    pub weight: Vec<T>,
    /// Weight of each row before any correction, used to detect rows whose
    /// weight cancels to zero.
    scale: Vec<T>,
}

impl<T: Scalar> WeightedFraction<T> {
    /// `numerator / weight`, or `fallback` where the weight vanished.
    pub fn finish(&self, fallback: T) -> Vec<T> {
        self.numerator
            .iter()
            .zip(&self.weight)
            .zip(&self.scale)
            .map(|((&num, &w), &scale)| if vanished(w, scale) { fallback } else { num / w })
            .collect()
    }
}

/// Memory bookkeeping for one feature evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureStats {
    /// Largest number of intermediate entries held at once, excluding the
    /// input path matrices.
    pub peak_intermediate: usize,
}

fn check_pair<T: Scalar>(p1: &DownsizedPath<T>, p2: &DownsizedPath<T>, y: &[T]) -> Result<()> {
    if p1.trace.end_type() != p2.trace.end_type() || p1.matrix.ncols() != p2.matrix.ncols() {
        return Err(Error::EndTypeMismatch {
            left: format!("{:?}", p1.trace.end_type()),
            right: format!("{:?}", p2.trace.end_type()),
        });
    }
    if p1.matrix.nrows() != y.len() || p2.matrix.nrows() != y.len() {
        return Err(Error::LengthMismatch { left: p1.matrix.nrows(), right: y.len() });
    }
    Ok(())
}

/// End-node label mass `v = P₂ᵀ y` and end-node weight `s = 1ᵀ P₂`.
fn end_aggregates<T: Scalar>(p2: &DownsizedPath<T>, y: &[T]) -> (Vec<T>, Vec<T>) {
    (p2.matrix.transpose_mul_vec(y), p2.matrix.col_sums())
}

fn vanished<T: Scalar>(weight: T, scale: T) -> bool {
    weight <= T::zero() || weight <= T::epsilon() * T::of(64.0) * scale
}

/// Numerator and weight of row `i` before self correction.
#[inline]
fn row_fraction<T: Scalar>(p1: &DownsizedPath<T>, v: &[T], s: &[T], i: usize) -> (T, T) {
    let (cols, vals) = p1.matrix.row(i);
    if p1.is_simple {
        // One unit entry per row: the fraction is v_k / s_k, kept unreduced
        // so integer counts stay exact.
        return match cols.first() {
            Some(&k) => (v[k], s[k]),
            None => (T::zero(), T::zero()),
        };
    }
    let (mut num, mut w) = (T::zero(), T::zero());
    for (&k, &a) in cols.iter().zip(vals) {
        if s[k] > T::zero() {
            num += a * v[k] / s[k];
            w += a;
        }
    }
    (num, w)
}

/// Row `i`'s own weight `P[i,i]`, on the same scale as [`row_fraction`].
#[inline]
fn row_diagonal<T: Scalar>(p1: &DownsizedPath<T>, p2: &DownsizedPath<T>, s: &[T], i: usize) -> T {
    let (c1, v1) = p1.matrix.row(i);
    let (c2, v2) = p2.matrix.row(i);
    let mut diag = T::zero();
    let (mut a, mut b) = (0, 0);
    while a < c1.len() && b < c2.len() {
        match c1[a].cmp(&c2[b]) {
            std::cmp::Ordering::Less => a += 1,
            std::cmp::Ordering::Greater => b += 1,
            std::cmp::Ordering::Equal => {
                let k = c1[a];
                if p1.is_simple {
                    diag += v2[b];
                } else if s[k] > T::zero() {
                    diag += v1[a] * v2[b] / s[k];
                }
                a += 1;
                b += 1;
            }
        }
    }
    diag
}

/// Decomposed numerator and weight for every row, without self correction.
pub fn weighted_fraction_fast<T: Scalar>(
    p1: &DownsizedPath<T>,
    p2: &DownsizedPath<T>,
    y: &[T],
) -> Result<WeightedFraction<T>> {
    check_pair(p1, p2, y)?;
    let (v, s) = end_aggregates(p2, y);
    let (numerator, weight): (Vec<T>, Vec<T>) = (0..y.len()).map(|i| row_fraction(p1, &v, &s, i)).unzip();
    let scale = weight.clone();
    Ok(WeightedFraction { numerator, weight, scale })
}

/// Removes each row's own contribution `P[i,i] = Σₖ P₁[i,k] P₂[i,k] / s_k`
/// from numerator and weight (a row-wise sparse dot product).
pub fn self_exclusion<T: Scalar>(p1: &DownsizedPath<T>, p2: &DownsizedPath<T>, y: &[T], wf: &mut WeightedFraction<T>) {
    let s = p2.matrix.col_sums();
    for i in 0..y.len() {
        let diag = row_diagonal(p1, p2, &s, i);
        wf.numerator[i] -= diag * y[i];
        wf.weight[i] -= diag;
    }
}

/// One meta-path feature column through the decomposed route.
pub fn feature_fast<T: Scalar>(
    p1: &DownsizedPath<T>,
    p2: &DownsizedPath<T>,
    y: &[T],
    fallback: T,
    exclude_self: bool,
) -> Result<Vec<T>> {
    Ok(feature_fast_with_stats(p1, p2, y, fallback, exclude_self)?.0)
}

/// [`feature_fast`] plus its intermediate footprint: the two end-type
/// aggregates and the output column.
pub fn feature_fast_with_stats<T: Scalar>(
    p1: &DownsizedPath<T>,
    p2: &DownsizedPath<T>,
    y: &[T],
    fallback: T,
    exclude_self: bool,
) -> Result<(Vec<T>, FeatureStats)> {
    check_pair(p1, p2, y)?;
    let (v, s) = end_aggregates(p2, y);
    let z: Vec<T> = (0..y.len())
        .map(|i| {
            let (mut num, mut w) = row_fraction(p1, &v, &s, i);
            let scale = w;
            if exclude_self {
                let diag = row_diagonal(p1, p2, &s, i);
                num -= diag * y[i];
                w -= diag;
            }
            if vanished(w, scale) {
                fallback
            } else {
                num / w
            }
        })
        .collect();
    let stats = FeatureStats { peak_intermediate: v.len() + s.len() + z.len() };
    Ok((z, stats))
}

/// Reference route: materializes `P = P₁ P₂ᵀ` as a dense `n × n` array and
/// row-normalizes it against `y`. Refuses inputs above `cap` transactions.
pub fn feature_dense_oracle<T: Scalar>(
    p1: &DownsizedPath<T>,
    p2: &DownsizedPath<T>,
    y: &[T],
    fallback: T,
    exclude_self: bool,
    cap: usize,
) -> Result<Vec<T>> {
    check_pair(p1, p2, y)?;
    let n = y.len();
    if n > cap {
        return Err(Error::OracleCapExceeded { size: n, cap });
    }
    let full = dense_product(p1.matrix.to_dense().view(), p2.matrix.to_dense().view());
    Ok(row_normalized_apply(&full, y, fallback, exclude_self))
}

fn dense_product<T: Scalar>(a: ArrayView2<T>, b: ArrayView2<T>) -> Array2<T> {
    let (n, k) = a.dim();
    let m = b.nrows();
    let mut out = Array2::zeros((n, m));
    for i in 0..n {
        for kk in 0..k {
            let aik = a[[i, kk]];
            if aik == T::zero() {
                continue;
            }
            for j in 0..m {
                out[[i, j]] += aik * b[[j, kk]];
            }
        }
    }
    out
}

/// `z_i = Σⱼ P[i,j] yⱼ / Σⱼ P[i,j]`, optionally skipping `j = i`.
pub(crate) fn row_normalized_apply<T: Scalar>(p: &Array2<T>, y: &[T], fallback: T, exclude_self: bool) -> Vec<T> {
    p.axis_iter(Axis(0))
        .enumerate()
        .map(|(i, row)| {
            let (mut num, mut den) = (T::zero(), T::zero());
            for (j, &w) in row.iter().enumerate() {
                if exclude_self && j == i {
                    continue;
                }
                num += w * y[j];
                den += w;
            }
            if den > T::zero() {
                num / den
            } else {
                fallback
            }
        })
        .collect()
}

/// One column per pair, in pair order. Columns are computed in parallel from
/// the same frozen label vector.
pub fn compute_all_features<T: Scalar>(
    meta: &MetaPaths<T>,
    y: &[T],
    fallback: T,
    exclude_self: bool,
) -> Result<Array2<T>> {
    let n = y.len();
    let columns: Vec<Vec<T>> = meta
        .pairs
        .par_iter()
        .map(|pair| feature_fast(&meta.paths[pair.left], &meta.paths[pair.right], y, fallback, exclude_self))
        .collect::<Result<_>>()?;
    let mut z = Array2::zeros((n, columns.len()));
    for (j, col) in columns.into_iter().enumerate() {
        z.column_mut(j).assign(&ndarray::Array1::from(col));
    }
    Ok(z)
}

/// Base features joined with meta-path feature columns.
#[derive(Debug, Clone)]
pub struct FeatureTable<T> {
    pub base: Array2<T>,
    pub meta: Array2<T>,
    pub provenance: Vec<MetaPathPair>,
}

impl<T: Scalar> FeatureTable<T> {
    pub fn new(base: Array2<T>, meta: Array2<T>, provenance: Vec<MetaPathPair>) -> Result<Self> {
        if meta.ncols() != provenance.len() {
            return Err(Error::ShapeMismatch { expected: provenance.len(), got: meta.ncols() });
        }
        if meta.nrows() != base.nrows() {
            return Err(Error::LengthMismatch { left: base.nrows(), right: meta.nrows() });
        }
        Ok(FeatureTable { base, meta, provenance })
    }

    /// `[X, Z]`.
    pub fn combined(&self) -> Array2<T> {
        ndarray::concatenate(Axis(1), &[self.base.view(), self.meta.view()]).expect("row counts agree")
    }

    /// Pairs `(a, b)`, `a < b`, of meta columns with identical contents.
    pub fn duplicate_columns(&self) -> Vec<(usize, usize)> {
        let c = self.meta.ncols();
        let mut dups = Vec::new();
        for a in 0..c {
            for b in a + 1..c {
                if self.meta.column(a) == self.meta.column(b) {
                    dups.push((a, b));
                }
            }
        }
        dups
    }
}
