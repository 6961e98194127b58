use ndarray::ArrayView2;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::welch::welch_t_test;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_SAMPLE_SIZE: usize = 1000;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Per-column outcome of the fraud-versus-normal comparison. `t` and `p`
/// are absent when a group is degenerate for that column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRow {
    pub column: usize,
    pub semantics: String,
    pub t: Option<f64>,
    pub p: Option<f64>,
    pub significant: bool,
}

/// Sorted random sample of at most `size` rows from `pool`.
pub fn sample_rows(pool: &[usize], size: usize, seed: u64) -> Vec<usize> {
    if pool.len() <= size {
        return pool.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = sample(&mut rng, pool.len(), size).into_iter().map(|k| pool[k]).collect();
    picked.sort_unstable();
    picked
}

/// Welch's t-test on every column of `z` over `rows`, grouped by `truth`.
pub fn significance_report<T: Scalar>(
    z: ArrayView2<T>,
    semantics: &[String],
    truth: &[u8],
    rows: &[usize],
    alpha: f64,
) -> Result<Vec<SignificanceRow>> {
    if semantics.len() != z.ncols() {
        return Err(Error::LengthMismatch { left: semantics.len(), right: z.ncols() });
    }
    if truth.len() != z.nrows() {
        return Err(Error::LengthMismatch { left: truth.len(), right: z.nrows() });
    }
    let groups: Vec<u8> = rows.iter().map(|&i| truth[i]).collect();
    let mut out = Vec::with_capacity(z.ncols());
    for (j, col) in z.columns().into_iter().enumerate() {
        let values: Vec<T> = rows.iter().map(|&i| col[i]).collect();
        let row = match welch_t_test(&values, &groups) {
            Ok(r) => SignificanceRow {
                column: j,
                semantics: semantics[j].clone(),
                t: Some(r.t),
                p: Some(r.p),
                significant: r.p < alpha,
            },
            Err(Error::DegenerateGroup(_)) => {
                SignificanceRow { column: j, semantics: semantics[j].clone(), t: None, p: None, significant: false }
            }
            Err(e) => return Err(e),
        };
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn sample_is_sorted_subset() {
        let pool: Vec<usize> = (100..400).collect();
        let s = sample_rows(&pool, 50, 3);
        assert_eq!(s.len(), 50);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert!(s.iter().all(|v| pool.contains(v)));
        assert_eq!(s, sample_rows(&pool, 50, 3));
        assert_eq!(sample_rows(&pool[..10], 50, 3), pool[..10].to_vec());
    }

    #[test]
    fn informative_column_is_flagged() {
        let n = 200;
        let truth: Vec<u8> = (0..n).map(|i| u8::from(i % 4 == 0)).collect();
        let z = Array2::from_shape_fn((n, 3), |(i, j)| match j {
            0 => truth[i] as f64 + 0.1 * ((i * 37) % 11) as f64,
            1 => ((i * 53) % 17) as f64,
            _ => 0.5,
        });
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let rows: Vec<usize> = (0..n).collect();
        let rep = significance_report(z.view(), &names, &truth, &rows, 0.05).unwrap();
        assert!(rep[0].significant);
        assert!(rep[2].t.is_none() && !rep[2].significant);
    }
}
