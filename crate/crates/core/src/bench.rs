//! Timing the decomposed feature computation against materializing the
//! full transaction-to-transaction path matrix.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::feature_fast_with_stats;
use crate::metapath::{MetaPathPair, MetaPaths};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

/// Largest number of scalar products the dense mode will perform.
pub const DEFAULT_DENSE_WORK_CAP: usize = 400_000_000;
pub const TIMING_RUNS: usize = 5;
pub const WARMUP_RUNS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMode {
    /// Forms `P = P₁ P₂ᵀ` explicitly, then normalizes its rows.
    Dense,
    Decomposed,
}

impl fmt::Display for BenchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchMode::Dense => "dense",
            BenchMode::Decomposed => "decomposed",
        })
    }
}

impl FromStr for BenchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(BenchMode::Dense),
            "decomposed" => Ok(BenchMode::Decomposed),
            other => Err(Error::ConfigInvalid(format!("unknown bench mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub pair: usize,
    pub semantics: String,
    pub mode: BenchMode,
    /// Median wall time in milliseconds.
    pub millis: f64,
    /// Largest number of intermediate entries held at once.
    pub peak_nnz: usize,
    pub checksum: u64,
}

impl BenchRow {
    pub const HEADER: &'static str = "pair,semantics,mode,ms,log10_ms,peak_nnz,checksum";

    /// One delimited report line matching [`BenchRow::HEADER`].
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{:.3},{:.3},{},{:016x}",
            self.pair,
            self.semantics,
            self.mode,
            self.millis,
            self.millis.max(1e-3).log10(),
            self.peak_nnz,
            self.checksum
        )
    }
}

/// FNV-1a over the IEEE-754 bits of each value.
pub fn checksum<T: Scalar>(z: &[T]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in z {
        for b in v.to_f64_lossy().to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Scalar products needed to form `a · bᵀ`.
pub fn product_work<T: Scalar>(a: &CsrMatrix<T>, bt: &CsrMatrix<T>) -> usize {
    (0..a.nrows()).map(|i| a.row(i).0.iter().map(|&k| bt.row(k).0.len()).sum::<usize>()).sum()
}

/// Feature column through the explicit path matrix, with its nonzero count.
pub fn feature_dense_sparse<T: Scalar>(
    meta: &MetaPaths<T>,
    pair: &MetaPathPair,
    y: &[T],
    fallback: T,
    exclude_self: bool,
    work_cap: usize,
) -> Result<(Vec<T>, usize)> {
    let p1 = &meta.paths[pair.left].matrix;
    let p2t = meta.paths[pair.right].matrix.transpose();
    let work = product_work(p1, &p2t);
    if work > work_cap {
        return Err(Error::OracleCapExceeded { size: work, cap: work_cap });
    }
    let p = p1.matmul(&p2t);
    let z = (0..p.nrows())
        .map(|i| {
            let (cols, vals) = p.row(i);
            let (mut num, mut den) = (T::zero(), T::zero());
            for (&j, &w) in cols.iter().zip(vals) {
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
        .collect();
    Ok((z, p.nnz()))
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort_unstable();
    v[v.len() / 2]
}

/// Times one pair in one mode: median of [`TIMING_RUNS`] runs after
/// [`WARMUP_RUNS`] discarded ones.
pub fn benchmark_pair<T: Scalar>(
    meta: &MetaPaths<T>,
    pair_index: usize,
    mode: BenchMode,
    y: &[T],
    fallback: T,
    exclude_self: bool,
    work_cap: usize,
) -> Result<BenchRow> {
    let pair = meta
        .pairs
        .get(pair_index)
        .ok_or_else(|| Error::ConfigInvalid(format!("no meta-path pair {pair_index}")))?;
    let run = || -> Result<(Vec<T>, usize)> {
        match mode {
            BenchMode::Dense => feature_dense_sparse(meta, pair, y, fallback, exclude_self, work_cap),
            BenchMode::Decomposed => {
                let (z, stats) =
                    feature_fast_with_stats(&meta.paths[pair.left], &meta.paths[pair.right], y, fallback, exclude_self)?;
                Ok((z, stats.peak_intermediate))
            }
        }
    };
    for _ in 0..WARMUP_RUNS {
        run()?;
    }
    let mut times = Vec::with_capacity(TIMING_RUNS);
    let mut last = None;
    for _ in 0..TIMING_RUNS {
        let start = Instant::now();
        let out = run()?;
        times.push(start.elapsed());
        last = Some(out);
    }
    let (z, peak_nnz) = last.expect("at least one timed run");
    Ok(BenchRow {
        pair: pair_index,
        semantics: pair.semantics.clone(),
        mode,
        millis: median(times).as_secs_f64() * 1e3,
        peak_nnz,
        checksum: checksum(&z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hin::{Cardinality, Hin, HinSchema, LinkTypeDef, NodeRole, NodeTypeDef};

    fn sourced(n: usize, n_s: usize) -> MetaPaths<f64> {
        let schema = HinSchema::new(
            vec![
                NodeTypeDef { name: "T".into(), role: NodeRole::Target },
                NodeTypeDef { name: "S".into(), role: NodeRole::Attribute },
            ],
            vec![LinkTypeDef { name: "fromS".into(), source: "T".into(), target: "S".into(), cardinality: Cardinality::ManyToOne }],
        )
        .unwrap();
        let hin = Hin::with_counts(schema, &[n, n_s], vec![(0..n).map(|i| (i, i % n_s)).collect()]).unwrap();
        MetaPaths::build(&hin)
    }

    #[test]
    fn modes_agree_on_simple_pair() {
        let meta = sourced(400, 7);
        let y: Vec<f64> = (0..400).map(|i| ((i * 31) % 5 == 0) as u8 as f64).collect();
        let d = benchmark_pair(&meta, 0, BenchMode::Dense, &y, 0.1, true, usize::MAX).unwrap();
        let f = benchmark_pair(&meta, 0, BenchMode::Decomposed, &y, 0.1, true, usize::MAX).unwrap();
        assert_eq!(d.checksum, f.checksum);
        assert!(d.peak_nnz >= 400 * 400 / 7);
        assert_eq!(f.peak_nnz, 400 + 2 * 7);
        assert!(d.to_line().starts_with("0,T→fromS→S→fromS⁻¹→T,dense,"));
    }

    #[test]
    fn dense_respects_cap() {
        let meta = sourced(100, 2);
        let err = benchmark_pair(&meta, 0, BenchMode::Dense, &[0.0; 100], 0.0, true, 1000).unwrap_err();
        assert!(matches!(err, Error::OracleCapExceeded { size: 5000, cap: 1000 }));
        assert!(benchmark_pair(&meta, 3, BenchMode::Decomposed, &[0.0; 100], 0.0, true, 0).is_err());
    }

    #[test]
    fn checksum_sensitivity() {
        assert_eq!(checksum(&[1.0f64, 2.0]), checksum(&[1.0f64, 2.0]));
        assert_ne!(checksum(&[1.0f64, 2.0]), checksum(&[2.0f64, 1.0]));
        assert_ne!(checksum(&[0.0f64]), checksum(&[-0.0f64]));
    }
}
