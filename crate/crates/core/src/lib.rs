//! Collective fraud detection on heterogeneous information networks.
//!
//! Transactions live in a typed graph alongside the entities they touch
//! (users, billing accounts, IP addresses, items, ...). Downsized meta-paths
//! from transactions to smaller node types are materialized once; every
//! transaction-to-transaction meta-path is a pair of them, and its
//! label-aggregation feature is computed without forming the `n × n` path
//! matrix. A base classifier is then refit on `[X, Z]` while test
//! predictions feed back into `Z` until the labels settle.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix it to `f64`, which the command-line tool uses.

pub mod bench;
pub mod classify;
pub mod collective;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod features;
pub mod hin;
pub mod metapath;
pub mod scalar;
pub mod sparse;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Independent seed for stream `stream` derived from a root seed.
pub fn split_seed(root: u64, stream: u64) -> u64 {
    let mut z = root.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub type CsrMatrix64 = sparse::CsrMatrix<f64>;
pub type DownsizedPath64 = metapath::DownsizedPath<f64>;
pub type MetaPaths64 = metapath::MetaPaths<f64>;
pub type FeatureTable64 = features::FeatureTable<f64>;
pub type LabelState64 = hin::LabelState<f64>;
pub type Dataset64 = hin::Dataset<f64>;
pub type TrainedModel64 = classify::TrainedModel<f64>;
pub type LoopHistory64 = collective::LoopHistory<f64>;
