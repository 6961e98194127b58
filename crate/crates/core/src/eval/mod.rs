//! Chronological splits, classification metrics and the per-feature
//! significance study.

mod metrics;
mod significance;
pub mod special;
mod welch;
mod window;

pub use metrics::{metrics, rela_impr, Confusion, MetricName, Metrics};
pub use significance::{sample_rows, significance_report, SignificanceRow, DEFAULT_ALPHA, DEFAULT_SAMPLE_SIZE};
pub use welch::{welch_t_test, WelchResult};
pub use window::{sliding_window_split, span_index, window_dataset, WindowSplit};
