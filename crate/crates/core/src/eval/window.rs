use crate::error::{Error, Result};
use crate::hin::{Dataset, LabelState, Split};
use crate::scalar::Scalar;

/// One chronological train/test segmentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSplit {
    /// 1-based window number.
    pub window: usize,
    pub train: Vec<bool>,
    pub test: Vec<bool>,
}

impl WindowSplit {
    /// Indices of transactions that take part in this window (train or test).
    pub fn members(&self) -> Vec<usize> {
        (0..self.train.len()).filter(|&i| self.train[i] || self.test[i]).collect()
    }

    /// Train/test mask over [`WindowSplit::members`].
    pub fn member_mask(&self) -> Vec<Split> {
        self.members().into_iter().map(|i| if self.test[i] { Split::Test } else { Split::Train }).collect()
    }
}

/// Span index of every timestamp when `[min, max]` is cut into `spans`
/// equal-width intervals.
pub fn span_index(timestamps: &[i64], spans: usize) -> Result<Vec<usize>> {
    let (Some(&lo), Some(&hi)) = (timestamps.iter().min(), timestamps.iter().max()) else {
        return Err(Error::InsufficientSpan { needed: spans });
    };
    let width = (hi - lo) as i128 + 1;
    if spans == 0 || width < spans as i128 || hi == lo {
        return Err(Error::InsufficientSpan { needed: spans });
    }
    Ok(timestamps
        .iter()
        .map(|&t| (((t - lo) as i128 * spans as i128) / width) as usize)
        .collect())
}

/// Cuts the time range into `window_count + 1` equal spans. Window `w`
/// tests on span `w` and trains on every earlier span.
pub fn sliding_window_split(timestamps: &[i64], window_count: usize) -> Result<Vec<WindowSplit>> {
    let spans = window_count + 1;
    let idx = span_index(timestamps, spans)?;
    let mut out = Vec::with_capacity(window_count);
    for w in 1..=window_count {
        let train: Vec<bool> = idx.iter().map(|&s| s < w).collect();
        let test: Vec<bool> = idx.iter().map(|&s| s == w).collect();
        if !test.iter().any(|&b| b) || !train.iter().any(|&b| b) {
            return Err(Error::InsufficientSpan { needed: spans });
        }
        out.push(WindowSplit { window: w, train, test });
    }
    Ok(out)
}

/// Window `window` (1-based) of `windows`, with the dataset cut down to
/// that window's members and their label state.
pub fn window_dataset<T: Scalar>(
    full: &Dataset<T>,
    windows: usize,
    window: usize,
) -> Result<(Dataset<T>, LabelState<T>)> {
    if window == 0 || window > windows {
        return Err(Error::ConfigInvalid(format!("window {window} outside 1..={windows}")));
    }
    let split = sliding_window_split(&full.labels.timestamps, windows)?.swap_remove(window - 1);
    let data = full.restrict(&split.members())?;
    let labels = LabelState::new(&data.labels.truth, &data.labels.timestamps, &split.member_mask())?;
    Ok((data, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_spans_seven_windows() {
        let ts: Vec<i64> = (0..80).collect();
        let ws = sliding_window_split(&ts, 7).unwrap();
        assert_eq!(ws.len(), 7);
        for (k, w) in ws.iter().enumerate() {
            assert_eq!(w.train.iter().filter(|&&b| b).count(), 10 * (k + 1));
            assert_eq!(w.test.iter().filter(|&&b| b).count(), 10);
            let first_test = w.test.iter().position(|&b| b).unwrap();
            assert!(w.train.iter().enumerate().all(|(i, &b)| !b || i < first_test));
        }
    }

    #[test]
    fn single_holdout() {
        let ts = [7, 1, 9, 3];
        let ws = sliding_window_split(&ts, 1).unwrap();
        assert_eq!(ws[0].train, vec![false, true, false, true]);
        assert_eq!(ws[0].test, vec![true, false, true, false]);
    }

    #[test]
    fn constant_timestamps_fail() {
        assert!(matches!(sliding_window_split(&[7, 7, 7], 1), Err(Error::InsufficientSpan { .. })));
    }
}
