use serde::{Deserialize, Serialize};

use super::special::student_t_two_sided;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Two-sided unequal-variance t-test outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Welch's t-test of group 1 against group 0. `t > 0` when group 1 has the
/// larger mean.
pub fn welch_t_test<T: Scalar>(values: &[T], groups: &[u8]) -> Result<WelchResult> {
    if values.len() != groups.len() {
        return Err(Error::LengthMismatch { left: values.len(), right: groups.len() });
    }
    let mut split: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (&v, &g) in values.iter().zip(groups) {
        split[usize::from(g == 1)].push(v.to_f64_lossy());
    }
    for (g, s) in split.iter().enumerate() {
        if s.len() < 2 {
            return Err(Error::DegenerateGroup(format!("group {g} has {} values", s.len())));
        }
    }
    let (m0, v0) = mean_var(&split[0]);
    let (m1, v1) = mean_var(&split[1]);
    let (n0, n1) = (split[0].len() as f64, split[1].len() as f64);
    let (a, b) = (v1 / n1, v0 / n0);
    let se2 = a + b;
    if se2 <= 0.0 || !se2.is_finite() {
        return Err(Error::DegenerateGroup("both groups have zero variance".into()));
    }
    let t = (m1 - m0) / se2.sqrt();
    let df = se2 * se2 / (a * a / (n1 - 1.0) + b * b / (n0 - 1.0));
    Ok(WelchResult { t, df, p: student_t_two_sided(t, df) })
}
