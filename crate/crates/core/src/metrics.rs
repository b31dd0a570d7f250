//! Accuracy metrics.

use crate::error::{Result, SketchError};

/// `(estimate - exact) / exact`; undefined for a zero exact value.
pub fn relative_error(estimate: f64, exact: f64) -> Result<f64> {
    if exact == 0.0 {
        return Err(SketchError::Metric("relative error of a zero exact value".into()));
    }
    Ok((estimate - exact) / exact)
}

/// Mean relative error over `(estimate, exact)` pairs.
pub fn average_relative_error(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(SketchError::Metric("average relative error of an empty query set".into()));
    }
    let mut sum = 0.0;
    for &(est, exact) in pairs {
        sum += relative_error(est, exact)?;
    }
    Ok(sum / pairs.len() as f64)
}

/// Fraction of truly unreachable queries that were also estimated
/// unreachable.
pub fn true_negative_recall(estimates: &[bool]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(SketchError::Metric("recall of an empty query set".into()));
    }
    Ok(estimates.iter().filter(|&&e| !e).count() as f64 / estimates.len() as f64)
}

/// Percentage by which `ours` reduces `baseline`'s error.
pub fn error_reduction_pct(ours: f64, baseline: f64) -> Option<f64> {
    (baseline > 0.0).then(|| 100.0 * (baseline - ours) / baseline)
}
