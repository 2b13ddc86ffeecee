//! Comparison metrics for makespans and bounds.

use thiserror::Error;

use crate::instance::Time;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("relative difference needs a positive baseline")]
    ZeroBaseline,
}

/// Relative difference of `compared` against `baseline`:
/// `(compared - baseline) / baseline`.
///
/// Negative when `compared` beats the baseline. The baseline must be
/// positive.
pub fn relative_difference(compared: Time, baseline: Time) -> Result<f64, MetricsError> {
    if baseline == 0 {
        return Err(MetricsError::ZeroBaseline);
    }
    let diff = compared as f64 - baseline as f64;
    Ok(diff / baseline as f64)
}
