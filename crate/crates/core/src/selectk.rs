//! Number-of-factors selection from the spectrum of `Y M_T Y' / T`.
//!
//! Negative eigenvalues (rounding noise of a positive semi-definite matrix)
//! are treated as zero.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectKError {
    #[error("need at least {needed} eigenvalues for Kmax = {kmax}, got {got}")]
    TooFewEigenvalues { needed: usize, got: usize, kmax: usize },
    #[error("Kmax must be at least 1")]
    InvalidKmax,
    #[error("threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),
    #[error("non-finite eigenvalue")]
    NonFinite,
}

/// Both estimates together with the quantities behind them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSelection {
    pub k_ratio: usize,
    pub k_threshold: usize,
    /// `ratios[k - 1] = eigvals[k] / eigvals[k + 1]` for `k = 1..=kmax`;
    /// `+inf` for a zero denominator, `NaN` for `0 / 0` (serialized as null).
    pub ratios: Vec<f64>,
    pub kmax: usize,
    pub threshold_used: f64,
}

fn clamp0(v: f64) -> f64 {
    v.max(0.0)
}

pub fn ratios(eigvals: &[f64], kmax: usize) -> Result<Vec<f64>, SelectKError> {
    if kmax == 0 {
        return Err(SelectKError::InvalidKmax);
    }
    if eigvals.len() < kmax + 1 {
        return Err(SelectKError::TooFewEigenvalues { needed: kmax + 1, got: eigvals.len(), kmax });
    }
    if eigvals.iter().any(|v| !v.is_finite()) {
        return Err(SelectKError::NonFinite);
    }
    Ok((0..kmax)
        .map(|k| {
            let (num, den) = (clamp0(eigvals[k]), clamp0(eigvals[k + 1]));
            match (num == 0.0, den == 0.0) {
                (true, true) => f64::NAN,
                (false, true) => f64::INFINITY,
                _ => num / den,
            }
        })
        .collect())
}

/// Maximizer of adjacent eigenvalue ratios over `k = 1..=kmax`.
///
/// The smallest `k` wins ties, an infinite ratio beats every finite one and
/// `0 / 0` ratios are skipped. If every ratio is `0 / 0` the result is 1.
pub fn k_by_ratio(eigvals: &[f64], kmax: usize) -> Result<usize, SelectKError> {
    let r = ratios(eigvals, kmax)?;
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in r.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if best.map_or(true, |(_, b)| *v > b) {
            best = Some((k + 1, *v));
        }
    }
    Ok(best.map_or(1, |(k, _)| k))
}

/// Number of eigenvalues at or above `lambda`.
pub fn k_by_threshold(eigvals: &[f64], lambda: f64) -> usize {
    eigvals.iter().filter(|v| **v >= lambda).count()
}

/// `(floor(P / 2), 1 / ln N)`. `N` is the smallest period size.
pub fn default_tuning(n: usize, p: usize) -> (usize, f64) {
    ((p / 2).max(1), 1.0 / (n as f64).ln())
}

/// Caps `kmax` at `T - 2` and at `len - 1` (so that `kmax + 1` eigenvalues
/// exist), never below 1.
pub fn clamp_kmax(kmax: usize, t: usize, len: usize) -> usize {
    kmax.min(t.saturating_sub(2)).min(len.saturating_sub(1)).max(1)
}

pub fn select_k(eigvals: &[f64], kmax: usize, lambda: f64) -> Result<KSelection, SelectKError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(SelectKError::InvalidThreshold(lambda));
    }
    Ok(KSelection {
        k_ratio: k_by_ratio(eigvals, kmax)?,
        k_threshold: k_by_threshold(eigvals, lambda),
        ratios: ratios(eigvals, kmax)?,
        kmax,
        threshold_used: lambda,
    })
}
