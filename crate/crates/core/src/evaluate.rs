//! Goodness-of-fit measures for extracted factors on a panel of portfolio
//! returns: in-sample R² with and without the time-series intercepts, and
//! out-of-sample predictive R² with expanding-window risk premia.
//!
//! All denominators are raw sums of squared returns (no demeaning), so the
//! measures can be negative.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::error::ErrorKind;
use crate::spectral::{ols, ols_multi, SpectralError};

/// Default length of the initial estimation window.
pub const DEFAULT_BURN_IN: usize = 240;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvaluateError {
    #[error("need more than {burn_in} periods for out-of-sample evaluation, got {t}")]
    InsufficientHistory { t: usize, burn_in: usize },
    #[error("need at least K + 2 = {needed} periods, got {t}")]
    TooFewPeriods { t: usize, needed: usize },
    #[error("regression design is rank deficient ({0})")]
    RankDeficient(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value in returns or factors")]
    NonFinite,
    #[error("{path}: {message}")]
    Csv { path: String, message: String },
}

impl EvaluateError {
    pub(crate) fn kind(&self) -> ErrorKind {
        match self {
            EvaluateError::RankDeficient(_) => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }
}

fn lift(context: &str) -> impl Fn(SpectralError) -> EvaluateError + '_ {
    move |e| match e {
        SpectralError::RankDeficient { .. } | SpectralError::SingularGram => EvaluateError::RankDeficient(context.to_string()),
        SpectralError::NonFinite => EvaluateError::NonFinite,
        other => EvaluateError::DimensionMismatch(other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InSampleR2 {
    pub total: f64,
    pub time_series: f64,
    pub cross_section: f64,
    pub f_total: f64,
    pub f_time_series: f64,
    pub f_cross_section: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutOfSampleR2 {
    pub total: f64,
    pub time_series: f64,
    pub cross_section: f64,
}

/// The three R² aggregations of residuals `e` against returns `r`, both
/// `N x T`: pooled, average over units of time-series ratios, and average
/// over periods of cross-sectional ratios.
fn three_r2(r: &DMatrix<f64>, e: &DMatrix<f64>) -> (f64, f64, f64) {
    let total = 1.0 - e.norm_squared() / r.norm_squared();
    let (n, t) = r.shape();
    let ts = 1.0 - (0..n).map(|i| e.row(i).norm_squared() / r.row(i).norm_squared()).sum::<f64>() / n as f64;
    let cs = 1.0 - (0..t).map(|s| e.column(s).norm_squared() / r.column(s).norm_squared()).sum::<f64>() / t as f64;
    (total, ts, cs)
}

fn check_inputs(returns: &DMatrix<f64>, factors: &DMatrix<f64>) -> Result<(), EvaluateError> {
    if returns.ncols() != factors.nrows() {
        return Err(EvaluateError::DimensionMismatch(format!("returns cover {} periods, factors {}", returns.ncols(), factors.nrows())));
    }
    if factors.ncols() == 0 || returns.nrows() == 0 {
        return Err(EvaluateError::DimensionMismatch("empty returns or factors".into()));
    }
    if returns.iter().chain(factors.iter()).any(|v| !v.is_finite()) {
        return Err(EvaluateError::NonFinite);
    }
    Ok(())
}

/// In-sample R² for returns `R` (`N x T`) and factors `F` (`T x K`).
///
/// Each portfolio's returns are regressed on a constant and the factors
/// over the full sample. The first three measures use `alpha_i + beta_i' f_t`
/// as the fitted value, the `f_` variants `beta_i' f_t` alone.
pub fn r2_insample(returns: &DMatrix<f64>, factors: &DMatrix<f64>) -> Result<InSampleR2, EvaluateError> {
    check_inputs(returns, factors)?;
    let (t, k) = factors.shape();
    if t < k + 2 {
        return Err(EvaluateError::TooFewPeriods { t, needed: k + 2 });
    }
    // (K + 1) x N
    let coef = ols_multi(factors, &returns.transpose(), true).map_err(lift("time-series regression on the factors"))?;
    let alphas = coef.row(0);
    let betas = coef.rows(1, k);
    let common = (factors * betas).transpose();
    let e_f = returns - &common;
    let mut e = e_f.clone();
    for (i, a) in alphas.iter().enumerate() {
        e.row_mut(i).add_scalar_mut(-a);
    }
    let (total, time_series, cross_section) = three_r2(returns, &e);
    let (f_total, f_time_series, f_cross_section) = three_r2(returns, &e_f);
    Ok(InSampleR2 { total, time_series, cross_section, f_total, f_time_series, f_cross_section })
}

/// Out-of-sample predictive R² with an expanding window.
///
/// For `s = burn_in, ..., T - 1` (one-based), betas come from regressions on
/// periods `1..=s`, the risk premium from a no-intercept cross-sectional
/// regression of average returns over `1..=s` on those betas, and
/// `beta_is' lambda_s` predicts the return in period `s + 1`.
pub fn r2_oos(returns: &DMatrix<f64>, factors: &DMatrix<f64>, burn_in: usize) -> Result<OutOfSampleR2, EvaluateError> {
    check_inputs(returns, factors)?;
    let (t, k) = factors.shape();
    let n = returns.nrows();
    if burn_in == 0 || t <= burn_in {
        return Err(EvaluateError::InsufficientHistory { t, burn_in });
    }
    if burn_in < k + 2 {
        return Err(EvaluateError::TooFewPeriods { t: burn_in, needed: k + 2 });
    }
    let mut pred = DMatrix::zeros(n, t - burn_in);
    let actual = returns.columns(burn_in, t - burn_in).into_owned();
    for s in burn_in..t {
        let f = factors.rows(0, s).into_owned();
        let r = returns.columns(0, s).transpose();
        let coef = ols_multi(&f, &r, true).map_err(lift("expanding-window time-series regression"))?;
        // N x K
        let betas = coef.rows(1, k).transpose();
        let rbar = DVector::from_iterator(n, (0..n).map(|i| returns.row(i).columns(0, s).sum() / s as f64));
        let lambda = ols(&betas, &rbar, false).map_err(lift("cross-sectional risk-premium regression"))?;
        pred.set_column(s - burn_in, &(&betas * lambda));
    }
    let e = &actual - &pred;
    let (total, time_series, cross_section) = three_r2(&actual, &e);
    Ok(OutOfSampleR2 { total, time_series, cross_section })
}

/// A wide CSV table: header `label,c1,...`, one row per period.
#[derive(Debug, Clone, PartialEq)]
pub struct WideTable {
    pub row_labels: Vec<String>,
    pub columns: Vec<String>,
    /// rows x columns
    pub values: DMatrix<f64>,
}

pub fn read_wide_csv(path: &Path) -> Result<WideTable, EvaluateError> {
    let err = |message: String| EvaluateError::Csv { path: path.display().to_string(), message };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| err(e.to_string()))?;
    let headers = reader.headers().map_err(|e| err(e.to_string()))?.clone();
    if headers.len() < 2 {
        return Err(err("expected a label column followed by at least one value column".into()));
    }
    let columns: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut row_labels = Vec::new();
    let mut data = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        row_labels.push(rec.get(0).unwrap_or_default().to_string());
        for (j, cell) in rec.iter().skip(1).enumerate() {
            let v: f64 = cell.parse().map_err(|_| err(format!("row {}: column {} is not numeric ({cell:?})", row + 1, columns[j])))?;
            if !v.is_finite() {
                return Err(err(format!("row {}: column {} is not finite", row + 1, columns[j])));
            }
            data.push(v);
        }
    }
    let values = DMatrix::from_row_slice(row_labels.len(), columns.len(), &data);
    Ok(WideTable { row_labels, columns, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn exact(n: usize, t: usize, k: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut s = Stream::new(seed);
        let f = DMatrix::from_fn(t, k, |_, _| s.normal());
        let b = DMatrix::from_fn(n, k, |_, _| s.normal());
        (&b * f.transpose(), f)
    }

    #[test]
    fn exact_structure_gives_one() {
        let (r, f) = exact(8, 30, 2, 1);
        let r2 = r2_insample(&r, &f).unwrap();
        for v in [r2.total, r2.time_series, r2.cross_section, r2.f_total, r2.f_time_series, r2.f_cross_section] {
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn three_period_hand_computation() {
        // r = (1, 2, 4), f = (0, 1, 2): OLS gives alpha = 5/6, beta = 3/2
        let r = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 4.0]);
        let f = DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 2.0]);
        let r2 = r2_insample(&r, &f).unwrap();
        let fitted = [5.0 / 6.0, 5.0 / 6.0 + 1.5, 5.0 / 6.0 + 3.0];
        let sse: f64 = [1.0, 2.0, 4.0].iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum();
        assert!((r2.total - (1.0 - sse / 21.0)).abs() < 1e-12);
        assert!((r2.time_series - r2.total).abs() < 1e-12);
        let sse_f: f64 = [1.0, 2.0, 4.0].iter().zip([0.0, 1.5, 3.0]).map(|(a, b)| (a - b) * (a - b)).sum();
        assert!((r2.f_total - (1.0 - sse_f / 21.0)).abs() < 1e-12);
        let cs: f64 = [1.0, 2.0, 4.0].iter().zip([0.0, 1.5, 3.0]).map(|(a, b)| (a - b) * (a - b) / (a * a)).sum::<f64>() / 3.0;
        assert!((r2.f_cross_section - (1.0 - cs)).abs() < 1e-12);
    }

    #[test]
    fn rotation_invariance() {
        let mut s = Stream::new(2);
        let r = DMatrix::from_fn(10, 40, |_, _| s.normal());
        let f = DMatrix::from_fn(40, 3, |_, _| s.normal());
        let rot = DMatrix::from_fn(3, 3, |_, _| s.normal());
        let a = r2_insample(&r, &f).unwrap();
        let b = r2_insample(&r, &(&f * rot)).unwrap();
        for (x, y) in [(a.total, b.total), (a.time_series, b.time_series), (a.cross_section, b.cross_section)] {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(a.total <= 1.0 && a.time_series <= 1.0 && a.cross_section <= 1.0);
    }

    #[test]
    fn duplicate_factor_is_rank_deficient() {
        let (r, f) = exact(4, 20, 1, 3);
        let dup = f.clone().insert_column(1, 0.0);
        let mut dup = dup;
        dup.set_column(1, &f.column(0));
        assert!(matches!(r2_insample(&r, &dup), Err(EvaluateError::RankDeficient(_))));
    }

    #[test]
    fn oos_exact_and_errors() {
        let burn = 12;
        let t = 20;
        let mut s = Stream::new(4);
        let mut f = DMatrix::from_fn(t, 2, |_, _| s.normal());
        for j in 0..2 {
            let mean = f.column(j).rows(0, burn).mean();
            for tt in burn..t {
                f[(tt, j)] = mean;
            }
        }
        let b = DMatrix::from_fn(6, 2, |_, _| s.normal());
        let r = &b * f.transpose();
        let o = r2_oos(&r, &f, burn).unwrap();
        for v in [o.total, o.time_series, o.cross_section] {
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
        assert!(matches!(r2_oos(&r, &f, 20), Err(EvaluateError::InsufficientHistory { .. })));
    }

    #[test]
    fn oos_noise_factors_near_zero() {
        let mut s = Stream::new(5);
        let r = DMatrix::from_fn(25, 400, |_, _| s.normal());
        let f = DMatrix::from_fn(400, 1, |_, _| s.normal());
        let o = r2_oos(&r, &f, 240).unwrap();
        assert!(o.total <= 0.0 && o.total > -0.05, "{}", o.total);
    }
}
