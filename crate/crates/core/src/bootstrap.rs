//! Weighted bootstrap with unit-level exponential weights.
//!
//! Each draw reweights every unit's check loss by a standard exponential
//! weight, the same weight in every period, and re-solves the stage-one
//! regressions. Loadings are then obtained by regressing the demeaned
//! bootstrap coefficients on the *original* estimated factors, which keeps
//! every draw in the rotation of the original fit; no eigendecomposition is
//! performed on the bootstrap path.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::error::{ErrorKind, Result};
use crate::estimate::{self, Designs, QrpcaFit};
use crate::panel::Panel;
use crate::rng::{child_seed, Stream};
use crate::sieve::Basis;
use crate::spectral::{demean_time, invert_gram, time_mean};

/// Smallest number of draws accepted by tests and bands.
pub const MIN_DRAWS: usize = 19;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BootstrapError {
    #[error("at least {MIN_DRAWS} bootstrap draws are required, got {0}")]
    TooFewDraws(usize),
    #[error("level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),
    #[error("numerically singular Gram matrix in bootstrap draw")]
    SingularGram,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

impl BootstrapError {
    pub(crate) fn kind(&self) -> ErrorKind {
        match self {
            BootstrapError::SingularGram => ErrorKind::Numerical,
            BootstrapError::DimensionMismatch(_) => ErrorKind::Data,
            _ => ErrorKind::Usage,
        }
    }
}

/// One standard exponential weight per unit of the panel's unit universe.
pub fn draw_weights(stream: &mut Stream, n_units: usize) -> Vec<f64> {
    (0..n_units).map(|_| stream.exponential()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDraw {
    pub a_star: DVector<f64>,
    pub b_star: DMatrix<f64>,
    pub f_star: DMatrix<f64>,
}

/// Bootstrap estimators from reweighted stage-one coefficients `ystar`
/// (`P x T`) and the original factors `f_hat` (`T x K`):
///
/// ```text
/// B* = Y* M_T F (F' M_T F)^{-1}
/// a* = (I - B* (B*'B*)^{-1} B*') mean_t(Y*)
/// F* = Y*' B* (B*'B*)^{-1}
/// ```
pub fn draw_from_stage(ystar: &DMatrix<f64>, f_hat: &DMatrix<f64>) -> std::result::Result<BootstrapDraw, BootstrapError> {
    if ystar.ncols() != f_hat.nrows() {
        return Err(BootstrapError::DimensionMismatch(format!("Y* has {} periods, F has {}", ystar.ncols(), f_hat.nrows())));
    }
    let fc = demean_time(&f_hat.transpose()).transpose();
    let ff_inv = invert_gram(&(fc.transpose() * &fc)).map_err(|_| BootstrapError::SingularGram)?;
    // Y* M_T F = (Y* M_T)(M_T F) since M_T is idempotent
    let b_star = demean_time(ystar) * &fc * ff_inv;
    let bb_inv = invert_gram(&(b_star.transpose() * &b_star)).map_err(|_| BootstrapError::SingularGram)?;
    let ybar = time_mean(ystar);
    let a_star = &ybar - &b_star * (&bb_inv * (b_star.transpose() * &ybar));
    let f_star = ystar.transpose() * &b_star * bb_inv;
    if a_star.iter().chain(b_star.iter()).chain(f_star.iter()).any(|v| !v.is_finite()) {
        return Err(BootstrapError::SingularGram);
    }
    Ok(BootstrapDraw { a_star, b_star, f_star })
}

/// One bootstrap draw for `base` with the given unit weights (indexed by
/// position in `panel.units()`).
pub fn bootstrap_draw(panel: &Panel, basis: &Basis, base: &QrpcaFit, weights: &[f64]) -> Result<BootstrapDraw> {
    let designs = Designs::new(panel, basis)?;
    bootstrap_draw_with(panel, &designs, base, weights)
}

pub fn bootstrap_draw_with(panel: &Panel, designs: &Designs, base: &QrpcaFit, weights: &[f64]) -> Result<BootstrapDraw> {
    let stage = estimate::stage_one_with(panel, designs, base.tau, Some(weights))?;
    Ok(draw_from_stage(&stage.ytilde, &base.f_hat)?)
}

/// `n_draws` draws; draw `b` uses the stream `child_seed(seed, [b])`.
pub fn run_draws(panel: &Panel, designs: &Designs, base: &QrpcaFit, n_draws: usize, seed: u64) -> Result<Vec<BootstrapDraw>> {
    (0..n_draws)
        .into_par_iter()
        .map(|b| {
            let mut stream = Stream::new(child_seed(seed, &[b as u64]));
            let w = draw_weights(&mut stream, panel.n_units());
            bootstrap_draw_with(panel, designs, base, &w)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaTest {
    /// `a_hat' a_hat`
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    pub n_draws: usize,
    pub level: f64,
}

/// Empirical quantile by the inverse of the empirical distribution
/// function: the `ceil(p n)`-th order statistic (the first for `p n <= 1`).
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let idx = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[idx - 1]
}

fn check_level(level: f64) -> std::result::Result<(), BootstrapError> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(BootstrapError::InvalidLevel(level))
    }
}

/// Compares `a_hat' a_hat` with the `(1 - level)` quantile of
/// `|a*_b - a_hat|^2`. The usual factor `N` multiplies both sides and is
/// omitted.
pub fn alpha_test_from_draws(base: &QrpcaFit, draws: &[BootstrapDraw], level: f64) -> std::result::Result<AlphaTest, BootstrapError> {
    check_level(level)?;
    if draws.len() < MIN_DRAWS {
        return Err(BootstrapError::TooFewDraws(draws.len()));
    }
    let statistic = base.a_hat.norm_squared();
    let mut dist: Vec<f64> = draws.iter().map(|d| (&d.a_star - &base.a_hat).norm_squared()).collect();
    let exceed = dist.iter().filter(|v| **v >= statistic).count();
    dist.sort_by(f64::total_cmp);
    let critical_value = empirical_quantile(&dist, 1.0 - level);
    Ok(AlphaTest {
        statistic,
        critical_value,
        p_value: (1 + exceed) as f64 / (draws.len() + 1) as f64,
        reject: statistic > critical_value,
        n_draws: draws.len(),
        level,
    })
}

/// Test of a zero intercept function at one quantile index with `k` factors.
pub fn alpha_zero_test(panel: &Panel, basis: &Basis, tau: f64, k: usize, n_draws: usize, level: f64, seed: u64) -> Result<AlphaTest> {
    check_level(level)?;
    if n_draws < MIN_DRAWS {
        return Err(BootstrapError::TooFewDraws(n_draws).into());
    }
    let designs = Designs::new(panel, basis)?;
    let stage = estimate::stage_one_with(panel, &designs, tau, None)?;
    let base = estimate::fit(&stage, k)?;
    let draws = run_draws(panel, &designs, &base, n_draws, seed)?;
    Ok(alpha_test_from_draws(&base, &draws, level)?)
}

/// Joint test that one row of `B` is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowTest {
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
}

/// Basic-bootstrap intervals `[2 x - q(1 - level/2), 2 x - q(level/2)]`
/// for every coordinate of `a_hat` and `B_hat`, and row-wise joint tests of
/// `B_hat` at significance `level`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bands {
    pub a_lower: DVector<f64>,
    pub a_upper: DVector<f64>,
    pub b_lower: DMatrix<f64>,
    pub b_upper: DMatrix<f64>,
    pub row_tests: Vec<RowTest>,
}

fn basic_interval(estimate: f64, mut draws: Vec<f64>, level: f64) -> (f64, f64) {
    draws.sort_by(f64::total_cmp);
    let lo_q = empirical_quantile(&draws, level / 2.0);
    let hi_q = empirical_quantile(&draws, 1.0 - level / 2.0);
    (2.0 * estimate - hi_q, 2.0 * estimate - lo_q)
}

pub fn bootstrap_bands(draws: &[BootstrapDraw], base: &QrpcaFit, level: f64) -> std::result::Result<Bands, BootstrapError> {
    check_level(level)?;
    if draws.len() < MIN_DRAWS {
        return Err(BootstrapError::TooFewDraws(draws.len()));
    }
    let (p, k) = base.b_hat.shape();
    if draws.iter().any(|d| d.a_star.len() != p || d.b_star.shape() != (p, k)) {
        return Err(BootstrapError::DimensionMismatch("draw shapes differ from the base fit".into()));
    }
    let mut a_lower = DVector::zeros(p);
    let mut a_upper = DVector::zeros(p);
    for j in 0..p {
        let (lo, hi) = basic_interval(base.a_hat[j], draws.iter().map(|d| d.a_star[j]).collect(), level);
        a_lower[j] = lo;
        a_upper[j] = hi;
    }
    let mut b_lower = DMatrix::zeros(p, k);
    let mut b_upper = DMatrix::zeros(p, k);
    for j in 0..p {
        for c in 0..k {
            let (lo, hi) = basic_interval(base.b_hat[(j, c)], draws.iter().map(|d| d.b_star[(j, c)]).collect(), level);
            b_lower[(j, c)] = lo;
            b_upper[(j, c)] = hi;
        }
    }
    let row_tests = (0..p)
        .map(|j| {
            let row = base.b_hat.row(j);
            let statistic = row.norm_squared();
            let mut dist: Vec<f64> = draws.iter().map(|d| (d.b_star.row(j) - row).norm_squared()).collect();
            let exceed = dist.iter().filter(|v| **v >= statistic).count();
            dist.sort_by(f64::total_cmp);
            let critical_value = empirical_quantile(&dist, 1.0 - level);
            RowTest { statistic, critical_value, p_value: (1 + exceed) as f64 / (draws.len() + 1) as f64, reject: statistic > critical_value }
        })
        .collect();
    Ok(Bands { a_lower, a_upper, b_lower, b_upper, row_tests })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{fit, StageOne};
    use crate::rng::Stream;

    fn base_fit(seed: u64) -> (StageOne, QrpcaFit) {
        let mut s = Stream::new(seed);
        let t = 20;
        let f = DMatrix::from_fn(t, 2, |_, j| s.normal() * (2.0 - j as f64));
        let b = DMatrix::from_fn(6, 2, |_, _| s.normal());
        let a = DVector::from_fn(6, |_, _| s.normal());
        let y = &a * DMatrix::from_element(1, t, 1.0) + &b * f.transpose() + DMatrix::from_fn(6, t, |_, _| 0.1 * s.normal());
        let stage = StageOne { tau: 0.5, ytilde: y, converged: vec![true; t], periods: (1..=t).map(|i| i.to_string()).collect(), min_period_size: 50 };
        let fit = fit(&stage, 2).unwrap();
        (stage, fit)
    }

    #[test]
    fn unit_weights_reproduce_fit() {
        let (stage, fit) = base_fit(1);
        let d = draw_from_stage(&stage.ytilde, &fit.f_hat).unwrap();
        assert!((&d.a_star - &fit.a_hat).amax() < 1e-9);
        assert!((&d.b_star - &fit.b_hat).amax() < 1e-9);
        assert!((&d.f_star - &fit.f_hat).amax() < 1e-9);
    }

    #[test]
    fn weights_positive_and_reproducible() {
        let w1 = draw_weights(&mut Stream::new(3), 1000);
        let w2 = draw_weights(&mut Stream::new(3), 1000);
        assert_eq!(w1, w2);
        assert!(w1.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn quantile_convention() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(empirical_quantile(&v, 0.95), 19.0);
        assert_eq!(empirical_quantile(&v, 0.951), 20.0);
        assert_eq!(empirical_quantile(&v, 0.0), 1.0);
    }

    fn identical_draws(fit: &QrpcaFit, n: usize) -> Vec<BootstrapDraw> {
        vec![BootstrapDraw { a_star: fit.a_hat.clone(), b_star: fit.b_hat.clone(), f_star: fit.f_hat.clone() }; n]
    }

    #[test]
    fn zero_width_bands_for_identical_draws() {
        let (_, fit) = base_fit(2);
        let bands = bootstrap_bands(&identical_draws(&fit, 19), &fit, 0.1).unwrap();
        assert_eq!(bands.a_lower, fit.a_hat);
        assert_eq!(bands.a_upper, fit.a_hat);
        assert_eq!(bands.b_lower, fit.b_hat);
        assert!(matches!(bootstrap_bands(&identical_draws(&fit, 19), &fit, 1.0), Err(BootstrapError::InvalidLevel(_))));
        assert!(matches!(bootstrap_bands(&identical_draws(&fit, 18), &fit, 0.1), Err(BootstrapError::TooFewDraws(18))));
    }

    #[test]
    fn zero_intercept_not_rejected() {
        let (_, mut fit) = base_fit(3);
        fit.a_hat = DVector::zeros(6);
        let mut draws = identical_draws(&fit, 19);
        for (i, d) in draws.iter_mut().enumerate() {
            d.a_star[0] = 0.01 * i as f64;
        }
        let test = alpha_test_from_draws(&fit, &draws, 0.05).unwrap();
        assert_eq!(test.statistic, 0.0);
        assert!(!test.reject);
        assert_eq!(test.p_value, 1.0);
    }

    #[test]
    fn p_value_and_monotone_rejection() {
        let (stage, fit) = base_fit(4);
        let mut s = Stream::new(9);
        let draws: Vec<BootstrapDraw> = (0..99)
            .map(|_| {
                let noisy = &stage.ytilde + DMatrix::from_fn(6, 20, |_, _| 0.3 * s.normal());
                draw_from_stage(&noisy, &fit.f_hat).unwrap()
            })
            .collect();
        let mut last = false;
        for level in [0.01, 0.05, 0.1, 0.2, 0.5, 0.9] {
            let t = alpha_test_from_draws(&fit, &draws, level).unwrap();
            assert!(t.p_value > 0.0 && t.p_value <= 1.0);
            assert_eq!(t.reject, t.statistic > t.critical_value);
            assert!(!last || t.reject);
            last = t.reject;
        }
    }
}
