//! Two-stage estimation: per-period quantile regressions on the sieve
//! design, then principal components of the stacked coefficient matrix.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::error::{Error, ErrorKind, Result};
use crate::panel::Panel;
use crate::qreg::{numerical_rank, solve_full_rank, QrError, QrProblem};
use crate::selectk::{self, KSelection};
use crate::sieve::Basis;
use crate::spectral::{demean_time, sym_eig, time_mean};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("period {period} has {n} observations, fewer than the basis dimension {p}")]
    InsufficientObservations { period: String, n: usize, p: usize },
    #[error("quantile regression failed in period {period}: {source}")]
    Period {
        period: String,
        #[source]
        source: QrError,
    },
    #[error("number of factors {k} outside 1..={max}")]
    KOutOfRange { k: usize, max: usize },
    #[error("no quantile indices given")]
    EmptyTaus,
    #[error("quantile index {0} outside (0, 1)")]
    InvalidTau(f64),
    #[error("no eigenvalue passes the threshold; the model needs at least one factor")]
    NoFactors,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

impl EstimateError {
    pub(crate) fn kind(&self) -> ErrorKind {
        match self {
            EstimateError::InsufficientObservations { .. } | EstimateError::DimensionMismatch(_) => ErrorKind::Data,
            EstimateError::Period { source, .. } => source.kind(),
            EstimateError::NoFactors => ErrorKind::Numerical,
            _ => ErrorKind::Usage,
        }
    }
}

/// Stage-one coefficients: column `t` is the period-`t` quantile regression
/// of `y` on the sieve design.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOne {
    pub tau: f64,
    /// `P x T`
    pub ytilde: DMatrix<f64>,
    pub converged: Vec<bool>,
    pub periods: Vec<String>,
    /// Smallest number of observations in any period.
    pub min_period_size: usize,
}

impl StageOne {
    pub fn converged_periods(&self) -> usize {
        self.converged.iter().filter(|c| **c).count()
    }
}

/// Sieve design matrices of every period, built once and reused across
/// quantile indices and bootstrap draws.
#[derive(Debug, Clone)]
pub struct Designs {
    mats: Vec<DMatrix<f64>>,
    ranks: Vec<usize>,
    p: usize,
}

impl Designs {
    pub fn new(panel: &Panel, basis: &Basis) -> Result<Self> {
        let p = basis.dim();
        let mats = panel
            .cross_sections()
            .iter()
            .map(|cs| {
                if cs.len() < p {
                    return Err(EstimateError::InsufficientObservations { period: cs.period.clone(), n: cs.len(), p }.into());
                }
                basis.design(cs).map_err(Error::from)
            })
            .collect::<Result<Vec<_>>>()?;
        let ranks = mats.iter().map(numerical_rank).collect();
        Ok(Self { mats, ranks, p })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn get(&self, t: usize) -> &DMatrix<f64> {
        &self.mats[t]
    }
}

pub fn stage_one(panel: &Panel, basis: &Basis, tau: f64) -> Result<StageOne> {
    let designs = Designs::new(panel, basis)?;
    stage_one_with(panel, &designs, tau, None)
}

/// Stage one with prebuilt designs and optional unit weights. `weights` is
/// indexed by position in `panel.units()` and is shared by every period.
pub fn stage_one_with(panel: &Panel, designs: &Designs, tau: f64, weights: Option<&[f64]>) -> Result<StageOne> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(EstimateError::InvalidTau(tau).into());
    }
    if let Some(w) = weights {
        if w.len() != panel.n_units() {
            return Err(EstimateError::DimensionMismatch(format!("{} weights for {} units", w.len(), panel.n_units())).into());
        }
    }
    let sections = panel.cross_sections();
    let cols: Vec<(DVector<f64>, bool)> = sections
        .par_iter()
        .enumerate()
        .map(|(t, cs)| {
            let x = designs.get(t);
            let wrap = |source| EstimateError::Period { period: cs.period.clone(), source };
            let period_w: Option<Vec<f64>> = weights.map(|w| cs.units.iter().map(|&u| w[u]).collect());
            let mut prob = QrProblem::new(x, &cs.y, tau).map_err(wrap)?;
            if let Some(pw) = &period_w {
                prob = prob.with_weights(pw).map_err(wrap)?;
            }
            let (rank, p) = (designs.ranks[t], designs.p);
            if rank < p {
                return Err(wrap(QrError::RankDeficient { rank, p }));
            }
            let sol = solve_full_rank(&prob).map_err(wrap)?;
            Ok((sol.coef, sol.converged))
        })
        .collect::<std::result::Result<_, EstimateError>>()?;
    let p = designs.dim();
    let mut ytilde = DMatrix::zeros(p, cols.len());
    for (t, (c, _)) in cols.iter().enumerate() {
        ytilde.set_column(t, c);
    }
    Ok(StageOne {
        tau,
        ytilde,
        converged: cols.iter().map(|(_, c)| *c).collect(),
        periods: sections.iter().map(|cs| cs.period.clone()).collect(),
        min_period_size: panel.min_period_size(),
    })
}

/// Intercepts, loadings and factors at one quantile index.
#[derive(Debug, Clone, PartialEq)]
pub struct QrpcaFit {
    pub tau: f64,
    pub k: usize,
    /// `P`
    pub a_hat: DVector<f64>,
    /// `P x K`, orthonormal columns
    pub b_hat: DMatrix<f64>,
    /// `T x K`
    pub f_hat: DMatrix<f64>,
    /// Descending spectrum of `Y M_T Y' / T`, length `min(P, T)`.
    pub eigvals: DVector<f64>,
    pub periods: Vec<String>,
    pub converged_periods: usize,
}

/// Spectrum and eigenvectors of `Y M_T Y' / T`.
fn spectrum(ytilde: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let t = ytilde.ncols();
    let centered = demean_time(ytilde);
    let s = &centered * centered.transpose() / t as f64;
    let eig = sym_eig(&s)?;
    let len = ytilde.nrows().min(t);
    let scale = ytilde.norm_squared() / t as f64;
    let vectors = orient_null_space(&eig.values, eig.vectors, &time_mean(ytilde), scale);
    Ok((eig.values.rows(0, len).into_owned(), vectors))
}

/// Within the numerically null eigenspace (eigenvalues at most `1e-12 *
/// scale`) any orthonormal basis is an eigenbasis. Pick the one whose last
/// column carries the component of `ybar` in that space, so that loadings
/// taken from the null space are orthogonal to the time mean.
fn orient_null_space(values: &DVector<f64>, mut vectors: DMatrix<f64>, ybar: &DVector<f64>, scale: f64) -> DMatrix<f64> {
    let p = values.len();
    let Some(start) = (0..p).find(|&j| values[j] <= 1e-12 * scale) else { return vectors };
    let m = p - start;
    if m < 2 {
        return vectors;
    }
    let null = vectors.columns(start, m).into_owned();
    let c = null.transpose() * ybar;
    let norm = c.norm();
    if norm <= 1e-300 {
        return vectors;
    }
    // Householder reflection taking e_last to c / |c|
    let mut v = c / norm;
    v[m - 1] -= 1.0;
    let vn = v.norm_squared();
    let rotated = if vn <= f64::EPSILON * f64::EPSILON {
        null
    } else {
        let h = DMatrix::identity(m, m) - &v * v.transpose() * (2.0 / vn);
        null * h
    };
    vectors.columns_mut(start, m).copy_from(&rotated);
    for j in start..p {
        let col = vectors.column(j);
        let arg = (0..p).fold(0, |a, i| if col[i].abs() > col[a].abs() { i } else { a });
        if col[arg] < 0.0 {
            vectors.column_mut(j).neg_mut();
        }
    }
    vectors
}

/// Eigenvalues of `Y M_T Y' / T` (length `min(P, T)`), as used for selecting `K`.
pub fn eigenvalues(stage: &StageOne) -> Result<DVector<f64>> {
    Ok(spectrum(&stage.ytilde)?.0)
}

/// Principal-components step with `K` factors, `1 <= K <= min(P, T - 1)`.
pub fn fit(stage: &StageOne, k: usize) -> Result<QrpcaFit> {
    let (eigvals, vectors) = spectrum(&stage.ytilde)?;
    fit_from_spectrum(stage, k, eigvals, &vectors)
}

fn fit_from_spectrum(stage: &StageOne, k: usize, eigvals: DVector<f64>, vectors: &DMatrix<f64>) -> Result<QrpcaFit> {
    let (p, t) = stage.ytilde.shape();
    let max = p.min(t.saturating_sub(1));
    if k == 0 || k > max {
        return Err(EstimateError::KOutOfRange { k, max }.into());
    }
    let b_hat = vectors.columns(0, k).into_owned();
    let ybar = time_mean(&stage.ytilde);
    let mut a_hat = &ybar - &b_hat * (b_hat.transpose() * &ybar);
    // second projection brings a'B down to rounding level
    a_hat -= &b_hat * (b_hat.transpose() * &a_hat);
    let f_hat = stage.ytilde.transpose() * &b_hat;
    record_normalization(&a_hat, &b_hat, &f_hat);
    Ok(QrpcaFit {
        tau: stage.tau,
        k,
        a_hat,
        b_hat,
        f_hat,
        eigvals,
        periods: stage.periods.clone(),
        converged_periods: stage.converged_periods(),
    })
}

static FITS: AtomicUsize = AtomicUsize::new(0);
static MAX_BB: AtomicU64 = AtomicU64::new(0);
static MAX_AB: AtomicU64 = AtomicU64::new(0);
static MAX_FF: AtomicU64 = AtomicU64::new(0);

/// Worst normalization deviations over every fit produced in this process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationStats {
    pub fits: usize,
    /// `max |B'B - I|` (Frobenius)
    pub b_orthonormality: f64,
    /// `max_k |a'B_k|`
    pub a_b_orthogonality: f64,
    /// largest off-diagonal of `F' M_T F / T`
    pub f_off_diagonal: f64,
}

pub fn normalization_stats() -> NormalizationStats {
    let get = |a: &AtomicU64| f64::from_bits(a.load(Ordering::Relaxed));
    NormalizationStats {
        fits: FITS.load(Ordering::Relaxed),
        b_orthonormality: get(&MAX_BB),
        a_b_orthogonality: get(&MAX_AB),
        f_off_diagonal: get(&MAX_FF),
    }
}

fn record_normalization(a: &DVector<f64>, b: &DMatrix<f64>, f: &DMatrix<f64>) {
    let k = b.ncols();
    let bb = (b.transpose() * b - DMatrix::identity(k, k)).norm();
    let ab = (b.transpose() * a).amax();
    let fc = demean_time(&f.transpose());
    let ff = &fc * fc.transpose() / f.nrows() as f64;
    let off = (0..k).flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j))).fold(0.0f64, |m, (i, j)| m.max(ff[(i, j)].abs()));
    // non-negative floats order like their bit patterns; NaN maps to +inf
    let bits = |v: f64| if v.is_nan() { f64::INFINITY.to_bits() } else { v.to_bits() };
    MAX_BB.fetch_max(bits(bb), Ordering::Relaxed);
    MAX_AB.fetch_max(bits(ab), Ordering::Relaxed);
    MAX_FF.fetch_max(bits(off), Ordering::Relaxed);
    FITS.fetch_add(1, Ordering::Relaxed);
}

fn check_dim(fit: &QrpcaFit, basis: &Basis) -> Result<()> {
    if fit.a_hat.len() != basis.dim() {
        return Err(EstimateError::DimensionMismatch(format!("fit has P = {}, basis has P = {}", fit.a_hat.len(), basis.dim())).into());
    }
    Ok(())
}

/// `a_hat' phi(z)`.
pub fn predict_alpha(fit: &QrpcaFit, basis: &Basis, z: &[f64]) -> Result<f64> {
    check_dim(fit, basis)?;
    Ok(fit.a_hat.dot(&basis.eval(z)?))
}

/// `B_hat' phi(z)`.
pub fn predict_beta(fit: &QrpcaFit, basis: &Basis, z: &[f64]) -> Result<DVector<f64>> {
    check_dim(fit, basis)?;
    Ok(fit.b_hat.transpose() * basis.eval(z)?)
}

/// How `K` is chosen at each quantile index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KRule {
    Fixed(usize),
    /// Eigenvalue ratio; `None` uses the default `floor(P / 2)`.
    Ratio { kmax: Option<usize> },
    /// Eigenvalue threshold; `None` uses `1 / ln(min_t N_t)`.
    Threshold { lambda: Option<f64> },
}

/// Selection diagnostics for a stage-one result under the default tuning
/// (overridable), with `Kmax` clamped to what the spectrum supports.
pub fn select_for_stage(stage: &StageOne, eigvals: &DVector<f64>, kmax: Option<usize>, lambda: Option<f64>) -> Result<KSelection> {
    let (p, t) = stage.ytilde.shape();
    let (def_kmax, def_lambda) = selectk::default_tuning(stage.min_period_size, p);
    let kmax = selectk::clamp_kmax(kmax.unwrap_or(def_kmax), t, eigvals.len());
    Ok(selectk::select_k(eigvals.as_slice(), kmax, lambda.unwrap_or(def_lambda))?)
}

/// One fit per quantile index, in the order given.
pub fn fit_quantile_path(panel: &Panel, basis: &Basis, taus: &[f64], rule: KRule) -> Result<Vec<QrpcaFit>> {
    if taus.is_empty() {
        return Err(EstimateError::EmptyTaus.into());
    }
    if let Some(&bad) = taus.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(EstimateError::InvalidTau(bad).into());
    }
    let designs = Designs::new(panel, basis)?;
    taus.par_iter()
        .map(|&tau| {
            let stage = stage_one_with(panel, &designs, tau, None)?;
            let (eigvals, vectors) = spectrum(&stage.ytilde)?;
            let k = match rule {
                KRule::Fixed(k) => k,
                KRule::Ratio { kmax } => select_for_stage(&stage, &eigvals, kmax, None)?.k_ratio,
                KRule::Threshold { lambda } => match select_for_stage(&stage, &eigvals, None, lambda)?.k_threshold {
                    0 => return Err(EstimateError::NoFactors.into()),
                    k => k,
                },
            };
            fit_from_spectrum(&stage, k, eigvals, &vectors)
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    tau: f64,
    #[serde(rename = "K")]
    k: usize,
    converged_periods: usize,
    n_periods: usize,
    periods: &'a [String],
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::File::create(path).and_then(|mut f| f.write_all(contents.as_bytes())).map_err(|e| Error::io(path, e))
}

fn header(first: &str, prefix: &str, k: usize) -> String {
    let mut s = first.to_string();
    for j in 1..=k {
        s.push_str(&format!(",{prefix}{j}"));
    }
    s.push('\n');
    s
}

fn row(label: &str, values: impl Iterator<Item = f64>) -> String {
    let mut s = label.to_string();
    for v in values {
        s.push(',');
        s.push_str(&v.to_string());
    }
    s.push('\n');
    s
}

/// Writes `a_hat.csv`, `B_hat.csv`, `F_hat.csv`, `eigvals.csv` and
/// `summary.json` into `dir` (created if missing).
pub fn export_fit(fit: &QrpcaFit, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut a = String::from("j,a_hat\n");
    for (j, v) in fit.a_hat.iter().enumerate() {
        a.push_str(&row(&(j + 1).to_string(), std::iter::once(*v)));
    }
    write_file(&dir.join("a_hat.csv"), &a)?;

    let mut b = header("j", "b", fit.k);
    for (j, r) in fit.b_hat.row_iter().enumerate() {
        b.push_str(&row(&(j + 1).to_string(), r.iter().copied()));
    }
    write_file(&dir.join("B_hat.csv"), &b)?;

    let mut f = header("period", "f", fit.k);
    for (label, r) in fit.periods.iter().zip(fit.f_hat.row_iter()) {
        f.push_str(&row(label, r.iter().copied()));
    }
    write_file(&dir.join("F_hat.csv"), &f)?;

    let mut e = String::from("k,eigval\n");
    for (j, v) in fit.eigvals.iter().enumerate() {
        e.push_str(&row(&(j + 1).to_string(), std::iter::once(*v)));
    }
    write_file(&dir.join("eigvals.csv"), &e)?;

    let summary = Summary {
        tau: fit.tau,
        k: fit.k,
        converged_periods: fit.converged_periods,
        n_periods: fit.periods.len(),
        periods: &fit.periods,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Config(e.to_string()))?;
    write_file(&dir.join("summary.json"), &(json + "\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{Panel, Record};
    use crate::rng::Stream;
    use crate::sieve::BasisSpec;

    /// `Y = a 1' + B F'` with `a'B = 0`, orthonormal `B` and `F` whose
    /// demeaned columns are orthogonal with distinct descending variances.
    pub(crate) fn exact_low_rank(p: usize, t: usize, k: usize, seed: u64) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let mut s = Stream::new(seed);
        let raw = DMatrix::from_fn(p, k + 1, |_, _| s.normal());
        let q = raw.qr().q();
        let b = q.columns(0, k).into_owned();
        let a = q.column(k) * 2.0;
        let g = DMatrix::from_fn(t, k, |_, _| s.normal());
        let gc = demean_time(&g.transpose()).transpose();
        let q = gc.qr().q();
        let mut f = DMatrix::zeros(t, k);
        for j in 0..k {
            let scale = ((k - j) as f64 + 1.0) * (t as f64).sqrt();
            f.set_column(j, &(q.column(j) * scale));
        }
        // shift factor means; the demeaned structure is unchanged
        for j in 0..k {
            f.column_mut(j).add_scalar_mut(0.3 * j as f64);
        }
        let y = &a * DMatrix::from_element(1, t, 1.0) + &b * f.transpose();
        (a, b, f, y)
    }

    fn stage_of(y: DMatrix<f64>) -> StageOne {
        let t = y.ncols();
        StageOne { tau: 0.5, ytilde: y, converged: vec![true; t], periods: (1..=t).map(|i| i.to_string()).collect(), min_period_size: 10 }
    }

    #[test]
    fn exact_recovery_up_to_sign() {
        let (a, b, f, y) = exact_low_rank(7, 12, 3, 1);
        let fit = fit(&stage_of(y), 3).unwrap();
        assert!((&fit.a_hat - &a).amax() < 1e-10);
        for j in 0..3 {
            let sign = if fit.b_hat.column(j).dot(&b.column(j)) > 0.0 { 1.0 } else { -1.0 };
            assert!((fit.b_hat.column(j) - b.column(j) * sign).amax() < 1e-9);
            assert!((fit.f_hat.column(j) - f.column(j) * sign).amax() < 1e-9);
        }
    }

    #[test]
    fn normalization() {
        let mut s = Stream::new(2);
        let y = DMatrix::from_fn(6, 15, |_, _| s.normal());
        let fit = fit(&stage_of(y), 2).unwrap();
        let btb = fit.b_hat.transpose() * &fit.b_hat;
        assert!((btb - DMatrix::identity(2, 2)).amax() <= 1e-10);
        assert!((fit.a_hat.transpose() * &fit.b_hat).amax() <= 1e-10);
        let fc = demean_time(&fit.f_hat.transpose());
        let cov = &fc * fc.transpose() / 15.0;
        assert!(cov[(0, 1)].abs() <= 1e-8);
        assert!((cov[(0, 0)] - fit.eigvals[0]).abs() <= 1e-8 && (cov[(1, 1)] - fit.eigvals[1]).abs() <= 1e-8);
        assert_eq!(fit.eigvals.len(), 6);
    }

    #[test]
    fn no_factor_variation() {
        let a = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let y = &a * DMatrix::from_element(1, 5, 1.0);
        let fit = fit(&stage_of(y), 1).unwrap();
        assert!((&fit.a_hat - &a).amax() < 1e-12);
        let fc = demean_time(&fit.f_hat.transpose());
        assert!(fc.amax() < 1e-12);
    }

    #[test]
    fn k_out_of_range() {
        let y = DMatrix::from_fn(6, 3, |i, j| (i * j) as f64);
        assert!(matches!(fit(&stage_of(y.clone()), 3), Err(Error::Estimate(EstimateError::KOutOfRange { k: 3, max: 2 }))));
        assert!(matches!(fit(&stage_of(y), 0), Err(Error::Estimate(EstimateError::KOutOfRange { .. }))));
    }

    fn noiseless_panel(n: usize, t: usize, seed: u64) -> (Panel, DMatrix<f64>) {
        let mut s = Stream::new(seed);
        let coefs = DMatrix::from_fn(5, t, |_, _| s.normal());
        let mut records = Vec::new();
        for tt in 0..t {
            for i in 0..n {
                let z = vec![s.normal(), s.normal()];
                let phi = [1.0, z[0], z[0] * z[0], z[1], z[1] * z[1]];
                let y: f64 = phi.iter().zip(coefs.column(tt).iter()).map(|(a, b)| a * b).sum();
                records.push(Record { unit: format!("u{i:03}"), period: (tt + 1).to_string(), y, z });
            }
        }
        (Panel::from_records(records).unwrap(), coefs)
    }

    #[test]
    fn stage_one_interpolates_noiseless_quantile() {
        let (panel, coefs) = noiseless_panel(40, 4, 3);
        let basis = Basis::new(&BasisSpec::polynomial(2, true), 2).unwrap();
        for tau in [0.2, 0.5, 0.8] {
            let stage = stage_one(&panel, &basis, tau).unwrap();
            assert!((&stage.ytilde - &coefs).amax() < 1e-6);
            assert_eq!(stage.converged_periods(), 4);
        }
    }

    #[test]
    fn insufficient_observations() {
        let (panel, _) = noiseless_panel(4, 2, 4);
        let basis = Basis::new(&BasisSpec::polynomial(2, true), 2).unwrap();
        let err = stage_one(&panel, &basis, 0.5).unwrap_err();
        assert!(matches!(err, Error::Estimate(EstimateError::InsufficientObservations { n: 4, p: 5, .. })), "{err}");
    }

    #[test]
    fn single_period() {
        let (panel, _) = noiseless_panel(20, 1, 5);
        let basis = Basis::new(&BasisSpec::polynomial(2, true), 2).unwrap();
        assert_eq!(stage_one(&panel, &basis, 0.5).unwrap().ytilde.ncols(), 1);
    }

    #[test]
    fn predictions() {
        let basis = Basis::new(&BasisSpec::polynomial(1, true), 2).unwrap();
        let fit = QrpcaFit {
            tau: 0.5,
            k: 2,
            a_hat: DVector::from_vec(vec![1.0, 0.0, 0.0]),
            b_hat: DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
            f_hat: DMatrix::zeros(4, 2),
            eigvals: DVector::zeros(3),
            periods: vec![],
            converged_periods: 0,
        };
        assert_eq!(predict_alpha(&fit, &basis, &[3.0, -1.0]).unwrap(), 1.0);
        assert_eq!(predict_beta(&fit, &basis, &[3.0, -1.0]).unwrap().as_slice(), &[3.0, -1.0]);
        let wrong = Basis::new(&BasisSpec::polynomial(2, true), 2).unwrap();
        assert!(predict_alpha(&fit, &wrong, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn path_rules() {
        let (panel, _) = noiseless_panel(30, 6, 6);
        let basis = Basis::new(&BasisSpec::polynomial(2, true), 2).unwrap();
        assert_eq!(fit_quantile_path(&panel, &basis, &[0.5], KRule::Fixed(2)).unwrap().len(), 1);
        assert!(matches!(fit_quantile_path(&panel, &basis, &[], KRule::Fixed(2)), Err(Error::Estimate(EstimateError::EmptyTaus))));
        let fits = fit_quantile_path(&panel, &basis, &[0.25, 0.75], KRule::Ratio { kmax: None }).unwrap();
        assert!(fits.iter().all(|f| f.k >= 1));
    }

    #[test]
    fn export_files() {
        let (_, _, _, y) = exact_low_rank(5, 8, 2, 7);
        let fit = fit(&stage_of(y), 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        export_fit(&fit, dir.path()).unwrap();
        let f = fs::read_to_string(dir.path().join("F_hat.csv")).unwrap();
        assert_eq!(f.lines().count(), 9);
        assert_eq!(f.lines().next().unwrap(), "period,f1,f2");
        let b = fs::read_to_string(dir.path().join("B_hat.csv")).unwrap();
        assert_eq!(b.lines().count(), 6);
        let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["K"], 2);
    }
}
