//! Monte Carlo harness: the three benchmark data generating processes with
//! their population parameters, rotation-adjusted error metrics and a
//! seeded, parallel replication driver.
//!
//! Random draws within a replication follow a fixed order: initial factor,
//! factor innovations, `sigma_t`, `g_t` (second process only), initial
//! second characteristic, then per period and unit the three characteristic
//! innovations, and finally the idiosyncratic errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::bootstrap;
use crate::error::Result;
use crate::estimate::{self, Designs, QrpcaFit};
use crate::panel::Panel;
use crate::rng::{child_seed, Stream, GENERATOR_VERSION};
use crate::sieve::{Basis, BasisSpec};
use crate::spectral::{rotation_h, SpectralError};

/// Burn-in periods discarded from autoregressive error processes.
pub const BURN_IN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorModel {
    /// independent standard normal errors
    M1,
    /// independent `t_3` errors
    M2,
    /// serially and cross-sectionally correlated normal errors
    M3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DgpKind {
    /// Additive `t_nu` errors, polynomial basis without intercept (`P = 6`).
    Dgp1 { nu: f64 },
    /// Volatility factor `3 |g_t| e_it`, polynomial basis with intercept (`P = 7`).
    Dgp2 { model: ErrorModel },
    /// No intercept function, AR(1) normal errors; used for the intercept test.
    Dgp3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpSpec {
    pub dgp: DgpKind,
    pub n: usize,
    pub t: usize,
}

/// Population quantities at one quantile index.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTruth {
    /// `None` where the intercept function is not representable in the basis.
    pub a: Option<DVector<f64>>,
    pub b: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub k: usize,
}

/// A generated panel together with what is needed to compute its truth.
#[derive(Debug, Clone)]
pub struct SimData {
    pub spec: DgpSpec,
    pub panel: Panel,
    pub basis: Basis,
    /// `T x 2` mean factors.
    pub factors: DMatrix<f64>,
    /// Volatility factor draws (second process only).
    pub g: Option<Vec<f64>>,
}

struct Common {
    f: DMatrix<f64>,
    g: Option<Vec<f64>>,
    /// per characteristic, `N x T`
    z: [DMatrix<f64>; 3],
}

fn common(n: usize, t: usize, with_g: bool, s: &mut Stream) -> Common {
    let sd0 = (1.0f64 / 0.91).sqrt();
    let mut prev = [s.normal() * sd0, s.normal() * sd0];
    let mut f = DMatrix::zeros(t, 2);
    for tt in 0..t {
        for (k, p) in prev.iter_mut().enumerate() {
            *p = 0.3 * *p + s.normal();
            f[(tt, k)] = *p;
        }
    }
    let sigma: Vec<f64> = (0..t).map(|_| s.uniform_range(1.0, 2.0)).collect();
    let g = with_g.then(|| (0..t).map(|_| s.uniform()).collect::<Vec<f64>>());
    let mut z2_prev: Vec<f64> = (0..n).map(|_| s.normal()).collect();
    let mut z = [DMatrix::zeros(n, t), DMatrix::zeros(n, t), DMatrix::zeros(n, t)];
    for tt in 0..t {
        for i in 0..n {
            let (u1, u2, u3) = (s.normal(), s.normal(), s.normal());
            z[0][(i, tt)] = sigma[tt] * u1;
            z2_prev[i] = 0.3 * z2_prev[i] + u2;
            z[1][(i, tt)] = z2_prev[i];
            z[2][(i, tt)] = u3;
        }
    }
    Common { f, g, z }
}

fn alpha(z1: f64) -> f64 {
    z1 + 0.5 * z1 * z1
}

fn beta(z2: f64, z3: f64) -> [f64; 2] {
    [z2 + 0.5 * z2 * z2, 2.0 * z3 + z3 * z3]
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Innovation {
    Normal,
    StudentT(f64),
}

/// `e_it = rho e_{i,t-1} + v_it + omega sum_{0 < |j - i| <= L} v_jt` with
/// circular neighbours, started at zero and run through [`BURN_IN`] periods.
fn ar_errors(n: usize, t: usize, rho: f64, omega: f64, l: usize, innov: Innovation, s: &mut Stream) -> DMatrix<f64> {
    let mut e = vec![0.0; n];
    let mut out = DMatrix::zeros(n, t);
    let mut v = vec![0.0; n];
    for step in 0..BURN_IN + t {
        for vi in v.iter_mut() {
            *vi = match innov {
                Innovation::Normal => s.normal(),
                Innovation::StudentT(nu) => s.student_t(nu),
            };
        }
        for i in 0..n {
            let mut cross = 0.0;
            if omega != 0.0 {
                for d in 1..=l {
                    cross += v[(i + d) % n] + v[(i + n - d % n) % n];
                }
            }
            e[i] = rho * e[i] + v[i] + omega * cross;
        }
        if step >= BURN_IN {
            out.column_mut(step - BURN_IN).copy_from_slice(&e);
        }
    }
    out
}

fn error_params(model: ErrorModel) -> (f64, f64, usize, Innovation) {
    match model {
        ErrorModel::M1 => (0.0, 0.0, 0, Innovation::Normal),
        ErrorModel::M2 => (0.0, 0.0, 0, Innovation::StudentT(3.0)),
        ErrorModel::M3 => (0.2, 0.2, 3, Innovation::Normal),
    }
}

fn finish(spec: DgpSpec, y: DMatrix<f64>, c: Common, basis_spec: &BasisSpec) -> SimData {
    let panel = Panel::from_balanced(&y, &c.z).expect("generated panel is finite and nonempty");
    let basis = Basis::new(basis_spec, 3).expect("polynomial basis");
    SimData { spec, panel, basis, factors: c.f, g: c.g }
}

fn check_size(spec: &DgpSpec) {
    assert!(spec.n >= 1 && spec.t >= 1, "N and T must be positive");
}

pub fn gen_dgp1(spec: DgpSpec, nu: f64, s: &mut Stream) -> SimData {
    check_size(&spec);
    let (n, t) = (spec.n, spec.t);
    let c = common(n, t, false, s);
    let mut y = DMatrix::zeros(n, t);
    for tt in 0..t {
        for i in 0..n {
            let b = beta(c.z[1][(i, tt)], c.z[2][(i, tt)]);
            y[(i, tt)] = alpha(c.z[0][(i, tt)]) + b[0] * c.f[(tt, 0)] + b[1] * c.f[(tt, 1)];
        }
    }
    for tt in 0..t {
        for i in 0..n {
            y[(i, tt)] += s.student_t(nu);
        }
    }
    finish(spec, y, c, &BasisSpec::polynomial(2, false))
}

pub fn gen_dgp2(spec: DgpSpec, model: ErrorModel, s: &mut Stream) -> SimData {
    check_size(&spec);
    let (n, t) = (spec.n, spec.t);
    let c = common(n, t, true, s);
    let (rho, omega, l, innov) = error_params(model);
    let e = ar_errors(n, t, rho, omega, l, innov, s);
    let g = c.g.as_ref().expect("volatility factor drawn");
    let y = DMatrix::from_fn(n, t, |i, tt| {
        let b = beta(c.z[1][(i, tt)], c.z[2][(i, tt)]);
        alpha(c.z[0][(i, tt)]) + b[0] * c.f[(tt, 0)] + b[1] * c.f[(tt, 1)] + 3.0 * g[tt].abs() * e[(i, tt)]
    });
    finish(spec, y, c, &BasisSpec::polynomial(2, true))
}

pub fn gen_dgp3(spec: DgpSpec, s: &mut Stream) -> SimData {
    check_size(&spec);
    let (n, t) = (spec.n, spec.t);
    let c = common(n, t, false, s);
    let e = ar_errors(n, t, 0.3, 0.0, 0, Innovation::Normal, s);
    let y = DMatrix::from_fn(n, t, |i, tt| {
        let b = beta(c.z[1][(i, tt)], c.z[2][(i, tt)]);
        b[0] * c.f[(tt, 0)] + b[1] * c.f[(tt, 1)] + e[(i, tt)]
    });
    finish(spec, y, c, &BasisSpec::polynomial(2, true))
}

/// Draws one data set from `stream`.
pub fn generate(spec: DgpSpec, stream: &mut Stream) -> SimData {
    match spec.dgp {
        DgpKind::Dgp1 { nu } => gen_dgp1(spec, nu, stream),
        DgpKind::Dgp2 { model } => gen_dgp2(spec, model, stream),
        DgpKind::Dgp3 => gen_dgp3(spec, stream),
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// `tau`-quantile of the stationary marginal of the error `e_it`.
pub fn error_quantile(dgp: DgpKind, tau: f64) -> f64 {
    match dgp {
        DgpKind::Dgp1 { nu } => StudentsT::new(0.0, 1.0, nu).expect("t distribution").inverse_cdf(tau),
        DgpKind::Dgp2 { model: ErrorModel::M1 } => std_normal().inverse_cdf(tau),
        DgpKind::Dgp2 { model: ErrorModel::M2 } => StudentsT::new(0.0, 1.0, 3.0).expect("t distribution").inverse_cdf(tau),
        DgpKind::Dgp2 { model: ErrorModel::M3 } => {
            let (rho, omega, l, _) = error_params(ErrorModel::M3);
            ((1.0 + 2.0 * l as f64 * omega * omega) / (1.0 - rho * rho)).sqrt() * std_normal().inverse_cdf(tau)
        }
        DgpKind::Dgp3 => std_normal().inverse_cdf(tau) / 0.91f64.sqrt(),
    }
}

/// Mean-factor loadings in the coefficient space of the basis; `offset` is
/// 1 when the basis has an intercept.
fn mean_loadings(offset: usize) -> DMatrix<f64> {
    let p = 6 + offset;
    let mut b = DMatrix::zeros(p, 2);
    b[(offset + 2, 0)] = 1.0;
    b[(offset + 3, 0)] = 0.5;
    b[(offset + 4, 1)] = 2.0;
    b[(offset + 5, 1)] = 1.0;
    b
}

/// Number of factors at `tau`.
pub fn true_k(dgp: DgpKind, tau: f64) -> usize {
    match dgp {
        DgpKind::Dgp2 { .. } if tau != 0.5 => 3,
        _ => 2,
    }
}

impl SimData {
    /// Intercept vector, loadings and factors at `tau` in the parameterization
    /// with `a'B = 0`.
    pub fn truth(&self, tau: f64) -> SimTruth {
        match self.spec.dgp {
            DgpKind::Dgp1 { .. } => {
                let a = (tau == 0.5).then(|| DVector::from_vec(vec![1.0, 0.5, 0.0, 0.0, 0.0, 0.0]));
                SimTruth { a, b: mean_loadings(0), f: self.factors.clone(), k: 2 }
            }
            DgpKind::Dgp2 { .. } => {
                let a = Some(DVector::from_vec(vec![0.0, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0]));
                if true_k(self.spec.dgp, tau) == 2 {
                    return SimTruth { a, b: mean_loadings(1), f: self.factors.clone(), k: 2 };
                }
                let q = error_quantile(self.spec.dgp, tau);
                let b = mean_loadings(1).insert_column(2, 0.0);
                let mut b = b;
                b[(0, 2)] = 3.0 * q;
                let g = self.g.as_ref().expect("volatility factor");
                let mut f = self.factors.clone().insert_column(2, 0.0);
                for (tt, gt) in g.iter().enumerate() {
                    f[(tt, 2)] = gt.abs();
                }
                SimTruth { a, b, f, k: 3 }
            }
            DgpKind::Dgp3 => {
                let mut a = DVector::zeros(7);
                a[0] = error_quantile(self.spec.dgp, tau);
                SimTruth { a: Some(a), b: mean_loadings(1), f: self.factors.clone(), k: 2 }
            }
        }
    }
}

/// Rotation-adjusted squared errors for one fit:
/// `|a_hat - a|^2`, `|B_hat - B H|_F^2` and `|F_hat - F (H')^{-1}|_F^2 / T`
/// with `H = (F' M_T F_hat)(F_hat' M_T F_hat)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mse {
    pub a: Option<f64>,
    pub b: f64,
    pub f: f64,
}

pub fn mse_metrics(fit: &QrpcaFit, truth: &SimTruth) -> std::result::Result<Mse, SpectralError> {
    if fit.k != truth.k || fit.b_hat.nrows() != truth.b.nrows() {
        return Err(SpectralError::DimensionMismatch(format!("fit K = {}, true K = {}", fit.k, truth.k)));
    }
    let h = rotation_h(&truth.f, &fit.f_hat)?;
    let ht_inv = h.transpose().try_inverse().ok_or(SpectralError::SingularGram)?;
    let t = fit.f_hat.nrows() as f64;
    Ok(Mse {
        a: truth.a.as_ref().map(|a| (&fit.a_hat - a).norm_squared()),
        b: (&fit.b_hat - &truth.b * &h).norm_squared(),
        f: (&fit.f_hat - &truth.f * ht_inv).norm_squared() / t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSettings {
    pub draws: usize,
    pub level: f64,
}

/// Everything that determines a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dgp: DgpKind,
    pub n: usize,
    pub t: usize,
    pub taus: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<TestSettings>,
}

impl SimConfig {
    pub fn spec(&self) -> DgpSpec {
        DgpSpec { dgp: self.dgp, n: self.n, t: self.t }
    }
}

/// Outcome of one replication at one quantile index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauOutcome {
    pub k_true: usize,
    pub k_ratio: usize,
    pub k_threshold: usize,
    pub mse: Mse,
    pub reject: Option<bool>,
}

/// One replication: data from `child_seed(seed, [r])`, bootstrap draws of
/// quantile index `j` from `child_seed(seed, [r, j, 1])`.
pub fn replicate(config: &SimConfig, r: usize) -> Vec<std::result::Result<TauOutcome, String>> {
    let mut stream = Stream::new(child_seed(config.seed, &[r as u64]));
    let data = generate(config.spec(), &mut stream);
    let designs = match Designs::new(&data.panel, &data.basis) {
        Ok(d) => d,
        Err(e) => return config.taus.iter().map(|_| Err(e.to_string())).collect(),
    };
    config
        .taus
        .iter()
        .enumerate()
        .map(|(j, &tau)| replicate_tau(config, &data, &designs, r, j, tau).map_err(|e| e.to_string()))
        .collect()
}

fn replicate_tau(config: &SimConfig, data: &SimData, designs: &Designs, r: usize, j: usize, tau: f64) -> Result<TauOutcome> {
    let truth = data.truth(tau);
    let stage = estimate::stage_one_with(&data.panel, designs, tau, None)?;
    let eigvals = estimate::eigenvalues(&stage)?;
    let sel = estimate::select_for_stage(&stage, &eigvals, config.kmax, config.lambda)?;
    let fit = estimate::fit(&stage, truth.k)?;
    let mse = mse_metrics(&fit, &truth)?;
    let reject = match config.test {
        Some(ts) => {
            let seed = child_seed(config.seed, &[r as u64, j as u64, 1]);
            let draws = bootstrap::run_draws(&data.panel, designs, &fit, ts.draws, seed)?;
            Some(bootstrap::alpha_test_from_draws(&fit, &draws, ts.level)?.reject)
        }
        None => None,
    };
    Ok(TauOutcome { k_true: truth.k, k_ratio: sel.k_ratio, k_threshold: sel.k_threshold, mse, reject })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauSummary {
    pub tau: f64,
    pub k_true: usize,
    pub n_ok: usize,
    pub n_failed: usize,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub rep: usize,
    pub tau: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub generator: String,
    pub n_reps: usize,
    pub results: Vec<TauSummary>,
    pub failures: Vec<Failure>,
    /// Per replication and quantile index, in replication order.
    #[serde(skip)]
    pub outcomes: Vec<Vec<std::result::Result<TauOutcome, String>>>,
    /// Not serialized, so that reports are byte-identical across runs.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

fn rate(hits: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Runs `config.reps` replications in parallel and summarizes them in
/// replication order.
pub fn run_replications(config: &SimConfig) -> Result<SimReport> {
    if config.reps == 0 {
        return Err(crate::Error::Config("reps must be at least 1".into()));
    }
    if config.taus.is_empty() {
        return Err(estimate::EstimateError::EmptyTaus.into());
    }
    if let Some(ts) = config.test {
        if ts.draws < bootstrap::MIN_DRAWS {
            return Err(bootstrap::BootstrapError::TooFewDraws(ts.draws).into());
        }
        if !(ts.level > 0.0 && ts.level < 1.0) {
            return Err(bootstrap::BootstrapError::InvalidLevel(ts.level).into());
        }
    }
    let start = std::time::Instant::now();
    let outcomes: Vec<_> = (0..config.reps).into_par_iter().map(|r| replicate(config, r)).collect();

    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (j, &tau) in config.taus.iter().enumerate() {
        let mut ok = Vec::new();
        for (r, rep) in outcomes.iter().enumerate() {
            match &rep[j] {
                Ok(o) => ok.push(o),
                Err(e) => failures.push(Failure { rep: r, tau, error: e.clone() }),
            }
        }
        let n = ok.len();
        let mut metrics = BTreeMap::new();
        let (p, se) = rate(ok.iter().filter(|o| o.k_ratio == o.k_true).count(), n);
        metrics.insert("correct_rate_khat".to_string(), p);
        metrics.insert("correct_rate_khat_se".to_string(), se);
        let (p, se) = rate(ok.iter().filter(|o| o.k_threshold == o.k_true).count(), n);
        metrics.insert("correct_rate_ktilde".to_string(), p);
        metrics.insert("correct_rate_ktilde_se".to_string(), se);
        let mean = |f: &dyn Fn(&TauOutcome) -> Option<f64>| {
            let vals: Vec<f64> = ok.iter().filter_map(|o| f(o)).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        if let Some(v) = mean(&|o| o.mse.a) {
            metrics.insert("mse_a".to_string(), v);
        }
        if let Some(v) = mean(&|o| Some(o.mse.b)) {
            metrics.insert("mse_b".to_string(), v);
        }
        if let Some(v) = mean(&|o| Some(o.mse.f)) {
            metrics.insert("mse_f".to_string(), v);
        }
        if config.test.is_some() {
            let (p, se) = rate(ok.iter().filter(|o| o.reject == Some(true)).count(), n);
            metrics.insert("rejection_rate".to_string(), p);
            metrics.insert("rejection_rate_se".to_string(), se);
        }
        results.push(TauSummary { tau, k_true: true_k(config.dgp, tau), n_ok: n, n_failed: config.reps - n, metrics });
    }
    Ok(SimReport {
        config: config.clone(),
        generator: GENERATOR_VERSION.to_string(),
        n_reps: config.reps,
        results,
        failures,
        outcomes,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Per-replication metrics as CSV.
pub fn outcomes_csv(report: &SimReport) -> String {
    let mut s = String::from("rep,tau,status,k_true,k_ratio,k_threshold,mse_a,mse_b,mse_f,reject\n");
    for (r, rep) in report.outcomes.iter().enumerate() {
        for (tau, o) in report.config.taus.iter().zip(rep) {
            match o {
                Ok(o) => {
                    let reject = o.reject.map_or(String::new(), |b| b.to_string());
                    let _ = writeln!(
                        s,
                        "{r},{tau},ok,{},{},{},{},{},{},{reject}",
                        o.k_true,
                        o.k_ratio,
                        o.k_threshold,
                        opt(o.mse.a),
                        o.mse.b,
                        o.mse.f
                    );
                }
                Err(_) => {
                    let _ = writeln!(s, "{r},{tau},failed,,,,,,,");
                }
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dgp: DgpKind, n: usize, t: usize) -> DgpSpec {
        DgpSpec { dgp, n, t }
    }

    #[test]
    fn factor_stationary_variance() {
        let data = generate(spec(DgpKind::Dgp1 { nu: 3.0 }, 1, 10_000), &mut Stream::new(1));
        for k in 0..2 {
            let col = data.factors.column(k);
            let mean = col.mean();
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64;
            assert!((1.02..=1.18).contains(&var), "var {var}");
        }
    }

    #[test]
    fn truth_orthogonality() {
        for dgp in [DgpKind::Dgp1 { nu: 1.0 }, DgpKind::Dgp2 { model: ErrorModel::M1 }, DgpKind::Dgp2 { model: ErrorModel::M3 }, DgpKind::Dgp3] {
            let data = generate(spec(dgp, 20, 5), &mut Stream::new(2));
            for tau in [0.25, 0.5, 0.75] {
                let truth = data.truth(tau);
                if let Some(a) = &truth.a {
                    assert!((a.transpose() * &truth.b).iter().all(|v| *v == 0.0));
                }
                assert_eq!(truth.b.ncols(), truth.k);
                assert_eq!(truth.f.shape(), (5, truth.k));
                assert_eq!(crate::qreg::numerical_rank(&truth.b), truth.k);
            }
        }
        let data = generate(spec(DgpKind::Dgp2 { model: ErrorModel::M1 }, 20, 5), &mut Stream::new(2));
        assert_eq!(data.truth(0.5).k, 2);
        assert_eq!(data.truth(0.25).k, 3);
    }

    #[test]
    fn deterministic_generation() {
        let s = spec(DgpKind::Dgp2 { model: ErrorModel::M3 }, 30, 4);
        let a = generate(s, &mut Stream::new(7));
        let b = generate(s, &mut Stream::new(7));
        assert_eq!(a.panel, b.panel);
    }

    #[test]
    fn cauchy_panel_is_finite() {
        let data = generate(spec(DgpKind::Dgp1 { nu: 1.0 }, 200, 50), &mut Stream::new(3));
        assert!(data.panel.cross_sections().iter().all(|cs| cs.y.iter().all(|v| v.is_finite())));
    }

    #[test]
    fn m3_marginal_sd() {
        let mut s = Stream::new(4);
        let e = ar_errors(1000, 100, 0.2, 0.2, 3, Innovation::Normal, &mut s);
        let var = e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64;
        assert!((1.10..=1.17).contains(&var.sqrt()), "sd {}", var.sqrt());
    }

    #[test]
    fn dgp3_error_variance() {
        let mut s = Stream::new(5);
        let e = ar_errors(1000, 100, 0.3, 0.0, 0, Innovation::Normal, &mut s);
        let var = e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64;
        assert!((var * 0.91 - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn quantiles() {
        assert_eq!(error_quantile(DgpKind::Dgp2 { model: ErrorModel::M1 }, 0.5), 0.0);
        assert!(error_quantile(DgpKind::Dgp3, 0.5).abs() < 1e-15);
        let q = error_quantile(DgpKind::Dgp2 { model: ErrorModel::M2 }, 0.75);
        assert!((q - 0.764_892_328_404_345).abs() < 1e-9, "{q}");
        let q3 = error_quantile(DgpKind::Dgp2 { model: ErrorModel::M3 }, 0.75);
        let q1 = error_quantile(DgpKind::Dgp2 { model: ErrorModel::M1 }, 0.75);
        assert!((q3 / q1 - (1.24f64 / 0.96).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mse_of_exact_truth_is_zero() {
        let data = generate(spec(DgpKind::Dgp2 { model: ErrorModel::M1 }, 20, 8), &mut Stream::new(6));
        let truth = data.truth(0.25);
        // identified parameterization: orthonormal loadings, rotated factors
        let qr = truth.b.clone().qr();
        let (q, r) = (qr.q(), qr.r());
        let f = &truth.f * r.transpose();
        let ytilde = truth.a.as_ref().unwrap() * DMatrix::from_element(1, 8, 1.0) + &q * f.transpose();
        let stage = estimate::StageOne { tau: 0.25, ytilde, converged: vec![true; 8], periods: (1..=8).map(|i| i.to_string()).collect(), min_period_size: 20 };
        let fit = estimate::fit(&stage, 3).unwrap();
        let m = mse_metrics(&fit, &truth).unwrap();
        assert!(m.a.unwrap() < 1e-16 && m.b < 1e-16 && m.f < 1e-16, "{m:?}");
    }

    #[test]
    fn single_replication_report() {
        let config = SimConfig {
            dgp: DgpKind::Dgp1 { nu: 3.0 },
            n: 60,
            t: 8,
            taus: vec![0.5],
            reps: 1,
            seed: 11,
            kmax: None,
            lambda: None,
            test: None,
        };
        let report = run_replications(&config).unwrap();
        let o = report.outcomes[0][0].as_ref().unwrap();
        let m = &report.results[0].metrics;
        assert_eq!(m["correct_rate_khat"], if o.k_ratio == 2 { 1.0 } else { 0.0 });
        assert_eq!(m["mse_b"], o.mse.b);
        assert_eq!(m["mse_a"], o.mse.a.unwrap());
        assert_eq!(report.results[0].n_ok, 1);
        assert!(outcomes_csv(&report).lines().count() == 2);
    }
}
