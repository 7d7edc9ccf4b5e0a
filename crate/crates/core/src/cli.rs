//! Command-line interface.
//!
//! Every subcommand accepts `--config <file.json>` holding the same keys as
//! its long flags (with `-` written as `_`); flags given on the command line
//! take precedence. Unknown keys are rejected.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::bootstrap::{self, AlphaTest, RowTest};
use crate::error::{Error, ErrorKind, Result};
use crate::estimate::{self, Designs, KRule};
use crate::evaluate::{self, InSampleR2, OutOfSampleR2};
use crate::mc::{self, DgpKind, ErrorModel, SimConfig, TestSettings};
use crate::panel::{self, Panel, Schema};
use crate::selectk::{self, KSelection};
use crate::sieve::{Basis, BasisSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Usage => EXIT_USAGE,
        ErrorKind::Data => EXIT_DATA,
        ErrorKind::Numerical => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Parser)]
#[command(name = "qrpca", version, about = "Quantile factor models with characteristic-driven intercepts and loadings")]
pub struct Cli {
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit intercepts, loadings and factors at one or more quantile indices.
    Estimate(EstimateArgs),
    /// Estimate the number of factors from an eigenvalue spectrum.
    SelectK(SelectKArgs),
    /// Bootstrap test of a zero intercept function.
    TestAlpha(TestAlphaArgs),
    /// Monte Carlo replications of a benchmark data generating process.
    Simulate(SimulateArgs),
    /// In-sample and out-of-sample R² of factors on a panel of returns.
    Evaluate(EvaluateArgs),
}

fn json_arg(s: &str) -> std::result::Result<Value, String> {
    Ok(Value::String(s.to_string()))
}

/// Where the panel comes from and how it is expanded.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DataArgs {
    /// Long-format panel CSV.
    #[arg(long)]
    pub panel: Option<PathBuf>,
    /// Unit identifier column [default: unit].
    #[arg(long)]
    pub unit_col: Option<String>,
    /// Period column [default: time].
    #[arg(long)]
    pub time_col: Option<String>,
    /// Response column [default: y].
    #[arg(long)]
    pub y_col: Option<String>,
    /// Characteristic columns, comma separated [default: all other columns].
    #[arg(long, value_delimiter = ',')]
    pub z_cols: Option<Vec<String>>,
    /// Characteristics replaced by their per-period relative ranks in [-0.5, 0.5].
    #[arg(long, value_delimiter = ',')]
    pub rank: Option<Vec<String>>,
    /// Sieve basis: inline JSON or a path to a JSON file
    /// [default: {"family":"polynomial","degree":2,"intercept":true}].
    #[arg(long, value_parser = json_arg)]
    pub basis: Option<Value>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct EstimateArgs {
    /// JSON file with defaults for any of the flags below.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Quantile indices, comma separated [default: 0.5].
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    /// Number of factors: a positive integer, `ratio` or `threshold` [default: ratio].
    #[arg(long)]
    pub k: Option<String>,
    /// Largest K considered by the ratio rule [default: floor(P / 2)].
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Eigenvalue threshold [default: 1 / ln(min_t N_t)].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Output directory; one `tau_<tau>` subdirectory per quantile index.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SelectKArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Eigenvalue CSV (as written by `estimate`); replaces the panel.
    #[arg(long)]
    pub eigvals: Option<PathBuf>,
    /// Cross-section size for the default threshold when reading `--eigvals`.
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Quantile index when estimating from a panel [default: 0.5].
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Also write the JSON result to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct TestAlphaArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Quantile index [default: 0.5].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Number of factors [default: eigenvalue ratio].
    #[arg(long)]
    pub k: Option<usize>,
    /// Bootstrap draws, at least 19 [default: 499].
    #[arg(long)]
    pub draws: Option<usize>,
    /// Significance level [default: 0.05].
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the JSON result to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write bootstrap intervals for `a` and `B` and row tests to this file.
    #[arg(long)]
    pub bands: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// `dgp1`, `dgp2` or `dgp3`.
    #[arg(long)]
    pub dgp: Option<String>,
    /// Degrees of freedom of the DGP1 errors [default: 1].
    #[arg(long)]
    pub nu: Option<f64>,
    /// DGP2 error model: `m1`, `m2` or `m3` [default: m1].
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    /// Quantile indices, comma separated [default: 0.5].
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    /// Replications [default: 100].
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Bootstrap draws for the zero-intercept test (off unless given).
    #[arg(long)]
    pub draws: Option<usize>,
    /// Test level [default: 0.05].
    #[arg(long)]
    pub level: Option<f64>,
    /// Report JSON path (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-replication metrics CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Wide CSV: `period,<portfolio>,...`, one row per period.
    #[arg(long)]
    pub returns: Option<PathBuf>,
    /// Wide CSV: `period,<factor>,...`, rows matching `--returns`.
    #[arg(long)]
    pub factors: Option<PathBuf>,
    /// Initial estimation window [default: 240].
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Also write the JSON result to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv`, runs the command and returns the process exit code.
/// Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e.kind())
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Estimate(a) => cmd_estimate(resolve(&a, a.config.as_deref())?),
        Command::SelectK(a) => cmd_select_k(resolve(&a, a.config.as_deref())?),
        Command::TestAlpha(a) => cmd_test_alpha(resolve(&a, a.config.as_deref())?),
        Command::Simulate(a) => cmd_simulate(resolve(&a, a.config.as_deref())?),
        Command::Evaluate(a) => cmd_evaluate(resolve(&a, a.config.as_deref())?),
    })
}

/// Overlays the flags that were given on the config file.
fn resolve<T: Serialize + DeserializeOwned + Default>(flags: &T, config: Option<&Path>) -> Result<T> {
    let Some(path) = config else { return to_object(flags).and_then(from_object) };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let Value::Object(mut merged) = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))? else {
        return Err(Error::Config(format!("{}: expected a JSON object", path.display())));
    };
    let known = to_object(&T::default())?;
    if let Some(key) = merged.keys().find(|k| !known.contains_key(*k)) {
        return Err(Error::Config(format!("{}: unknown key `{key}`", path.display())));
    }
    for (k, v) in to_object(flags)? {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    from_object(merged)
}

fn to_object<T: Serialize>(v: &T) -> Result<Map<String, Value>> {
    match serde_json::to_value(v) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => unreachable!("argument structs serialize to objects"),
        Err(e) => Err(Error::Config(e.to_string())),
    }
}

fn from_object<T: DeserializeOwned>(m: Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(m)).map_err(|e| Error::Config(e.to_string()))
}

fn basis_spec(value: Option<&Value>) -> Result<BasisSpec> {
    let parse = |v: Value| serde_json::from_value::<BasisSpec>(v).map_err(|e| Error::Config(format!("basis: {e}")));
    match value {
        None => Ok(BasisSpec::polynomial(2, true)),
        Some(Value::String(s)) if s.trim_start().starts_with('{') => parse(serde_json::from_str(s).map_err(|e| Error::Config(format!("basis: {e}")))?),
        Some(Value::String(s)) => {
            let text = fs::read_to_string(s).map_err(|e| Error::io(s, e))?;
            parse(serde_json::from_str(&text).map_err(|e| Error::Config(format!("{s}: {e}")))?)
        }
        Some(v) => parse(v.clone()),
    }
}

fn load_data(d: &DataArgs) -> Result<(Panel, Basis)> {
    let path = d.panel.as_ref().ok_or_else(|| Error::Config("missing --panel".into()))?;
    let defaults = Schema::default();
    let schema = Schema {
        unit: d.unit_col.clone().unwrap_or(defaults.unit),
        time: d.time_col.clone().unwrap_or(defaults.time),
        y: d.y_col.clone().unwrap_or(defaults.y),
        z: d.z_cols.clone(),
    };
    let mut panel = panel::load_panel(path, &schema)?;
    if let Some(names) = &d.rank {
        let cols = names
            .iter()
            .map(|n| panel.char_names().iter().position(|c| c == n).ok_or_else(|| panel::PanelError::MissingColumn(n.clone())))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        panel = panel::rank_transform(&panel, &cols)?;
    }
    let basis = Basis::for_panel(&basis_spec(d.basis.as_ref())?, &panel)?;
    Ok((panel, basis))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Config(e.to_string()))
}

/// Prints `v` as JSON and writes it to `out` when given.
fn emit<T: Serialize>(v: &T, out: Option<&Path>) -> Result<()> {
    let json = to_json(v)?;
    if let Some(path) = out {
        write_text(path, &json)?;
    }
    let _ = std::io::stdout().write_all(json.as_bytes());
    Ok(())
}

fn check_tau(tau: f64) -> Result<f64> {
    if tau > 0.0 && tau < 1.0 {
        Ok(tau)
    } else {
        Err(estimate::EstimateError::InvalidTau(tau).into())
    }
}

fn k_rule(a: &EstimateArgs) -> Result<KRule> {
    match a.k.as_deref() {
        None | Some("ratio") => Ok(KRule::Ratio { kmax: a.kmax }),
        Some("threshold") => Ok(KRule::Threshold { lambda: a.lambda }),
        Some(s) => match s.parse::<usize>() {
            Ok(k) if k > 0 => Ok(KRule::Fixed(k)),
            _ => Err(Error::Config(format!("--k must be a positive integer, `ratio` or `threshold`, got `{s}`"))),
        },
    }
}

/// Directory name for one quantile index, e.g. `tau_0.25`.
pub fn tau_dir(tau: f64) -> String {
    format!("tau_{tau}")
}

#[derive(Serialize)]
struct EstimateSummary {
    n_units: usize,
    n_periods: usize,
    #[serde(rename = "P")]
    p: usize,
    basis: BasisSpec,
    fits: Vec<FitSummary>,
}

#[derive(Serialize)]
struct FitSummary {
    tau: f64,
    #[serde(rename = "K")]
    k: usize,
    converged_periods: usize,
    dir: String,
}

fn cmd_estimate(a: EstimateArgs) -> Result<()> {
    let out = a.out.clone().ok_or_else(|| Error::Config("missing --out".into()))?;
    let taus = a.taus.clone().unwrap_or_else(|| vec![0.5]);
    let rule = k_rule(&a)?;
    let (panel, basis) = load_data(&a.data)?;
    let fits = estimate::fit_quantile_path(&panel, &basis, &taus, rule)?;
    let mut summaries = Vec::new();
    for fit in &fits {
        let dir = tau_dir(fit.tau);
        estimate::export_fit(fit, &out.join(&dir))?;
        summaries.push(FitSummary { tau: fit.tau, k: fit.k, converged_periods: fit.converged_periods, dir });
    }
    let summary = EstimateSummary { n_units: panel.n_units(), n_periods: panel.n_periods(), p: basis.dim(), basis: basis.spec().clone(), fits: summaries };
    emit(&summary, Some(&out.join("summary.json")))
}

#[derive(Serialize)]
struct SelectKOutput {
    #[serde(flatten)]
    selection: KSelection,
    eigvals: Vec<f64>,
}

fn read_eigvals(path: &Path) -> Result<Vec<f64>> {
    let err = |m: String| panel::PanelError::Csv(format!("{}: {m}", path.display()));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| err(e.to_string()))?;
    let headers = reader.headers().map_err(|e| err(e.to_string()))?.clone();
    let col = headers.iter().position(|h| h == "eigval").unwrap_or(headers.len().saturating_sub(1));
    let mut values = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let cell = rec.get(col).unwrap_or_default();
        let v: f64 = cell.parse().map_err(|_| err(format!("not a number: {cell:?}")))?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(err("no eigenvalues".into()).into());
    }
    Ok(values)
}

fn cmd_select_k(a: SelectKArgs) -> Result<()> {
    let (selection, eigvals) = match &a.eigvals {
        Some(path) => {
            let eigvals = read_eigvals(path)?;
            let lambda = match (a.lambda, a.n) {
                (Some(l), _) => l,
                (None, Some(n)) if n > 1 => 1.0 / (n as f64).ln(),
                _ => return Err(Error::Config("with --eigvals give --lambda or --n (> 1)".into())),
            };
            let len = eigvals.len();
            let kmax = selectk::clamp_kmax(a.kmax.unwrap_or((len / 2).max(1)), len + 1, len);
            (selectk::select_k(&eigvals, kmax, lambda)?, eigvals)
        }
        None => {
            let (panel, basis) = load_data(&a.data)?;
            let stage = estimate::stage_one(&panel, &basis, check_tau(a.tau.unwrap_or(0.5))?)?;
            let eigvals = estimate::eigenvalues(&stage)?;
            (estimate::select_for_stage(&stage, &eigvals, a.kmax, a.lambda)?, eigvals.as_slice().to_vec())
        }
    };
    emit(&SelectKOutput { selection, eigvals }, a.out.as_deref())
}

#[derive(Serialize)]
struct TestAlphaOutput {
    tau: f64,
    #[serde(rename = "K")]
    k: usize,
    seed: u64,
    #[serde(flatten)]
    test: AlphaTest,
}

#[derive(Serialize)]
struct BandsOutput {
    tau: f64,
    level: f64,
    a_hat: Vec<f64>,
    a_lower: Vec<f64>,
    a_upper: Vec<f64>,
    /// rows of `B`
    b_hat: Vec<Vec<f64>>,
    b_lower: Vec<Vec<f64>>,
    b_upper: Vec<Vec<f64>>,
    row_tests: Vec<RowTest>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn cmd_test_alpha(a: TestAlphaArgs) -> Result<()> {
    let tau = check_tau(a.tau.unwrap_or(0.5))?;
    let n_draws = a.draws.unwrap_or(499);
    let level = a.level.unwrap_or(0.05);
    let seed = a.seed.unwrap_or(0);
    if n_draws < bootstrap::MIN_DRAWS {
        return Err(bootstrap::BootstrapError::TooFewDraws(n_draws).into());
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(bootstrap::BootstrapError::InvalidLevel(level).into());
    }
    let (panel, basis) = load_data(&a.data)?;
    let designs = Designs::new(&panel, &basis)?;
    let stage = estimate::stage_one_with(&panel, &designs, tau, None)?;
    let k = match a.k {
        Some(k) => k,
        None => {
            let eigvals = estimate::eigenvalues(&stage)?;
            estimate::select_for_stage(&stage, &eigvals, None, None)?.k_ratio
        }
    };
    let base = estimate::fit(&stage, k)?;
    let draws = bootstrap::run_draws(&panel, &designs, &base, n_draws, seed)?;
    let test = bootstrap::alpha_test_from_draws(&base, &draws, level)?;
    if let Some(path) = &a.bands {
        let b = bootstrap::bootstrap_bands(&draws, &base, level)?;
        let out = BandsOutput {
            tau,
            level,
            a_hat: base.a_hat.iter().copied().collect(),
            a_lower: b.a_lower.iter().copied().collect(),
            a_upper: b.a_upper.iter().copied().collect(),
            b_hat: rows(&base.b_hat),
            b_lower: rows(&b.b_lower),
            b_upper: rows(&b.b_upper),
            row_tests: b.row_tests,
        };
        write_text(path, &to_json(&out)?)?;
    }
    emit(&TestAlphaOutput { tau, k, seed, test }, a.out.as_deref())
}

fn sim_config(a: &SimulateArgs) -> Result<SimConfig> {
    let dgp = match a.dgp.as_deref() {
        Some("dgp1") => DgpKind::Dgp1 { nu: a.nu.unwrap_or(1.0) },
        Some("dgp2") => {
            let model = match a.model.as_deref().unwrap_or("m1") {
                "m1" => ErrorModel::M1,
                "m2" => ErrorModel::M2,
                "m3" => ErrorModel::M3,
                other => return Err(Error::Config(format!("unknown error model `{other}`"))),
            };
            DgpKind::Dgp2 { model }
        }
        Some("dgp3") => DgpKind::Dgp3,
        Some(other) => return Err(Error::Config(format!("unknown dgp `{other}`"))),
        None => return Err(Error::Config("missing --dgp".into())),
    };
    if let DgpKind::Dgp1 { nu } = dgp {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Config(format!("--nu must be positive, got {nu}")));
        }
    }
    let n = a.n.ok_or_else(|| Error::Config("missing --n".into()))?;
    let t = a.t.ok_or_else(|| Error::Config("missing --t".into()))?;
    if n == 0 || t < 3 {
        return Err(Error::Config("need --n >= 1 and --t >= 3".into()));
    }
    let taus = a.taus.clone().unwrap_or_else(|| vec![0.5]);
    for &tau in &taus {
        check_tau(tau)?;
    }
    Ok(SimConfig {
        dgp,
        n,
        t,
        taus,
        reps: a.reps.unwrap_or(100),
        seed: a.seed.unwrap_or(0),
        kmax: a.kmax,
        lambda: a.lambda,
        test: a.draws.map(|draws| TestSettings { draws, level: a.level.unwrap_or(0.05) }),
    })
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let config = sim_config(&a)?;
    let report = mc::run_replications(&config)?;
    if let Some(path) = &a.csv {
        write_text(path, &mc::outcomes_csv(&report))?;
    }
    let json = to_json(&report)?;
    match &a.out {
        Some(path) => write_text(path, &json)?,
        None => {
            let _ = std::io::stdout().write_all(json.as_bytes());
        }
    }
    eprintln!("{} replications in {:.1} s", report.n_reps, report.wall_time_secs);
    Ok(())
}

#[derive(Serialize)]
struct EvaluateOutput {
    n_portfolios: usize,
    n_periods: usize,
    n_factors: usize,
    burn_in: usize,
    in_sample: InSampleR2,
    out_of_sample: OutOfSampleR2,
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let rpath = a.returns.as_ref().ok_or_else(|| Error::Config("missing --returns".into()))?;
    let fpath = a.factors.as_ref().ok_or_else(|| Error::Config("missing --factors".into()))?;
    let burn_in = a.burn_in.unwrap_or(evaluate::DEFAULT_BURN_IN);
    let r = evaluate::read_wide_csv(rpath)?;
    let f = evaluate::read_wide_csv(fpath)?;
    if r.row_labels != f.row_labels {
        return Err(evaluate::EvaluateError::DimensionMismatch("returns and factors must list the same periods in the same order".into()).into());
    }
    let returns = r.values.transpose();
    let in_sample = evaluate::r2_insample(&returns, &f.values)?;
    let out_of_sample = evaluate::r2_oos(&returns, &f.values, burn_in)?;
    let out = EvaluateOutput {
        n_portfolios: returns.nrows(),
        n_periods: returns.ncols(),
        n_factors: f.values.ncols(),
        burn_in,
        in_sample,
        out_of_sample,
    };
    emit(&out, a.out.as_deref())
}
