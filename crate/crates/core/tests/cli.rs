use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qrpca::mc::{generate, DgpKind, DgpSpec, ErrorModel};
use qrpca::panel::{save_panel, Schema};
use qrpca::rng::Stream;

fn qrpca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrpca")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// DGP2 panel with 60 units and 12 periods, saved as long CSV.
fn fixture(dir: &Path) -> PathBuf {
    let data = generate(DgpSpec { dgp: DgpKind::Dgp2 { model: ErrorModel::M1 }, n: 60, t: 12 }, &mut Stream::new(3));
    let path = dir.join("panel.csv");
    save_panel(&data.panel, &Schema::default(), &path).unwrap();
    path
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn estimate_writes_exports() {
    let dir = tempfile::tempdir().unwrap();
    let panel = fixture(dir.path());
    let out = dir.path().join("out");
    let o = qrpca(&["estimate", "--panel", s(&panel), "--taus", "0.25,0.5", "--k", "2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for tau in ["tau_0.25", "tau_0.5"] {
        let d = out.join(tau);
        let a = lines(&d.join("a_hat.csv"));
        assert_eq!(a[0], "j,a_hat");
        assert_eq!(a.len(), 1 + 7);
        let b = lines(&d.join("B_hat.csv"));
        assert_eq!(b[0], "j,b1,b2");
        assert_eq!(b.len(), 1 + 7);
        let f = lines(&d.join("F_hat.csv"));
        assert_eq!(f[0], "period,f1,f2");
        assert_eq!(f.len(), 1 + 12);
        assert_eq!(lines(&d.join("eigvals.csv")).len(), 1 + 7);
        let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["K"], 2);
        assert_eq!(summary["n_periods"], 12);
    }
    assert!(out.join("summary.json").exists());
}

#[test]
fn estimate_missing_column() {
    let dir = tempfile::tempdir().unwrap();
    let panel = fixture(dir.path());
    let o = qrpca(&["estimate", "--panel", s(&panel), "--y-col", "ret", "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ret"), "{}", stderr(&o));
}

#[test]
fn estimate_small_period() {
    let dir = tempfile::tempdir().unwrap();
    let panel = fixture(dir.path());
    // keep only five units in period 4
    let text = fs::read_to_string(&panel).unwrap();
    let mut kept = 0;
    let filtered: Vec<&str> = text
        .lines()
        .filter(|l| {
            let mut cells = l.split(',');
            let (_, period) = (cells.next(), cells.next());
            if period != Some("4") {
                return true;
            }
            kept += 1;
            kept <= 5
        })
        .collect();
    fs::write(&panel, filtered.join("\n") + "\n").unwrap();
    let o = qrpca(&["estimate", "--panel", s(&panel), "--k", "1", "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("period 4"), "{}", stderr(&o));
}

#[test]
fn select_k_from_exported_eigvals() {
    let dir = tempfile::tempdir().unwrap();
    let panel = fixture(dir.path());
    let out = dir.path().join("out");
    assert!(qrpca(&["estimate", "--panel", s(&panel), "--k", "1", "--out", s(&out)]).status.success());
    let o = qrpca(&["select-k", "--eigvals", s(&out.join("tau_0.5/eigvals.csv")), "--n", "60"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["k_ratio"].as_u64().unwrap() >= 1);
    assert!(v["k_threshold"].is_u64());
    assert_eq!(v["eigvals"].as_array().unwrap().len(), 7);
    assert_eq!(v["ratios"].as_array().unwrap().len(), 3);

    let o = qrpca(&["select-k", "--eigvals", s(&out.join("tau_0.5/eigvals.csv"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn select_k_from_panel() {
    let dir = tempfile::tempdir().unwrap();
    let panel = fixture(dir.path());
    let o = qrpca(&["select-k", "--panel", s(&panel), "--tau", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kmax"], 3);
    assert!((v["threshold_used"].as_f64().unwrap() - 1.0 / 60f64.ln()).abs() < 1e-15);
}

#[test]
fn test_alpha_runs_and_rejects_few_draws() {
    let dir = tempfile::tempdir().unwrap();
    let panel = fixture(dir.path());
    let o = qrpca(&["test-alpha", "--panel", s(&panel), "--draws", "0"]);
    assert_eq!(o.status.code(), Some(1));

    let bands = dir.path().join("bands.json");
    let o = qrpca(&["test-alpha", "--panel", s(&panel), "--tau", "0.5", "--k", "2", "--draws", "19", "--level", "0.1", "--seed", "7", "--bands", s(&bands)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["statistic", "critical_value", "p_value", "reject"] {
        assert!(!v[key].is_null(), "{key}");
    }
    let p = v["p_value"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
    let b: serde_json::Value = serde_json::from_str(&fs::read_to_string(&bands).unwrap()).unwrap();
    assert_eq!(b["a_lower"].as_array().unwrap().len(), 7);
    assert_eq!(b["row_tests"].as_array().unwrap().len(), 7);
}

#[test]
fn simulate_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let csv = dir.path().join("reps.csv");
    let o = qrpca(&["simulate", "--dgp", "dgp1", "--nu", "1", "--n", "100", "--t", "10", "--taus", "0.5", "--reps", "4", "--seed", "42", "--out", s(&out), "--csv", s(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let m = &v["results"][0]["metrics"];
    assert!(m["correct_rate_khat"].is_f64());
    assert!(m["correct_rate_ktilde"].is_f64());
    assert_eq!(v["n_reps"], 4);
    assert_eq!(lines(&csv).len(), 1 + 4);
}

#[test]
fn simulate_config_file_with_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.json");
    fs::write(&cfg, r#"{"dgp":"dgp2","model":"m2","n":80,"t":8,"taus":[0.25],"reps":2,"seed":1}"#).unwrap();
    let o = qrpca(&["simulate", "--config", s(&cfg), "--reps", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n_reps"], 3);
    assert_eq!(v["results"][0]["k_true"], 3);

    fs::write(&cfg, r#"{"dgp":"dgp2","n":80,"t":8,"bogus":1}"#).unwrap();
    let o = qrpca(&["simulate", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bogus"));
}

fn write_wide(path: &Path, prefix: &str, m: &nalgebra::DMatrix<f64>) {
    let mut text = String::from("period");
    for j in 0..m.ncols() {
        text.push_str(&format!(",{prefix}{}", j + 1));
    }
    text.push('\n');
    for t in 0..m.nrows() {
        text.push_str(&(t + 1).to_string());
        for j in 0..m.ncols() {
            text.push_str(&format!(",{}", m[(t, j)]));
        }
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

#[test]
fn evaluate_wide_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut st = Stream::new(9);
    let (t, n, k) = (60, 5, 2);
    let f = nalgebra::DMatrix::from_fn(t, k, |_, _| st.normal());
    let b = nalgebra::DMatrix::from_fn(n, k, |_, _| st.normal());
    let noise = nalgebra::DMatrix::from_fn(t, n, |_, _| 0.1 * st.normal());
    let r = &f * b.transpose() + noise;
    let (rp, fp) = (dir.path().join("r.csv"), dir.path().join("f.csv"));
    write_wide(&rp, "p", &r);
    write_wide(&fp, "f", &f);
    let o = qrpca(&["evaluate", "--returns", s(&rp), "--factors", s(&fp), "--burn-in", "30"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["in_sample"].as_object().unwrap().len(), 6);
    assert_eq!(v["out_of_sample"].as_object().unwrap().len(), 3);
    assert!(v["in_sample"]["total"].as_f64().unwrap() > 0.9);

    let o = qrpca(&["evaluate", "--returns", s(&rp), "--factors", s(&fp)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_on_every_command() {
    for cmd in ["estimate", "select-k", "test-alpha", "simulate", "evaluate"] {
        let o = qrpca(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}");
        let text = String::from_utf8_lossy(&o.stdout);
        assert!(text.contains("--config") && text.contains("--threads"), "{cmd}");
    }
    assert_eq!(qrpca(&["--version"]).status.code(), Some(0));
    assert_eq!(qrpca(&["estimate", "--no-such-flag"]).status.code(), Some(1));
}
