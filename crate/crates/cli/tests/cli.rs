use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use tempfile::TempDir;

const SU2_L3: &str = "group = su2\nresolution = 8\nlambda.cut = 3.7\nlambda.grid = 2, 3.7\nomega = ball(2.6; 0, 0, 0)\n";

fn run(dir: &Path, cmd: &str, cfg: &str, out: &str, extra: &[&str]) -> (i32, PathBuf) {
    let cfg_path = dir.join(format!("{out}.cfg"));
    fs::write(&cfg_path, cfg).unwrap();
    let out_dir = dir.join(out);
    let status = Command::new(env!("CARGO_BIN_EXE_lrspec"))
        .arg(cmd)
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out_dir)
        .args(extra)
        .status()
        .unwrap();
    (status.code().unwrap(), out_dir)
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn column(rows: &[Vec<String>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn dual_table_rows_and_determinism() {
    let d = TempDir::new().unwrap();
    let (c, o) = run(d.path(), "dual-table", "lambda.cut = 1\n", "t1", &[]);
    assert_eq!(c, 0);
    let rows = csv_rows(&o.join("dual_table.csv"));
    assert_eq!(rows, vec![vec!["k=0", "1", "0.0", "1.0"]]);
    let first = fs::read(o.join("dual_table.csv")).unwrap();
    run(d.path(), "dual-table", "lambda.cut = 1\n", "t1", &[]);
    assert_eq!(first, fs::read(o.join("dual_table.csv")).unwrap());
    // l <= 1: l = 0, 1/2, 1
    let (c, o) = run(d.path(), "dual-table", "group = su2\nomega = full\nlambda.cut = 1.8\n", "s1", &[]);
    assert_eq!(c, 0);
    let header = fs::read_to_string(o.join("dual_table.csv")).unwrap();
    assert!(header.starts_with("label,dim,laplace_eig,bracket\n"));
    assert_eq!(csv_rows(&o.join("dual_table.csv")).len(), 3);
}

#[test]
fn verify_default_torus_passes() {
    let d = TempDir::new().unwrap();
    let (c, o) = run(d.path(), "verify", "", "v", &[]);
    assert_eq!(c, 0);
    let r = json(&o.join("verify.json"));
    assert_eq!(r["passed"], true);
    let names: Vec<String> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect();
    for n in ["parseval", "unitarity", "eigen_residual", "cancellation", "symmetry", "hum_identity"] {
        assert!(names.iter().any(|x| x == n), "{n}");
    }
    let interp = fs::read_to_string(o.join("interpolation.csv")).unwrap();
    assert!(interp.starts_with("draw_id,lambda,lhs,h1_full,l2_omega,kappa_star\n"));
}

#[test]
fn verify_names_band_limit_failure() {
    let d = TempDir::new().unwrap();
    let (c, o) = run(d.path(), "verify", "resolution = 4\n", "bl", &[]);
    assert_eq!(c, 1);
    let r = json(&o.join("verify.json"));
    assert_eq!(r["passed"], false);
    let f = r["failures"].as_array().unwrap();
    assert!(f.iter().any(|x| x.as_str().unwrap().ends_with("bandlimit")));
}

#[test]
fn verify_su2_within_budget() {
    let d = TempDir::new().unwrap();
    let t = Instant::now();
    let (c, o) = run(d.path(), "verify", SU2_L3, "su2", &[]);
    assert!(t.elapsed().as_secs_f64() < 60.0);
    assert_eq!(c, 0, "{}", fs::read_to_string(o.join("verify.json")).unwrap());
}

#[test]
fn spectral_constant_full_and_nested() {
    let d = TempDir::new().unwrap();
    let (c, o) = run(d.path(), "spectral-constant", "omega = full\n", "full", &[]);
    assert_eq!(c, 0);
    let rows = csv_rows(&o.join("spectral_constants.csv"));
    assert!(column(&rows, 2).iter().all(|v| (v - 1.0).abs() < 1e-12));
    assert_eq!(json(&o.join("spectral_constants.json"))["C2"], 0.0);

    let grid = "lambda.grid = 1, 7, 13, 19.5, 26, 32, 38, 44.5\nresolution = 64\n";
    let (c, small) = run(d.path(), "spectral-constant", &format!("{grid}omega = arcs(0:0.3)\n"), "small", &[]);
    assert_eq!(c, 0);
    let (c, big) = run(d.path(), "spectral-constant", &format!("{grid}omega = arcs(0:0.5)\n"), "big", &[]);
    assert_eq!(c, 0);
    let s = column(&csv_rows(&small.join("spectral_constants.csv")), 2);
    let b = column(&csv_rows(&big.join("spectral_constants.csv")), 2);
    assert_eq!(s.len(), 8);
    assert!(s.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10)));
    assert!(s.iter().zip(&b).all(|(x, y)| *x <= y * (1.0 + 1e-10)));
}

#[test]
fn doubling_constants_only() {
    let d = TempDir::new().unwrap();
    let (c, o) = run(d.path(), "doubling", "lambda.grid = 1\ndoubling.trials = 2\n", "db", &[]);
    assert_eq!(c, 0);
    let rows = csv_rows(&o.join("doubling.csv"));
    assert!((column(&rows, 2)[0] - 1.0).abs() < 1e-12);
}

#[test]
fn control_closed_form_and_two_modes() {
    let d = TempDir::new().unwrap();
    let cfg = "lambda.cut = 1\nomega = full\ncontrol.u0 = lowest\n";
    let (c, o) = run(d.path(), "control", cfg, "one", &[]);
    assert_eq!(c, 0);
    let s = json(&o.join("control.json"));
    assert!((s["cost"].as_f64().unwrap() - 0.559495).abs() < 1e-6);
    let run_csv = fs::read_to_string(o.join("control_run.csv")).unwrap();
    assert!(run_csv.starts_with("t,g0_re,g0_im\n"));
    assert_eq!(run_csv.lines().count(), 257);

    let (c, o) = run(d.path(), "control", "lambda.cut = 7\nomega = arcs(0:0.5)\n", "three", &[]);
    assert_eq!(c, 0);
    let s = json(&o.join("control.json"));
    assert!(s["terminal_residual"].as_f64().unwrap() <= 1e-8);

    let lr = "lambda.cut = 19.5\nomega = arcs(0:0.5)\ncontrol.scheme = lr\ncontrol.lambda0 = 5.03\n";
    let (c, o) = run(d.path(), "control", lr, "lr", &[]);
    assert_eq!(c, 0);
    let s = json(&o.join("control.json"));
    assert_eq!(s["lr"]["stages"].as_array().unwrap().len(), 3);
    assert!(s["terminal_residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn cost_scan_and_cutoff_outputs() {
    let d = TempDir::new().unwrap();
    let (c, o) = run(d.path(), "cost-scan", "", "cs", &[]);
    assert_eq!(c, 0);
    let text = fs::read_to_string(o.join("cost_scan.csv")).unwrap();
    assert!(text.starts_with("T,C_T,cond_G,flag\n"));
    let rows = csv_rows(&o.join("cost_scan.csv"));
    let costs = column(&rows, 1);
    assert!(costs.windows(2).all(|w| w[1] > w[0]));
    let j = json(&o.join("cost_scan.json"));
    for k in ["beta_hat", "r2", "C1", "C2", "alpha", "m", "omega_descriptor"] {
        assert!(!j[k].is_null(), "{k}");
    }

    let (c, o) = run(d.path(), "cutoff", "", "cut", &[]);
    assert_eq!(c, 0);
    let rows = csv_rows(&o.join("cutoff_check.csv"));
    assert_eq!(rows.len(), 5);
    for r in &rows {
        let eps: f64 = r[0].parse().unwrap();
        let psi0: f64 = r[1].parse().unwrap();
        assert!(psi0 > 0.0 && psi0 < eps);
        for v in &r[2..6] {
            assert!(v.parse::<f64>().unwrap().abs() <= 1e-9 * psi0.max(1.0));
        }
    }
}

#[test]
fn symbol_and_power_checks() {
    let d = TempDir::new().unwrap();
    let (c, _) = run(d.path(), "check-symbol", "symbol.k_max = 64\nsymbol.x_points = 64\n", "sym", &[]);
    assert_eq!(c, 0);
    let (c, _) = run(
        d.path(),
        "check-symbol",
        "symbol.kind = exponential\nsymbol.k_max = 64\nsymbol.x_points = 64\n",
        "exp",
        &[],
    );
    assert_eq!(c, 1);
    let (c, o) = run(d.path(), "power-check", "lambda.cut = 101\n", "pow", &[]);
    assert_eq!(c, 0);
    assert_eq!(json(&o.join("power_check.json"))["passed"], true);
    let (c, _) = run(d.path(), "check-symbol", "group = su2\nomega = full\n", "sym2", &[]);
    assert_eq!(c, 2);
}

#[test]
fn config_errors_exit_two() {
    let d = TempDir::new().unwrap();
    let (c, _) = run(d.path(), "verify", "operator.shift = 1\n", "bad", &[]);
    assert_eq!(c, 2);
    let status = Command::new(env!("CARGO_BIN_EXE_lrspec")).arg("cutoff").status().unwrap();
    assert_eq!(status.code(), Some(2));
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn outputs_identical_across_runs_and_threads() {
    let d = TempDir::new().unwrap();
    let cfg = "lambda.grid = 7, 13\ndoubling.trials = 4\ndoubling.steps = 20\n";
    for cmd in ["verify", "spectral-constant", "doubling", "cost-scan", "control", "cutoff"] {
        let (c1, a) = run(d.path(), cmd, cfg, &format!("{cmd}_a"), &["--threads", "1", "--seed", "7"]);
        let (c2, b) = run(d.path(), cmd, cfg, &format!("{cmd}_b"), &["--threads", "4", "--seed", "7"]);
        let (c3, c) = run(d.path(), cmd, cfg, &format!("{cmd}_c"), &["--threads", "4", "--seed", "7"]);
        assert_eq!((c1, c2, c3), (0, 0, 0), "{cmd}");
        assert_eq!(files(&a), files(&b), "{cmd}");
        assert_eq!(files(&b), files(&c), "{cmd}");
    }
}
