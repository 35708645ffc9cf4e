//! Experiment drivers. Each writes its files under the output directory and
//! returns an error carrying the exit code on failure.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use lrspec_core::control::{
    cost_scan, hum_control, lr_scheme, observability_cost, ControlProblem, LrReport,
};
use lrspec_core::extension::cutoff_check;
use lrspec_core::group::{GroupBackend, ObservationSet, QuadratureGrid};
use lrspec_core::rng::{stream, TAG_CONTROL};
use lrspec_core::spectral::{
    build_subspace, doubling_scan, fit_spectral_constants_log10, observability_constant, operator_for_cut,
    DoublingSpec, SpectralSubspace,
};
use lrspec_core::symbol::{
    check_symbol_class, make_operator, BracketWeight, ContourSpec, SpectralOperator, SymbolClassSpec,
};

use crate::config::{point, ExperimentConfig};
use crate::error::CliError;
use crate::output::{num, write_csv, write_json};

pub const CUTOFF_SAMPLES: usize = 4000;

pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
}

impl Context {
    pub fn new(cfg: ExperimentConfig, out: Option<PathBuf>) -> Result<Self, CliError> {
        let out = out.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
        fs::create_dir_all(&out)?;
        Ok(Context { cfg, out })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Backend, Haar grid, an operator covering `cut` and its modes up to `cut`.
pub struct Setup {
    pub backend: GroupBackend,
    pub grid: QuadratureGrid,
    pub op: SpectralOperator,
    pub subspace: SpectralSubspace,
    pub set: ObservationSet,
}

pub fn setup(cfg: &ExperimentConfig, cut: f64) -> Result<Setup, CliError> {
    let backend = cfg.backend()?;
    let grid = backend.haar_quadrature(cfg.resolution)?;
    let op = operator_for_cut(backend, cfg.preset()?, cfg.params(), cut)?;
    let subspace = build_subspace(&op, cut, &grid)?;
    let set = ObservationSet::new(backend, cfg.omega.descriptor(backend)?, &grid)?;
    Ok(Setup {
        backend,
        grid,
        op,
        subspace,
        set,
    })
}

fn max_of(v: &[f64]) -> Result<f64, CliError> {
    v.iter()
        .copied()
        .fold(None, |a: Option<f64>, b| Some(a.map_or(b, |a| a.max(b))))
        .ok_or_else(|| CliError::Config("lambda.grid is empty".into()))
}

pub fn dual_table(ctx: &Context) -> Result<(), CliError> {
    let duals = ctx.cfg.backend()?.enumerate_dual(ctx.cfg.lambda_cut)?;
    let rows: Vec<Vec<String>> = duals
        .iter()
        .map(|d| vec![d.label.to_string(), d.dim.to_string(), num(d.laplace_eig), num(d.bracket)])
        .collect();
    write_csv(&ctx.path("dual_table.csv"), &["label", "dim", "laplace_eig", "bracket"], &rows)
}

#[derive(Serialize)]
struct ConstantsSummary {
    group: String,
    omega: String,
    #[serde(rename = "C1")]
    c1: f64,
    #[serde(rename = "C2")]
    c2: f64,
    log_c1: f64,
    fitted_rows: usize,
    underflow_rows: usize,
}

pub fn spectral_constant(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let mut lambdas = cfg.lambda_grid.clone();
    lambdas.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let s = setup(cfg, max_of(&lambdas)?)?;
    let obs = lambdas
        .par_iter()
        .map(|&l| observability_constant(&s.subspace.truncate(l), &s.set, &s.grid))
        .collect::<Result<Vec<_>, _>>()?;
    let kept: Vec<usize> = (0..obs.len()).filter(|&i| !obs[i].below_floor).collect();
    if kept.is_empty() {
        return Err(CliError::Numerical("every lambda_min is below the underflow floor".into()));
    }
    let fit = fit_spectral_constants_log10(
        &kept.iter().map(|&i| lambdas[i]).collect::<Vec<_>>(),
        &kept.iter().map(|&i| obs[i].log10_lam_min).collect::<Vec<_>>(),
    )?;
    let rows: Vec<Vec<String>> = lambdas
        .iter()
        .zip(&obs)
        .map(|(&l, o)| {
            vec![
                num(l),
                o.dimension.to_string(),
                num(o.lam_min),
                num(-0.5 * o.log10_lam_min * std::f64::consts::LN_10),
                num(fit.log_c1 + fit.c2 * l),
                u8::from(o.below_floor).to_string(),
            ]
        })
        .collect();
    write_csv(
        &ctx.path("spectral_constants.csv"),
        &["lambda", "n_modes", "lam_min", "log_inv_sqrt", "envelope_value", "underflow_flag"],
        &rows,
    )?;
    write_json(
        &ctx.path("spectral_constants.json"),
        &ConstantsSummary {
            group: cfg.group.clone(),
            omega: cfg.omega.render(),
            c1: fit.c1,
            c2: fit.c2,
            log_c1: fit.log_c1,
            fitted_rows: kept.len(),
            underflow_rows: obs.len() - kept.len(),
        },
    )
}

pub fn doubling(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let mut lambdas = cfg.lambda_grid.clone();
    lambdas.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let s = setup(cfg, max_of(&lambdas)?)?;
    let center = point(s.backend, &cfg.doubling_center, "doubling.center")?;
    let spec = DoublingSpec {
        radius: cfg.doubling_radius,
        trials: cfg.doubling_trials,
        ascent_steps: cfg.doubling_steps,
        density: cfg.doubling_density,
        seed: cfg.seed,
    };
    let scan = doubling_scan(&s.subspace, &lambdas, &center, &spec)?;
    let rows: Vec<Vec<String>> = scan
        .lambdas
        .iter()
        .zip(&scan.ratios)
        .map(|(&l, &r)| vec![num(l), num(cfg.doubling_radius), num(r), cfg.doubling_trials.to_string()])
        .collect();
    write_csv(&ctx.path("doubling.csv"), &["lambda", "R", "ratio_max", "trials"], &rows)?;
    write_json(&ctx.path("doubling.json"), &scan.fit)
}

fn initial_state(cfg: &ExperimentConfig, n: usize) -> Vec<Complex64> {
    let mut u: Vec<Complex64> = match cfg.control_u0.as_str() {
        "lowest" => (0..n).map(|j| Complex64::new(if j == 0 { 1.0 } else { 0.0 }, 0.0)).collect(),
        "ones" => vec![Complex64::new(1.0, 0.0); n],
        _ => {
            let mut rng = stream(cfg.seed, TAG_CONTROL);
            (0..n)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect()
        }
    };
    let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        u.iter_mut().for_each(|z| *z /= norm);
    }
    u
}

pub fn control_problem(cfg: &ExperimentConfig) -> Result<(Setup, ControlProblem), CliError> {
    let s = setup(cfg, cfg.lambda_cut)?;
    let u0 = initial_state(cfg, s.subspace.len());
    let p = ControlProblem::new(&s.subspace, &s.set, &s.grid, cfg.alpha, cfg.t_end, u0)?;
    Ok((s, p))
}

#[derive(Serialize)]
struct ControlSummary {
    scheme: String,
    n_modes: usize,
    alpha: f64,
    m: f64,
    subcritical: bool,
    omega_descriptor: String,
    #[serde(rename = "T")]
    t_end: f64,
    cost: f64,
    cost_quadrature: Option<f64>,
    terminal_residual: f64,
    cond_g: Option<f64>,
    c_t: Option<f64>,
    regularized: bool,
    lr: Option<LrReport>,
}

pub fn control(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let (s, p) = control_problem(cfg)?;
    let mut summary = ControlSummary {
        scheme: cfg.control_scheme.clone(),
        n_modes: p.len(),
        alpha: p.alpha,
        m: p.order,
        subcritical: p.subcritical,
        omega_descriptor: s.set.descriptor.describe(),
        t_end: p.t_end,
        cost: 0.0,
        cost_quadrature: None,
        terminal_residual: 0.0,
        cond_g: None,
        c_t: None,
        regularized: cfg.control_regularization > 0.0,
        lr: None,
    };
    if cfg.control_scheme == "lr" {
        let lambda0 = if cfg.control_lambda0 > 0.0 {
            cfg.control_lambda0
        } else {
            p.freqs.iter().copied().find(|f| *f > 0.0).unwrap_or(1.0)
        };
        let report = lr_scheme(&p, lambda0, cfg.lambda_cut, cfg.control_block_ratio, cfg.control_max_stages)?;
        let rows: Vec<Vec<String>> = report
            .stages
            .iter()
            .enumerate()
            .map(|(k, st)| {
                vec![
                    k.to_string(),
                    num(st.cut),
                    st.controlled.to_string(),
                    num(st.t_start),
                    num(st.block),
                    num(st.control_time),
                    num(st.cost),
                    num(st.controlled_residual),
                    num(st.cond),
                ]
            })
            .collect();
        write_csv(
            &ctx.path("lr_stages.csv"),
            &["stage", "cut", "controlled", "t_start", "block", "control_time", "cost", "controlled_residual", "cond_G"],
            &rows,
        )?;
        summary.cost = report.total_cost;
        summary.terminal_residual = report.terminal_residual;
        let failed = report.complete && report.terminal_residual > cfg.control_tol;
        summary.lr = Some(report);
        write_json(&ctx.path("control.json"), &summary)?;
        if failed {
            return Err(CliError::Check(format!(
                "scheme residual {:e} above {:e}",
                summary.terminal_residual, cfg.control_tol
            )));
        }
        return Ok(());
    }
    let r = hum_control(&p, cfg.control_regularization, cfg.control_tol)?;
    let mut header = vec!["t".to_string()];
    for j in 0..p.len() {
        header.push(format!("g{j}_re"));
        header.push(format!("g{j}_im"));
    }
    let rows: Vec<Vec<String>> = r
        .samples
        .iter()
        .map(|(t, h)| {
            let mut row = vec![num(*t)];
            for z in h {
                row.push(num(z.re));
                row.push(num(z.im));
            }
            row
        })
        .collect();
    let hdr: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    write_csv(&ctx.path("control_run.csv"), &hdr, &rows)?;
    summary.cost = r.cost;
    summary.cost_quadrature = Some(r.cost_quadrature);
    summary.terminal_residual = r.terminal_residual;
    summary.cond_g = Some(r.cond);
    summary.c_t = observability_cost(&p).ok().map(|o| o.c_t);
    write_json(&ctx.path("control.json"), &summary)
}

#[derive(Serialize)]
struct CostSummary {
    beta_hat: f64,
    r2: f64,
    #[serde(rename = "C1")]
    c1: f64,
    #[serde(rename = "C2")]
    c2: f64,
    alpha: f64,
    m: f64,
    omega_descriptor: String,
    beta_range: (f64, f64),
    envelope_holds: bool,
    valid_rows: usize,
}

pub fn cost_scan_cmd(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let (s, p) = control_problem(cfg)?;
    let fit = cost_scan(&p, &cfg.t_grid)?;
    let rows: Vec<Vec<String>> = fit
        .rows
        .iter()
        .map(|r| vec![num(r.t), num(r.c_t), num(r.cond), r.flag.clone()])
        .collect();
    write_csv(&ctx.path("cost_scan.csv"), &["T", "C_T", "cond_G", "flag"], &rows)?;
    write_json(
        &ctx.path("cost_scan.json"),
        &CostSummary {
            beta_hat: fit.beta_hat,
            r2: fit.r_squared,
            c1: fit.envelope.c1,
            c2: fit.envelope.c2,
            alpha: fit.alpha,
            m: fit.order,
            omega_descriptor: s.set.descriptor.describe(),
            beta_range: fit.beta_range,
            envelope_holds: fit.envelope_holds,
            valid_rows: fit.valid().count(),
        },
    )?;
    if !fit.envelope_holds {
        return Err(CliError::Check("cost envelope violated".into()));
    }
    Ok(())
}

/// Rows failing the cutoff contract, as messages.
pub fn cutoff_failures(rows: &[lrspec_core::extension::CutoffRow]) -> Vec<String> {
    let mut bad = Vec::new();
    for r in rows {
        let tol = 1e-9 * r.psi0.max(1.0);
        for (i, d) in r.d_at_t.iter().enumerate() {
            if !(d.abs() <= tol) {
                bad.push(format!("epsilon={}: derivative {} at T is {d:e}", r.epsilon, i + 1));
            }
        }
        if !(r.psi0 > 0.0 && r.psi0 < r.epsilon) {
            bad.push(format!("epsilon={}: psi0 = {} outside (0, epsilon)", r.epsilon, r.psi0));
        }
    }
    bad
}

#[derive(Serialize)]
struct CutoffSummary {
    passed: bool,
    failures: Vec<String>,
    max_norm_bound: [f64; 4],
}

pub fn cutoff(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let rows = cutoff_check(&cfg.epsilon_grid, cfg.t_end, CUTOFF_SAMPLES)?;
    let out: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![num(r.epsilon), num(r.psi0)];
            v.extend(r.d_at_t.iter().map(|d| num(*d)));
            v.extend(r.max_norm.iter().map(|d| num(*d)));
            v
        })
        .collect();
    write_csv(
        &ctx.path("cutoff_check.csv"),
        &[
            "epsilon", "psi0", "d1_at_T", "d2_at_T", "d3_at_T", "d4_at_T", "max_norm_i1", "max_norm_i2", "max_norm_i3",
            "max_norm_i4",
        ],
        &out,
    )?;
    let failures = cutoff_failures(&rows);
    let mut bound = [0.0f64; 4];
    for r in &rows {
        for i in 0..4 {
            bound[i] = bound[i].max(r.max_norm[i]);
        }
    }
    write_json(
        &ctx.path("cutoff.json"),
        &CutoffSummary {
            passed: failures.is_empty(),
            failures: failures.clone(),
            max_norm_bound: bound,
        },
    )?;
    if !failures.is_empty() {
        return Err(CliError::Check(failures.join("; ")));
    }
    Ok(())
}

#[derive(Serialize)]
struct SymbolSummary {
    kind: String,
    m: f64,
    rho: f64,
    delta: f64,
    diverging: bool,
}

pub fn check_symbol(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let backend = cfg.backend()?;
    if backend != GroupBackend::Torus(1) {
        return Err(CliError::Config("check-symbol runs on group = torus1".into()));
    }
    let spec = SymbolClassSpec {
        m: cfg.m,
        rho: cfg.symbol_rho,
        delta: cfg.symbol_delta,
        max_order: cfg.symbol_max_order,
        k_max: cfg.symbol_k_max,
        x_points: cfg.symbol_x_points,
        weight: if cfg.symbol_weight == "lattice" {
            BracketWeight::Lattice
        } else {
            BracketWeight::Laplacian
        },
    };
    // the check differences up to k = 2K + max_order
    let k_top = 2 * cfg.symbol_k_max + cfg.symbol_max_order as i64 + 1;
    let bracket = (1.0 + 4.0 * PI * PI * (k_top * k_top) as f64).sqrt() * (1.0 + 1e-12);
    let duals = backend.enumerate_dual(bracket)?;
    let op = make_operator(backend, cfg.preset()?, cfg.params(), &duals)?;
    let mut table: HashMap<i64, f64> = HashMap::new();
    for d in &duals {
        if let lrspec_core::group::DualLabel::Torus(k) = &d.label {
            table.insert(k[0], op.get(&d.label)?[(0, 0)].re);
        }
    }
    let (c, m) = (cfg.c, cfg.m);
    let kind = cfg.symbol_kind.clone();
    let symbol = move |x: f64, k: i64| -> Complex64 {
        let v = match kind.as_str() {
            "modulated" => (2.0 + (2.0 * PI * x).sin()) * (c + 4.0 * PI * PI * (k * k) as f64).powf(0.5 * m),
            "exponential" => (0.05 * k.unsigned_abs() as f64).exp(),
            _ => table.get(&k).copied().unwrap_or(f64::NAN),
        };
        Complex64::new(v, 0.0)
    };
    let report = check_symbol_class(symbol, &spec)?;
    let mut rows = Vec::new();
    for (a, row) in report.table.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            rows.push(vec![
                a.to_string(),
                b.to_string(),
                num(*v),
                num(report.table_half[a][b]),
                num(report.noise_floor[a][b]),
            ]);
        }
    }
    write_csv(
        &ctx.path("symbol_class.csv"),
        &["alpha", "beta", "constant", "constant_half", "noise_floor"],
        &rows,
    )?;
    write_json(
        &ctx.path("symbol_class.json"),
        &SymbolSummary {
            kind: cfg.symbol_kind.clone(),
            m: cfg.m,
            rho: cfg.symbol_rho,
            delta: cfg.symbol_delta,
            diverging: report.diverging,
        },
    )?;
    if report.diverging {
        return Err(CliError::Check("symbol-class constants diverge between K and 2K".into()));
    }
    Ok(())
}

pub fn contour_spec(cfg: &ExperimentConfig, op: &SpectralOperator) -> ContourSpec {
    let mut spec = ContourSpec::for_operator(op);
    if cfg.contour_epsilon > 0.0 {
        spec.epsilon = cfg.contour_epsilon;
    }
    spec.ray_length = cfg.contour_ray_length;
    spec.nodes_per_segment = cfg.contour_nodes;
    spec
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)?;
    Ok(())
}
