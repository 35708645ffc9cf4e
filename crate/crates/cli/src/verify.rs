//! The verification runner and the power check.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use lrspec_core::control::{duality_check, hum_control, ControlProblem};
use lrspec_core::error::Error;
use lrspec_core::extension::{
    check_cancellation, check_spacetime_bounds, check_symmetry, cutoff_check, interpolation_study, sinh_extension,
    CutoffField, CutoffSpec,
};
use lrspec_core::group::{fourier_transform, synthesize, FourierCoefficients, GroupPoint, ObservationSet};
use lrspec_core::linalg::{max_entry_diff, CMatrix};
use lrspec_core::rng::{mix, stream, TAG_VERIFY};
use lrspec_core::spectral::gram_on_set;
use lrspec_core::symbol::{contour_power_symbol, direct_power, make_operator, SpectralOperator};

use crate::commands::{contour_spec, cutoff_failures, setup, Context, Setup, CUTOFF_SAMPLES};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{num, write_csv, write_json};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub failures: Vec<String>,
    pub checks: Vec<Check>,
}

struct Suite<'a> {
    name: &'a str,
    checks: Vec<Check>,
}

impl<'a> Suite<'a> {
    fn new(name: &'a str) -> Self {
        Suite { name, checks: Vec::new() }
    }

    fn le(&mut self, name: &str, measured: f64, tolerance: f64) {
        self.checks.push(Check {
            suite: self.name.into(),
            name: name.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
            detail: String::new(),
        });
    }

    fn flag(&mut self, name: &str, ok: bool, detail: String) {
        self.checks.push(Check {
            suite: self.name.into(),
            name: name.into(),
            measured: f64::from(u8::from(!ok)),
            tolerance: 0.0,
            passed: ok,
            detail,
        });
    }

    fn fail(&mut self, e: &Error) {
        let name = match e {
            Error::BandLimit { .. } => "bandlimit".to_string(),
            _ => "error".to_string(),
        };
        self.flag(&name, false, e.to_string());
    }

    fn finish(mut self, r: Result<(), Error>, out: &mut Vec<Check>) {
        if let Err(e) = r {
            self.fail(&e);
        }
        out.append(&mut self.checks);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn unit_draw(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = stream(seed, TAG_VERIFY);
    let mut a: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let s = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    a.iter_mut().for_each(|z| *z /= s);
    a
}

fn parseval(cfg: &ExperimentConfig, s: &mut Suite) -> Result<(), Error> {
    let backend = cfg.backend().map_err(|e| Error::Config(e.to_string()))?;
    let grid = backend.haar_quadrature(cfg.resolution)?;
    let duals = backend.enumerate_dual(cfg.lambda_cut)?;
    for d in &duals {
        let deg = d.label.band_degree();
        grid.check_pair(&format!("fourier pair at {}", d.label), deg, deg)?;
    }
    let mut rng = stream(mix(cfg.seed), TAG_VERIFY);
    let mut coeffs = FourierCoefficients::new();
    for d in &duals {
        coeffs.insert(
            d.label.clone(),
            CMatrix::from_fn(d.dim, d.dim, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)),
        );
    }
    let f = synthesize(backend, &coeffs, &grid)?;
    let back = fourier_transform(backend, &grid, &f, &duals)?;
    let scale = coeffs.entries.values().flat_map(|m| m.iter().map(|z| z.norm())).fold(0.0, f64::max);
    let tol = if matches!(backend, lrspec_core::group::GroupBackend::Su2) { 1e-8 } else { 1e-10 };
    s.le("roundtrip", back.max_diff(&coeffs) / scale, tol);
    let l2: f64 = f.iter().zip(&grid.weights).map(|(v, w)| w * v.norm_sqr()).sum();
    s.le("parseval", rel(l2, coeffs.l2_norm().powi(2)), tol);
    let mut worst = 0.0f64;
    for p in 0..8u64 {
        let mut r = stream(mix(cfg.seed ^ p), TAG_VERIFY);
        let x = match backend {
            lrspec_core::group::GroupBackend::Torus(n) => GroupPoint::Torus((0..n).map(|_| r.gen::<f64>()).collect()),
            lrspec_core::group::GroupBackend::Su2 => GroupPoint::Euler(lrspec_core::group::EulerAngles::new(
                r.gen::<f64>() * std::f64::consts::TAU,
                r.gen::<f64>() * std::f64::consts::PI,
                r.gen::<f64>() * 2.0 * std::f64::consts::TAU,
            )),
        };
        for d in &duals {
            let u = backend.rep_matrix(&d.label, &x)?;
            worst = worst.max(max_entry_diff(&(&u * u.adjoint()), &CMatrix::identity(d.dim, d.dim)));
        }
    }
    s.le("unitarity", worst, 1e-12);
    Ok(())
}

fn eigenmodes(cfg: &ExperimentConfig, st: &Setup, s: &mut Suite) -> Result<(), Error> {
    let _ = cfg;
    s.le("eigen_residual", st.subspace.eigen_residual(&st.op)?, 1e-10);
    let full = ObservationSet::full(st.backend, &st.grid);
    let g = gram_on_set(&st.subspace, &full, &st.grid)?;
    s.le("full_gram_identity", max_entry_diff(&g, &CMatrix::identity(g.nrows(), g.ncols())), 1e-8);
    Ok(())
}

fn identities(cfg: &ExperimentConfig, st: &Setup, s: &mut Suite) -> Result<(), Error> {
    let mut worst = 0.0f64;
    for d in 0..10u64 {
        let a = unit_draw(st.subspace.len(), mix(cfg.seed ^ d));
        let f = sinh_extension(&st.subspace, &a, cfg.t_end)?;
        worst = worst.max(check_cancellation(&f)?.relative);
    }
    s.le("cancellation", worst, 1e-10);
    let a = unit_draw(st.subspace.len(), mix(cfg.seed ^ 0x5bd1));
    let f = sinh_extension(&st.subspace, &a, cfg.t_end)?;
    let phi = CutoffField::new(&f, CutoffSpec::new(0.5, cfg.t_end)?)?;
    let (lhs, rhs) = check_symmetry(&phi, &phi.default_grid()?)?;
    s.le("symmetry", rel(lhs, rhs), 1e-12);
    Ok(())
}

fn cutoff_suite(cfg: &ExperimentConfig, s: &mut Suite) -> Result<(), Error> {
    let rows = cutoff_check(&cfg.epsilon_grid, cfg.t_end, CUTOFF_SAMPLES)?;
    let bad = cutoff_failures(&rows);
    s.flag("derivatives_and_plateau", bad.is_empty(), bad.join("; "));
    let mut plateau = 0.0f64;
    for r in &rows {
        let spec = CutoffSpec::new(r.epsilon, cfg.t_end)?;
        for i in 0..=100 {
            let t = cfg.t_end * i as f64 / 100.0;
            plateau = plateau.max((spec.psi(t, 0)? - spec.psi0).abs());
        }
        s.le(&format!("support_end_eps_{}", r.epsilon), spec.psi(spec.support_end(), 0)?.abs(), 0.0);
    }
    s.le("plateau", plateau, 0.0);
    Ok(())
}

fn contour_suite(cfg: &ExperimentConfig, op: &SpectralOperator, s: &mut Suite) -> Result<(), Error> {
    if !(op.positivity_floor > 0.0) {
        s.flag("contour_vs_direct", true, "skipped: operator has a zero eigenvalue".into());
        return Ok(());
    }
    let spec = contour_spec(cfg, op);
    for (&re, &im) in cfg.contour_z_re.iter().zip(&cfg.contour_z_im) {
        let z = Complex64::new(re, im);
        let (_, r) = contour_power_symbol(op, z, &spec)?.max_diff(&direct_power(op, z)?)?;
        s.le(&format!("contour_vs_direct_z={re}{im:+}i"), r, cfg.contour_tol);
    }
    Ok(())
}

fn bounds_suite(cfg: &ExperimentConfig, op: &SpectralOperator, s: &mut Suite) -> Result<(), Error> {
    let b = check_spacetime_bounds(op, cfg.t_end, &cfg.epsilon_grid, 64)?;
    if b.unbounded {
        s.flag("spacetime_bounds", true, "skipped: operator has no positive floor".into());
        return Ok(());
    }
    s.le("inverse_bound", b.sup_inverse - b.inverse_bound, 1e-12 * b.inverse_bound);
    s.le("drift_inverse", b.drift_inverse, 0.01);
    s.le("drift_ratio", b.drift_ratio, 0.01);
    Ok(())
}

fn hum_suite(cfg: &ExperimentConfig, st: &Setup, s: &mut Suite) -> Result<(), Error> {
    let u0 = unit_draw(st.subspace.len(), mix(cfg.seed ^ 0x4855));
    let p = ControlProblem::new(&st.subspace, &st.set, &st.grid, cfg.alpha, cfg.t_end, u0)?;
    let r = hum_control(&p, 0.0, f64::INFINITY)?;
    s.le("hum_identity", rel(r.cost, r.cost_quadrature), 1e-8);
    s.le("terminal_residual", r.terminal_residual, cfg.control_tol);
    if cfg.verify_duality {
        let d = duality_check(&p, 200, cfg.seed)?;
        s.le("duality_random", d.max_random / d.c_t - 1.0, 1e-6);
        s.le("duality_power", 1.0 - d.power_cost / d.c_t, 1e-6);
    }
    Ok(())
}

fn interpolation_suite(ctx: &Context, st: &Setup, s: &mut Suite) -> Result<(), Error> {
    let cfg = &ctx.cfg;
    let study = interpolation_study(
        &st.subspace,
        &st.set,
        &st.grid,
        cfg.t_end,
        cfg.interp_alpha,
        cfg.interp_draws,
        cfg.seed,
        0.0,
    )?;
    let rows: Vec<Vec<String>> = study
        .rows
        .iter()
        .map(|r| {
            vec![
                r.draw_id.to_string(),
                num(r.lambda),
                num(r.lhs),
                num(r.h1_full),
                num(r.l2_omega),
                num(r.kappa_star),
            ]
        })
        .collect();
    write_csv(
        &ctx.path("interpolation.csv"),
        &["draw_id", "lambda", "lhs", "h1_full", "l2_omega", "kappa_star"],
        &rows,
    )
    .map_err(|e| Error::Numerical(e.to_string()))?;
    let worst = study
        .rows
        .iter()
        .map(|r| (r.log_lhs - r.log_h1_full).max(0.0))
        .fold(0.0, f64::max);
    s.le("restriction_monotone", worst, 1e-12);
    let bad = study
        .rows
        .iter()
        .filter(|r| !r.degenerate && !(r.kappa_star > 0.0 && r.kappa_star <= 1.0))
        .count();
    s.le("kappa_in_unit_interval", bad as f64, 0.0);
    Ok(())
}

/// Run every suite; exit code 1 names the failing checks.
pub fn verify(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let mut checks = Vec::new();
    let mut s = Suite::new("fourier");
    let r = parseval(cfg, &mut s);
    s.finish(r, &mut checks);
    match setup(cfg, cfg.lambda_cut) {
        Ok(st) => {
            let mut s = Suite::new("eigenmode");
            let r = eigenmodes(cfg, &st, &mut s);
            s.finish(r, &mut checks);
            let mut s = Suite::new("extension");
            let r = identities(cfg, &st, &mut s);
            s.finish(r, &mut checks);
            let mut s = Suite::new("contour");
            let r = contour_suite(cfg, &st.op, &mut s);
            s.finish(r, &mut checks);
            let mut s = Suite::new("spacetime");
            let r = bounds_suite(cfg, &st.op, &mut s);
            s.finish(r, &mut checks);
            let mut s = Suite::new("hum");
            let r = hum_suite(cfg, &st, &mut s);
            s.finish(r, &mut checks);
            let mut s = Suite::new("interpolation");
            let r = interpolation_suite(ctx, &st, &mut s);
            s.finish(r, &mut checks);
        }
        Err(e) => {
            let mut s = Suite::new("setup");
            let name = if e.to_string().contains("band limit") { "bandlimit" } else { "error" };
            s.flag(name, false, e.to_string());
            checks.append(&mut s.checks);
        }
    }
    let mut s = Suite::new("cutoff");
    let r = cutoff_suite(cfg, &mut s);
    s.finish(r, &mut checks);
    let failures: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}.{}", c.suite, c.name))
        .collect();
    let report = VerifyReport {
        passed: failures.is_empty(),
        failures: failures.clone(),
        checks,
    };
    write_json(&ctx.path("verify.json"), &report)?;
    if !failures.is_empty() {
        return Err(CliError::Check(failures.join(", ")));
    }
    Ok(())
}

#[derive(Serialize)]
struct PowerSummary {
    passed: bool,
    failures: Vec<String>,
}

/// Contour against spectral powers, and the semigroup law of the latter.
pub fn power_check(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let backend = cfg.backend()?;
    let duals = backend.enumerate_dual(cfg.lambda_cut)?;
    let op = make_operator(backend, cfg.preset()?, cfg.params(), &duals)?;
    let spec = contour_spec(cfg, &op);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (&re, &im) in cfg.contour_z_re.iter().zip(&cfg.contour_z_im) {
        let z = Complex64::new(re, im);
        let (a, r) = contour_power_symbol(&op, z, &spec)?.max_diff(&direct_power(&op, z)?)?;
        let ok = r <= cfg.contour_tol;
        if !ok {
            failures.push(format!("contour z={z}"));
        }
        rows.push(vec!["contour".into(), num(re), num(im), num(0.0), num(0.0), num(a), num(r), ok.to_string()]);
    }
    let mut rng = stream(cfg.seed, TAG_VERIFY);
    let floor_ok = op.positivity_floor > 0.0;
    for _ in 0..5 {
        let mut draw = || {
            let re = if floor_ok { rng.gen_range(-1.0..=1.0) } else { rng.gen_range(0.0..=1.0) };
            Complex64::new(re, rng.gen_range(-1.0..=1.0))
        };
        let (z, w) = (draw(), draw());
        let lhs = direct_power(&op, z)?.compose(&direct_power(&op, w)?)?;
        let (a, r) = lhs.max_diff(&direct_power(&op, z + w)?)?;
        let ok = r <= 1e-10;
        if !ok {
            failures.push(format!("semigroup z={z} w={w}"));
        }
        rows.push(vec![
            "semigroup".into(),
            num(z.re),
            num(z.im),
            num(w.re),
            num(w.im),
            num(a),
            num(r),
            ok.to_string(),
        ]);
    }
    write_csv(
        &ctx.path("power_check.csv"),
        &["kind", "z_re", "z_im", "w_re", "w_im", "max_abs_diff", "max_rel_diff", "passed"],
        &rows,
    )?;
    write_json(
        &ctx.path("power_check.json"),
        &PowerSummary {
            passed: failures.is_empty(),
            failures: failures.clone(),
        },
    )?;
    if !failures.is_empty() {
        return Err(CliError::Check(failures.join(", ")));
    }
    Ok(())
}
