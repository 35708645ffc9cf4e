//! Flat `key = value` experiment configuration with dotted section names.
//!
//! `#` starts a comment. Every key has a default, unknown keys are rejected
//! and [`ExperimentConfig::render`] is the canonical form, so
//! `parse(render(c)) == c`.

use std::fmt::Write as _;
use std::str::FromStr;

use lrspec_core::group::{EulerAngles, GroupBackend, GroupPoint, SetDescriptor};
use lrspec_core::symbol::{OperatorParams, Preset};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Omega {
    Empty,
    Full,
    Arcs(Vec<(f64, f64)>),
    Box(Vec<(f64, f64)>),
    Ball { radius: f64, center: Vec<f64> },
}

fn join<T: std::fmt::Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

fn render_arcs(v: &[(f64, f64)]) -> String {
    v.iter().map(|(a, b)| format!("{a:?}:{b:?}")).collect::<Vec<_>>().join(", ")
}

impl Omega {
    pub fn render(&self) -> String {
        match self {
            Omega::Empty => "empty".into(),
            Omega::Full => "full".into(),
            Omega::Arcs(v) => format!("arcs({})", render_arcs(v)),
            Omega::Box(v) => format!("box({})", render_arcs(v)),
            Omega::Ball { radius, center } => format!("ball({radius:?}; {})", join(center)),
        }
    }

    pub fn descriptor(&self, backend: GroupBackend) -> Result<SetDescriptor, CliError> {
        Ok(match self {
            Omega::Empty => SetDescriptor::Empty,
            Omega::Full => SetDescriptor::Full,
            Omega::Arcs(v) => SetDescriptor::Arcs(v.clone()),
            Omega::Box(v) => SetDescriptor::Box(v.clone()),
            Omega::Ball { radius, center } => SetDescriptor::Ball {
                center: point(backend, center, "omega")?,
                radius: *radius,
            },
        })
    }
}

/// A group point from coordinates: torus coordinates or z-y-z Euler angles.
pub fn point(backend: GroupBackend, coords: &[f64], key: &str) -> Result<GroupPoint, CliError> {
    match backend {
        _ if coords.is_empty() => Ok(backend.identity()),
        GroupBackend::Torus(n) if coords.len() == n => Ok(GroupPoint::Torus(coords.to_vec())),
        GroupBackend::Su2 if coords.len() == 3 => Ok(GroupPoint::Euler(EulerAngles::new(coords[0], coords[1], coords[2]))),
        _ => Err(CliError::Config(format!("{key}: {} coordinates do not fit {}", coords.len(), backend.name()))),
    }
}

fn parse_num<T: FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse '{}'", s.trim())))
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|p| parse_num(key, p)).collect()
}

fn parse_arcs(key: &str, s: &str) -> Result<Vec<(f64, f64)>, CliError> {
    s.split(',')
        .map(|p| {
            let (a, b) = p
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("{key}: arc '{}' must read a:b", p.trim())))?;
            Ok((parse_num(key, a)?, parse_num(key, b)?))
        })
        .collect()
}

fn parse_omega(key: &str, s: &str) -> Result<Omega, CliError> {
    let s = s.trim();
    let inner = |prefix: &str| s.strip_prefix(prefix).and_then(|r| r.strip_suffix(')'));
    if s == "empty" {
        Ok(Omega::Empty)
    } else if s == "full" {
        Ok(Omega::Full)
    } else if let Some(r) = inner("arcs(") {
        Ok(Omega::Arcs(parse_arcs(key, r)?))
    } else if let Some(r) = inner("box(") {
        Ok(Omega::Box(parse_arcs(key, r)?))
    } else if let Some(r) = inner("ball(") {
        let (rad, c) = r.split_once(';').unwrap_or((r, ""));
        Ok(Omega::Ball {
            radius: parse_num(key, rad)?,
            center: parse_list(key, c)?,
        })
    } else {
        Err(CliError::Config(format!(
            "{key}: '{s}' is not one of empty, full, arcs(a:b, ...), box(a:b, ...), ball(r; coords)"
        )))
    }
}

fn parse_bool(key: &str, s: &str) -> Result<bool, CliError> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        o => Err(CliError::Config(format!("{key}: expected true or false, got '{o}'"))),
    }
}

fn parse_choice(key: &str, s: &str, allowed: &[&str]) -> Result<String, CliError> {
    let v = s.trim();
    if allowed.contains(&v) {
        Ok(v.to_string())
    } else {
        Err(CliError::Config(format!("{key}: '{v}' is not one of {}", allowed.join(", "))))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub group: String,
    pub resolution: usize,
    pub seed: u64,
    pub output_dir: String,
    pub preset: String,
    pub m: f64,
    pub c: f64,
    pub eta: f64,
    pub operator_seed: u64,
    pub omega: Omega,
    pub lambda_cut: f64,
    pub lambda_grid: Vec<f64>,
    pub t_end: f64,
    pub t_grid: Vec<f64>,
    pub alpha: f64,
    pub epsilon_grid: Vec<f64>,
    pub interp_alpha: f64,
    pub interp_draws: usize,
    pub contour_epsilon: f64,
    pub contour_ray_length: f64,
    pub contour_nodes: usize,
    pub contour_z_re: Vec<f64>,
    pub contour_z_im: Vec<f64>,
    pub contour_tol: f64,
    pub doubling_radius: f64,
    pub doubling_trials: usize,
    pub doubling_steps: usize,
    pub doubling_density: usize,
    pub doubling_center: Vec<f64>,
    pub control_u0: String,
    pub control_regularization: f64,
    pub control_tol: f64,
    pub control_scheme: String,
    pub control_lambda0: f64,
    pub control_block_ratio: f64,
    pub control_max_stages: usize,
    pub symbol_kind: String,
    pub symbol_rho: f64,
    pub symbol_delta: f64,
    pub symbol_max_order: usize,
    pub symbol_k_max: i64,
    pub symbol_x_points: usize,
    pub symbol_weight: String,
    pub verify_duality: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            group: "torus1".into(),
            resolution: 64,
            seed: 0,
            output_dir: "./out".into(),
            preset: "shifted_power".into(),
            m: 2.0,
            c: 1.0,
            eta: 0.0,
            operator_seed: 0,
            omega: Omega::Arcs(vec![(0.0, 0.3)]),
            lambda_cut: 19.5,
            lambda_grid: vec![7.0, 13.0, 19.5],
            t_end: 1.0,
            t_grid: vec![0.8, 0.4, 0.2, 0.1, 0.05],
            alpha: 1.0,
            epsilon_grid: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            interp_alpha: 0.1,
            interp_draws: 10,
            contour_epsilon: 0.0,
            contour_ray_length: 0.0,
            contour_nodes: 16,
            contour_z_re: vec![-1.0, -0.5],
            contour_z_im: vec![0.0, 0.0],
            contour_tol: 1e-6,
            doubling_radius: 0.1,
            doubling_trials: 16,
            doubling_steps: 60,
            doubling_density: 2000,
            doubling_center: Vec::new(),
            control_u0: "random".into(),
            control_regularization: 0.0,
            control_tol: 1e-8,
            control_scheme: "hum".into(),
            control_lambda0: 0.0,
            control_block_ratio: 0.5,
            control_max_stages: 16,
            symbol_kind: "operator".into(),
            symbol_rho: 1.0,
            symbol_delta: 0.0,
            symbol_max_order: 3,
            symbol_k_max: 256,
            symbol_x_points: 256,
            symbol_weight: "laplacian".into(),
            verify_duality: true,
        }
    }
}

impl ExperimentConfig {
    /// Canonical `(key, value)` pairs in rendering order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("group", self.group.clone()),
            ("resolution", self.resolution.to_string()),
            ("seed", self.seed.to_string()),
            ("output.dir", self.output_dir.clone()),
            ("operator.preset", self.preset.clone()),
            ("operator.m", format!("{:?}", self.m)),
            ("operator.c", format!("{:?}", self.c)),
            ("operator.eta", format!("{:?}", self.eta)),
            ("operator.seed", self.operator_seed.to_string()),
            ("omega", self.omega.render()),
            ("lambda.cut", format!("{:?}", self.lambda_cut)),
            ("lambda.grid", join(&self.lambda_grid)),
            ("time.T", format!("{:?}", self.t_end)),
            ("time.T_grid", join(&self.t_grid)),
            ("time.alpha", format!("{:?}", self.alpha)),
            ("time.epsilon_grid", join(&self.epsilon_grid)),
            ("interp.alpha", format!("{:?}", self.interp_alpha)),
            ("interp.draws", self.interp_draws.to_string()),
            ("contour.epsilon", format!("{:?}", self.contour_epsilon)),
            ("contour.ray_length", format!("{:?}", self.contour_ray_length)),
            ("contour.nodes", self.contour_nodes.to_string()),
            ("contour.z_re", join(&self.contour_z_re)),
            ("contour.z_im", join(&self.contour_z_im)),
            ("contour.tol", format!("{:?}", self.contour_tol)),
            ("doubling.radius", format!("{:?}", self.doubling_radius)),
            ("doubling.trials", self.doubling_trials.to_string()),
            ("doubling.steps", self.doubling_steps.to_string()),
            ("doubling.density", self.doubling_density.to_string()),
            ("doubling.center", join(&self.doubling_center)),
            ("control.u0", self.control_u0.clone()),
            ("control.regularization", format!("{:?}", self.control_regularization)),
            ("control.tol", format!("{:?}", self.control_tol)),
            ("control.scheme", self.control_scheme.clone()),
            ("control.lambda0", format!("{:?}", self.control_lambda0)),
            ("control.block_ratio", format!("{:?}", self.control_block_ratio)),
            ("control.max_stages", self.control_max_stages.to_string()),
            ("symbol.kind", self.symbol_kind.clone()),
            ("symbol.rho", format!("{:?}", self.symbol_rho)),
            ("symbol.delta", format!("{:?}", self.symbol_delta)),
            ("symbol.max_order", self.symbol_max_order.to_string()),
            ("symbol.k_max", self.symbol_k_max.to_string()),
            ("symbol.x_points", self.symbol_x_points.to_string()),
            ("symbol.weight", self.symbol_weight.clone()),
            ("verify.duality", self.verify_duality.to_string()),
        ]
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "group" => {
                GroupBackend::from_name(v.trim()).map_err(|e| CliError::Config(format!("group: {e}")))?;
                self.group = v.trim().into();
            }
            "resolution" => self.resolution = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "output.dir" => self.output_dir = v.trim().into(),
            "operator.preset" => {
                Preset::from_name(v.trim()).map_err(|e| CliError::Config(format!("{key}: {e}")))?;
                self.preset = v.trim().into();
            }
            "operator.m" => self.m = parse_num(key, v)?,
            "operator.c" => self.c = parse_num(key, v)?,
            "operator.eta" => self.eta = parse_num(key, v)?,
            "operator.seed" => self.operator_seed = parse_num(key, v)?,
            "omega" => self.omega = parse_omega(key, v)?,
            "lambda.cut" => self.lambda_cut = parse_num(key, v)?,
            "lambda.grid" => self.lambda_grid = parse_list(key, v)?,
            "time.T" => self.t_end = parse_num(key, v)?,
            "time.T_grid" => self.t_grid = parse_list(key, v)?,
            "time.alpha" => self.alpha = parse_num(key, v)?,
            "time.epsilon_grid" => self.epsilon_grid = parse_list(key, v)?,
            "interp.alpha" => self.interp_alpha = parse_num(key, v)?,
            "interp.draws" => self.interp_draws = parse_num(key, v)?,
            "contour.epsilon" => self.contour_epsilon = parse_num(key, v)?,
            "contour.ray_length" => self.contour_ray_length = parse_num(key, v)?,
            "contour.nodes" => self.contour_nodes = parse_num(key, v)?,
            "contour.z_re" => self.contour_z_re = parse_list(key, v)?,
            "contour.z_im" => self.contour_z_im = parse_list(key, v)?,
            "contour.tol" => self.contour_tol = parse_num(key, v)?,
            "doubling.radius" => self.doubling_radius = parse_num(key, v)?,
            "doubling.trials" => self.doubling_trials = parse_num(key, v)?,
            "doubling.steps" => self.doubling_steps = parse_num(key, v)?,
            "doubling.density" => self.doubling_density = parse_num(key, v)?,
            "doubling.center" => self.doubling_center = parse_list(key, v)?,
            "control.u0" => self.control_u0 = parse_choice(key, v, &["random", "ones", "lowest"])?,
            "control.regularization" => self.control_regularization = parse_num(key, v)?,
            "control.tol" => self.control_tol = parse_num(key, v)?,
            "control.scheme" => self.control_scheme = parse_choice(key, v, &["hum", "lr"])?,
            "control.lambda0" => self.control_lambda0 = parse_num(key, v)?,
            "control.block_ratio" => self.control_block_ratio = parse_num(key, v)?,
            "control.max_stages" => self.control_max_stages = parse_num(key, v)?,
            "symbol.kind" => self.symbol_kind = parse_choice(key, v, &["operator", "modulated", "exponential"])?,
            "symbol.rho" => self.symbol_rho = parse_num(key, v)?,
            "symbol.delta" => self.symbol_delta = parse_num(key, v)?,
            "symbol.max_order" => self.symbol_max_order = parse_num(key, v)?,
            "symbol.k_max" => self.symbol_k_max = parse_num(key, v)?,
            "symbol.x_points" => self.symbol_x_points = parse_num(key, v)?,
            "symbol.weight" => self.symbol_weight = parse_choice(key, v, &["lattice", "laplacian"])?,
            "verify.duality" => self.verify_duality = parse_bool(key, v)?,
            other => return Err(CliError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", no + 1)))?;
            let k = k.trim();
            if !seen.insert(k.to_string()) {
                return Err(CliError::Config(format!("duplicate key '{k}'")));
            }
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.contour_z_re.len() != self.contour_z_im.len() {
            return Err(CliError::Config("contour.z_re and contour.z_im differ in length".into()));
        }
        if self.lambda_grid.iter().any(|l| !(*l > 0.0)) {
            return Err(CliError::Config("lambda.grid: entries must be positive".into()));
        }
        let b = self.backend()?;
        self.omega.descriptor(b)?.validate(b).map_err(|e| CliError::Config(format!("omega: {e}")))?;
        Ok(())
    }

    pub fn backend(&self) -> Result<GroupBackend, CliError> {
        GroupBackend::from_name(&self.group).map_err(|e| CliError::Config(format!("group: {e}")))
    }

    pub fn preset(&self) -> Result<Preset, CliError> {
        Preset::from_name(&self.preset).map_err(|e| CliError::Config(format!("operator.preset: {e}")))
    }

    pub fn params(&self) -> OperatorParams {
        OperatorParams {
            m: self.m,
            c: self.c,
            eta: self.eta,
            seed: self.operator_seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::default();
        c.omega = Omega::Ball {
            radius: 0.7,
            center: vec![0.1, 0.2, 0.3],
        };
        c.group = "su2".into();
        c.t_grid = vec![0.3, 1e-3];
        c.doubling_center = vec![1.0, 0.5, 0.25];
        let r = c.render();
        assert_eq!(ExperimentConfig::parse(&r).unwrap(), c);
        assert_eq!(ExperimentConfig::parse(&r).unwrap().render(), r);
        let d = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&d.render()).unwrap(), d);
        assert_eq!(ExperimentConfig::parse("").unwrap(), d);
    }

    #[test]
    fn unknown_key_names_the_path() {
        let e = ExperimentConfig::parse("operator.shift = 2\n").unwrap_err();
        assert!(e.to_string().contains("operator.shift"));
        assert!(ExperimentConfig::parse("seed = 1\nseed = 2").is_err());
        assert!(ExperimentConfig::parse("omega = disc(0)").is_err());
        assert!(ExperimentConfig::parse("time.T = x").unwrap_err().to_string().contains("time.T"));
    }

    #[test]
    fn comments_and_arcs() {
        let c = ExperimentConfig::parse("# hi\nomega = arcs(0:0.25, 0.5:0.75) # two arcs\n").unwrap();
        assert_eq!(c.omega, Omega::Arcs(vec![(0.0, 0.25), (0.5, 0.75)]));
    }
}
