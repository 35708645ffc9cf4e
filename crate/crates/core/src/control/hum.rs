//! Minimal-norm null controls for `u' + diag(μ) u = P(1_ω g)` on a spectral
//! subspace.
//!
//! With `M` the Gram matrix on `ω` and `g(t) = 1_ω Σ_j h_j(t) e_j`, the mode
//! coefficients obey `u' = -D u + M h`. The control
//! `h(t) = e^{-(T-t)D} φ` with `G φ = -e^{-TD} u0` drives `u(T)` to zero,
//! where `G = ∫_0^T e^{-sD} M e^{-sD} ds`, and its cost is `(φ* G φ)^{1/2}`.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{ObservationSet, QuadratureGrid};
use crate::linalg::{hermitian_eigen, CMatrix, CVector};
use crate::quadrature::TimeGrid;
use crate::rng::{stream, TAG_CONTROL};
use crate::spectral::{gram_on_set, SpectralSubspace};

/// Largest Gramian condition number accepted by the solver.
pub const COND_LIMIT: f64 = 1e14;
pub const DEFAULT_TOL: f64 = 1e-8;
/// Uniform samples of the exported control trajectory.
pub const EXPORT_SAMPLES: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlProblem {
    /// Decay rates `μ_j = (λ_j^m)^α`, nondecreasing.
    pub mu: Vec<f64>,
    /// Frequencies `λ_j` of the modes.
    pub freqs: Vec<f64>,
    #[serde(skip)]
    pub gram: CMatrix,
    pub t_end: f64,
    #[serde(skip)]
    pub u0: Vec<Complex64>,
    pub alpha: f64,
    pub order: f64,
    /// `α m ≤ 1`
    pub subcritical: bool,
}

impl ControlProblem {
    pub fn new(
        subspace: &SpectralSubspace,
        set: &ObservationSet,
        grid: &QuadratureGrid,
        alpha: f64,
        t_end: f64,
        u0: Vec<Complex64>,
    ) -> Result<Self> {
        let gram = gram_on_set(subspace, set, grid)?;
        let mu = subspace.modes.iter().map(|m| m.eigenvalue.powf(alpha)).collect();
        Self::from_parts(mu, subspace.freqs(), gram, t_end, u0, alpha, subspace.order)
    }

    pub fn from_parts(
        mu: Vec<f64>,
        freqs: Vec<f64>,
        gram: CMatrix,
        t_end: f64,
        u0: Vec<Complex64>,
        alpha: f64,
        order: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(t_end > 0.0) {
            return Err(Error::Parameter(format!("horizon must be positive, got {t_end}")));
        }
        let n = mu.len();
        if gram.nrows() != n || gram.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: gram.nrows(),
            });
        }
        if freqs.len() != n {
            return Err(Error::Dimension { expected: n, got: freqs.len() });
        }
        if u0.len() != n {
            return Err(Error::Dimension { expected: n, got: u0.len() });
        }
        if mu.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::Parameter("decay rates must be nonnegative".into()));
        }
        if mu.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Parameter("decay rates must be nondecreasing in mode order".into()));
        }
        Ok(ControlProblem {
            mu,
            freqs,
            gram,
            t_end,
            u0,
            alpha,
            order,
            subcritical: alpha * order <= 1.0,
        })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn with_u0(&self, u0: Vec<Complex64>) -> Result<Self> {
        Self::from_parts(self.mu.clone(), self.freqs.clone(), self.gram.clone(), self.t_end, u0, self.alpha, self.order)
    }

    pub fn with_horizon(&self, t_end: f64) -> Result<Self> {
        Self::from_parts(self.mu.clone(), self.freqs.clone(), self.gram.clone(), t_end, self.u0.clone(), self.alpha, self.order)
    }
}

/// `c_j ↦ e^{-tμ_j} c_j`
pub fn heat_propagate(coeffs: &[Complex64], t: f64, mu: &[f64]) -> Result<Vec<Complex64>> {
    if !(t >= 0.0) {
        return Err(Error::OutOfRange {
            t,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if coeffs.len() != mu.len() {
        return Err(Error::Dimension {
            expected: mu.len(),
            got: coeffs.len(),
        });
    }
    Ok(coeffs.iter().zip(mu).map(|(c, m)| c * (-t * m).exp()).collect())
}

/// `∫_0^τ e^{-sμ} ds`, continuous through `μ = 0`.
fn decay_integral(tau: f64, s: f64) -> f64 {
    if s * tau < 1e-300 {
        tau
    } else {
        -(-s * tau).exp_m1() / s
    }
}

/// `G[i,j] = M[i,j] ∫_0^τ e^{-s(μ_i+μ_j)} ds` for rows `rows` and columns `cols`.
pub fn cross_gramian(mu: &[f64], gram: &CMatrix, rows: &[usize], cols: &[usize], tau: f64) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |a, b| {
        let (i, j) = (rows[a], cols[b]);
        gram[(i, j)] * decay_integral(tau, mu[i] + mu[j])
    })
}

pub fn control_gramian(mu: &[f64], gram: &CMatrix, t_end: f64) -> CMatrix {
    let all: Vec<usize> = (0..mu.len()).collect();
    cross_gramian(mu, gram, &all, &all, t_end)
}

/// Composite Gauss–Legendre panels refined geometrically towards `t_end`,
/// where the integrands `e^{-(T-s)μ}` concentrate.
pub fn graded_time_grid(t_end: f64, mu_max: f64, nodes: usize) -> Result<TimeGrid> {
    let mut breaks = vec![t_end];
    let mut h = 0.5 * t_end;
    while breaks.len() < 80 {
        breaks.push(t_end - h);
        if 2.0 * mu_max * h < 0.5 {
            break;
        }
        h *= 0.5;
    }
    breaks.push(0.0);
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    breaks.dedup();
    let mut grid = TimeGrid {
        nodes: Vec::new(),
        weights: Vec::new(),
    };
    for w in breaks.windows(2) {
        let p = TimeGrid::gauss(w[0], w[1], nodes);
        grid.nodes.extend(p.nodes);
        grid.weights.extend(p.weights);
    }
    Ok(grid)
}

/// The Gramian by time quadrature, as an independent route.
pub fn control_gramian_quadrature(mu: &[f64], gram: &CMatrix, t_end: f64, nodes: usize) -> Result<CMatrix> {
    let mu_max = mu.iter().copied().fold(0.0, f64::max);
    let tg = graded_time_grid(t_end, mu_max, nodes)?;
    let n = mu.len();
    let mut g = CMatrix::zeros(n, n);
    for (&s, &w) in tg.nodes.iter().zip(&tg.weights) {
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] += gram[(i, j)] * (w * (-(t_end - s) * (mu[i] + mu[j])).exp());
            }
        }
    }
    Ok(g)
}

fn condition(g: &CMatrix) -> f64 {
    let (v, _) = hermitian_eigen(g);
    let lo = v[0];
    let hi = v[v.len() - 1];
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlResult {
    #[serde(skip)]
    pub phi: Vec<Complex64>,
    /// `(φ* G φ)^{1/2}`
    pub cost: f64,
    /// `(∫ h* M h dt)^{1/2}` by time quadrature.
    pub cost_quadrature: f64,
    /// `‖u(T)‖ / ‖u0‖` from a Duhamel simulation.
    pub terminal_residual: f64,
    pub cond: f64,
    pub regularized: bool,
    /// `(t, h(t))` at uniform times.
    #[serde(skip)]
    pub samples: Vec<(f64, Vec<Complex64>)>,
}

/// `h(t) = e^{-(T-t)D} φ`
pub fn control_coefficients(phi: &[Complex64], mu: &[f64], t_end: f64, t: f64) -> Vec<Complex64> {
    phi.iter().zip(mu).map(|(p, m)| p * (-(t_end - t) * m).exp()).collect()
}

/// Hermitian positive definite solve by Cholesky with one step of
/// iterative refinement.
fn spd_solve(g: &CMatrix, b: &CVector) -> Result<CVector> {
    let chol = g
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("gramian is not numerically positive definite".into()))?;
    let mut x = chol.solve(b);
    let r = b - g * &x;
    x += chol.solve(&r);
    Ok(x)
}

/// The HUM control with Tikhonov shift `σ tr(G)/N` and terminal tolerance `tol`.
pub fn hum_control(problem: &ControlProblem, regularization: f64, tol: f64) -> Result<ControlResult> {
    let n = problem.len();
    let u0n = problem.u0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut g = control_gramian(&problem.mu, &problem.gram, problem.t_end);
    if u0n == 0.0 {
        return Ok(ControlResult {
            phi: vec![Complex64::new(0.0, 0.0); n],
            cost: 0.0,
            cost_quadrature: 0.0,
            terminal_residual: 0.0,
            cond: condition(&g),
            regularized: false,
            samples: (0..EXPORT_SAMPLES)
                .map(|k| (problem.t_end * k as f64 / (EXPORT_SAMPLES - 1) as f64, vec![Complex64::new(0.0, 0.0); n]))
                .collect(),
        });
    }
    let regularized = regularization > 0.0;
    if regularized {
        let shift = regularization * g.trace().re / n as f64;
        for i in 0..n {
            g[(i, i)] += shift;
        }
    }
    let cond = condition(&g);
    if !(cond <= COND_LIMIT) {
        return Err(Error::IllConditioned { cond, limit: COND_LIMIT });
    }
    let target = CVector::from_vec(heat_propagate(&problem.u0, problem.t_end, &problem.mu)?);
    let phi = spd_solve(&g, &(-&target))?;
    let cost = (phi.adjoint() * &g * &phi)[(0, 0)].re.max(0.0).sqrt();
    // independent route: simulate u(T) and the cost by time quadrature
    let mu_max = problem.mu.iter().copied().fold(0.0, f64::max);
    let tg = graded_time_grid(problem.t_end, mu_max, 32)?;
    let phis: Vec<Complex64> = phi.iter().copied().collect();
    let mut ut = target.clone();
    let mut cost2 = 0.0;
    for (&s, &w) in tg.nodes.iter().zip(&tg.weights) {
        let h = CVector::from_vec(control_coefficients(&phis, &problem.mu, problem.t_end, s));
        let mh = &problem.gram * &h;
        cost2 += w * h.dotc(&mh).re;
        for i in 0..n {
            ut[i] += mh[i] * (w * (-(problem.t_end - s) * problem.mu[i]).exp());
        }
    }
    let terminal_residual = ut.norm() / u0n;
    let samples = (0..EXPORT_SAMPLES)
        .map(|k| {
            let t = problem.t_end * k as f64 / (EXPORT_SAMPLES - 1) as f64;
            (t, control_coefficients(&phis, &problem.mu, problem.t_end, t))
        })
        .collect();
    let result = ControlResult {
        phi: phis,
        cost,
        cost_quadrature: cost2.max(0.0).sqrt(),
        terminal_residual,
        cond,
        regularized,
        samples,
    };
    if !regularized && terminal_residual > tol {
        return Err(Error::Convergence {
            residual: terminal_residual,
            tol,
        });
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservabilityCost {
    pub c_t: f64,
    pub cond: f64,
}

/// `C_T = λ_max(E G^{-1} E)^{1/2}` with `E = e^{-TD}`.
pub fn observability_cost(problem: &ControlProblem) -> Result<ObservabilityCost> {
    let g = control_gramian(&problem.mu, &problem.gram, problem.t_end);
    let cond = condition(&g);
    if !(cond <= COND_LIMIT) {
        return Err(Error::IllConditioned { cond, limit: COND_LIMIT });
    }
    let chol = g
        .cholesky()
        .ok_or_else(|| Error::Numerical("gramian is not numerically positive definite".into()))?;
    let n = problem.len();
    let e = CMatrix::from_diagonal(&CVector::from_iterator(
        n,
        problem.mu.iter().map(|m| Complex64::new((-problem.t_end * m).exp(), 0.0)),
    ));
    let x = chol.l().solve_lower_triangular(&e).ok_or_else(|| Error::Numerical("singular factor".into()))?;
    let c_t = x.singular_values().iter().copied().fold(0.0, f64::max);
    Ok(ObservabilityCost { c_t, cond })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Duality {
    pub c_t: f64,
    /// Largest HUM cost over random unit `u0`.
    pub max_random: f64,
    /// HUM cost of the power-iteration maximiser.
    pub power_cost: f64,
    pub power_iterations: usize,
}

/// Compare `C_T` with HUM costs of random and power-iterated unit data.
/// Random draws use the cost `((E u0)* G^{-1} E u0)^{1/2}` of the HUM control
/// from one factorisation; the maximiser is re-solved in full.
pub fn duality_check(problem: &ControlProblem, samples: usize, seed: u64) -> Result<Duality> {
    let obs = observability_cost(problem)?;
    let n = problem.len();
    let mut rng = stream(seed, TAG_CONTROL);
    let g = control_gramian(&problem.mu, &problem.gram, problem.t_end);
    let chol = g
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("gramian is not numerically positive definite".into()))?;
    let e: Vec<f64> = problem.mu.iter().map(|m| (-problem.t_end * m).exp()).collect();
    // cost(u0)² = (E u0)* G^{-1} (E u0)
    let cost_of = |u: &CVector| -> f64 {
        let b = CVector::from_fn(n, |i, _| u[i] * e[i]);
        b.dotc(&chol.solve(&b)).re.max(0.0).sqrt()
    };
    let mut max_random = 0.0f64;
    for _ in 0..samples {
        let mut u = CVector::from_fn(n, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        u /= Complex64::new(u.norm(), 0.0);
        max_random = max_random.max(cost_of(&u));
    }
    let mut u = CVector::from_element(n, Complex64::new(1.0, 0.0));
    u /= Complex64::new(u.norm(), 0.0);
    let mut iterations = 0;
    let mut last = 0.0;
    for it in 1..=500 {
        iterations = it;
        let b = CVector::from_fn(n, |i, _| u[i] * e[i]);
        let y = chol.solve(&b);
        let next = CVector::from_fn(n, |i, _| y[i] * e[i]);
        let nn = next.norm();
        if nn == 0.0 {
            break;
        }
        u = next / Complex64::new(nn, 0.0);
        let c = cost_of(&u);
        if (c - last).abs() <= 1e-12 * c {
            break;
        }
        last = c;
    }
    let power = hum_control(&problem.with_u0(u.iter().copied().collect())?, 0.0, f64::INFINITY)?;
    Ok(Duality {
        c_t: obs.c_t,
        max_random,
        power_cost: power.cost,
        power_iterations: iterations,
    })
}
