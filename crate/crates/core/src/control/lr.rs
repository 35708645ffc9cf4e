//! Dyadic low-frequency control alternating with free decay.
//!
//! Stage `k` owns the time block `T_k ∝ 2^{-k-1}`, normalised so the blocks
//! tile `[0, T]`. During the first `block_ratio · T_k` it steers the modes with
//! `λ_j ≤ 2^k λ₀` to zero by HUM; the rest of the block is free decay. The
//! full state, including modes excited through `ω`, is propagated exactly.

use num_complex::Complex64;
use serde::Serialize;

use crate::control::hum::{control_gramian, cross_gramian, heat_propagate, ControlProblem, COND_LIMIT};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CVector};

const FREQ_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrStage {
    pub cut: f64,
    pub controlled: usize,
    pub t_start: f64,
    pub block: f64,
    pub control_time: f64,
    pub cost: f64,
    /// `‖u_S(end of control)‖ / ‖u_S(start)‖` on the controlled modes.
    pub controlled_residual: f64,
    pub cond: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrReport {
    pub stages: Vec<LrStage>,
    pub total_cost: f64,
    /// `‖u(T)‖ / ‖u0‖` over every mode of the problem.
    pub terminal_residual: f64,
    /// Share of the terminal residual carried by modes above the last cut.
    pub uncontrolled_residual: f64,
    /// Stages needed for the last cut to reach `full_lambda_cut`.
    pub stages_required: usize,
    pub complete: bool,
    #[serde(skip)]
    pub terminal_state: Vec<Complex64>,
}

/// Run the scheme with `2^{S-1} λ₀ ≥ full_lambda_cut` and `S` capped at
/// `max_stages`; a capped run is reported with `complete = false`.
pub fn lr_scheme(
    problem: &ControlProblem,
    lambda0: f64,
    full_lambda_cut: f64,
    block_ratio: f64,
    max_stages: usize,
) -> Result<LrReport> {
    if !(lambda0 > 0.0) {
        return Err(Error::Parameter(format!("lambda0 must be positive, got {lambda0}")));
    }
    if !(block_ratio > 0.0 && block_ratio <= 1.0) {
        return Err(Error::Parameter(format!("block ratio must lie in (0, 1], got {block_ratio}")));
    }
    if max_stages == 0 {
        return Err(Error::Parameter("at least one stage is needed".into()));
    }
    let mut required = 1;
    while lambda0 * 2f64.powi(required as i32 - 1) < full_lambda_cut * (1.0 - FREQ_SLACK) {
        required += 1;
    }
    let used = required.min(max_stages);
    let norm: f64 = (0..used).map(|k| 2f64.powi(-(k as i32) - 1)).sum();
    let u0n = problem.u0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut u = problem.u0.clone();
    let mut t = 0.0;
    let mut stages = Vec::with_capacity(used);
    for k in 0..used {
        let block = if k + 1 == used {
            problem.t_end - t
        } else {
            problem.t_end * 2f64.powi(-(k as i32) - 1) / norm
        };
        let tau = block_ratio * block;
        let cut = lambda0 * 2f64.powi(k as i32);
        let sel: Vec<usize> = (0..problem.len())
            .filter(|&j| problem.freqs[j] <= cut * (1.0 + FREQ_SLACK))
            .collect();
        let start_norm = sel.iter().map(|&j| u[j].norm_sqr()).sum::<f64>().sqrt();
        let mut stage = LrStage {
            cut,
            controlled: sel.len(),
            t_start: t,
            block,
            control_time: tau,
            cost: 0.0,
            controlled_residual: 0.0,
            cond: 1.0,
        };
        let mut next = heat_propagate(&u, tau, &problem.mu)?;
        if !sel.is_empty() && start_norm > 0.0 {
            let mu_s: Vec<f64> = sel.iter().map(|&j| problem.mu[j]).collect();
            let m_s = problem.gram.select_rows(&sel).select_columns(&sel);
            let g = control_gramian(&mu_s, &m_s, tau);
            let (ev, _) = hermitian_eigen(&g);
            stage.cond = if ev[0] > 0.0 { ev[ev.len() - 1] / ev[0] } else { f64::INFINITY };
            if !(stage.cond <= COND_LIMIT) {
                return Err(Error::IllConditioned {
                    cond: stage.cond,
                    limit: COND_LIMIT,
                });
            }
            let chol = g
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Numerical("stage gramian is not numerically positive definite".into()))?;
            let b = CVector::from_iterator(sel.len(), sel.iter().map(|&j| -next[j]));
            let mut phi = chol.solve(&b);
            let r = &b - &g * &phi;
            phi += chol.solve(&r);
            stage.cost = phi.dotc(&(&g * &phi)).re.max(0.0).sqrt();
            let all: Vec<usize> = (0..problem.len()).collect();
            let drive = cross_gramian(&problem.mu, &problem.gram, &all, &sel, tau) * &phi;
            for j in 0..problem.len() {
                next[j] += drive[j];
            }
            stage.controlled_residual = sel.iter().map(|&j| next[j].norm_sqr()).sum::<f64>().sqrt() / start_norm;
        }
        u = heat_propagate(&next, block - tau, &problem.mu)?;
        t += block;
        stages.push(stage);
    }
    let last_cut = stages.last().map(|s| s.cut).unwrap_or(0.0);
    let scale = if u0n > 0.0 { u0n } else { 1.0 };
    let terminal_residual = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / scale;
    let uncontrolled_residual = (0..problem.len())
        .filter(|&j| problem.freqs[j] > last_cut * (1.0 + FREQ_SLACK))
        .map(|j| u[j].norm_sqr())
        .sum::<f64>()
        .sqrt()
        / scale;
    let total_cost = stages.iter().map(|s| s.cost * s.cost).sum::<f64>().sqrt();
    Ok(LrReport {
        stages,
        total_cost,
        terminal_residual,
        uncontrolled_residual,
        stages_required: required,
        complete: used == required,
        terminal_state: u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::hum::{hum_control, DEFAULT_TOL};
    use crate::control::test_support::torus_problem;
    use crate::group::{GroupBackend, ObservationSet, SetDescriptor};
    use crate::spectral::{build_subspace, operator_for_cut};
    use crate::symbol::{OperatorParams, Preset};
    use std::f64::consts::PI;

    #[test]
    fn single_stage_is_hum() {
        let p = torus_problem(2, (0.0, 0.5), false, 1.0);
        let lr = lr_scheme(&p, 4.0 * PI + 0.5, 4.0 * PI + 0.5, 1.0, 8).unwrap();
        assert_eq!(lr.stages.len(), 1);
        let h = hum_control(&p, 0.0, DEFAULT_TOL).unwrap();
        assert!((lr.total_cost - h.cost).abs() <= 1e-8 * h.cost);
        assert!(lr.terminal_residual <= 1e-8);
    }

    #[test]
    fn three_stages_on_seven_modes() {
        let p = torus_problem(3, (0.0, 0.5), false, 1.0);
        assert_eq!(p.len(), 7);
        let lr = lr_scheme(&p, 1.6 * PI, 6.0 * PI + 0.5, 0.5, 8).unwrap();
        assert_eq!(lr.stages.len(), 3);
        assert!(lr.complete);
        assert!(lr.terminal_residual <= 1e-6, "{}", lr.terminal_residual);
        assert!(lr.total_cost.is_finite());
        for s in &lr.stages {
            assert!(s.controlled_residual <= 1e-8, "{s:?}");
        }
        let t: f64 = lr.stages.iter().map(|s| s.block).sum();
        assert!((t - 1.0).abs() < 1e-14);
        assert!((lr.stages[0].block / lr.stages[1].block - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lowest_mode_data_needs_one_stage() {
        // full observation: the stages do not couple modes
        let b = GroupBackend::Torus(1);
        let op = operator_for_cut(b, Preset::ShiftedPower, OperatorParams::default(), 6.0 * PI + 0.5).unwrap();
        let g = b.haar_quadrature(24).unwrap();
        let s = build_subspace(&op, 6.0 * PI + 0.5, &g).unwrap();
        let set = ObservationSet::new(b, SetDescriptor::Full, &g).unwrap();
        let mut u0 = vec![Complex64::new(0.0, 0.0); s.len()];
        u0[0] = Complex64::new(1.0, 0.0);
        let p = ControlProblem::new(&s, &set, &g, 1.0, 1.0, u0).unwrap();
        let lr = lr_scheme(&p, 1.6 * PI, 6.0 * PI + 0.5, 0.5, 8).unwrap();
        assert!(lr.stages[0].controlled_residual <= 1e-8);
        for st in &lr.stages[1..] {
            assert!(st.cost <= 1e-12, "{st:?}");
        }
        assert!(lr.terminal_residual <= 1e-8);
    }

    #[test]
    fn capped_schedule_reports_incomplete() {
        let p = torus_problem(3, (0.0, 0.5), false, 1.0);
        let lr = lr_scheme(&p, 1.6 * PI, 6.0 * PI + 0.5, 0.5, 2).unwrap();
        assert!(!lr.complete);
        assert_eq!(lr.stages_required, 3);
        assert!(lr.uncontrolled_residual > 0.0);
        assert!((lr.uncontrolled_residual - lr.terminal_residual).abs() <= 1e-8);
    }
}
