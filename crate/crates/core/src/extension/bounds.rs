//! Uniform bounds for the space-time symbols on `G × T(T, ε)`.
//!
//! With time eigenvalues `μ_k = (πk/(T+ε))²` and `ν_j` the eigenvalues of
//! `A^{2/m}`:
//! (i) `(1 + μ + ν)/(μ + ν) ≤ 1 + 1/ν_min`, the inverse bound;
//! (ii) `(μ + Λ_L)/(μ + ν)`, the Laplacian-to-operator ratio.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbol::SpectralOperator;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacetimeBounds {
    pub sup_inverse: f64,
    /// `1 + 1/ν_min`
    pub inverse_bound: f64,
    pub sup_ratio: f64,
    pub nu_min: f64,
    /// Relative change of each supremum when the grids are refined.
    pub drift_inverse: f64,
    pub drift_ratio: f64,
    pub stable: bool,
    /// Set when `c = 0` or some `μ + ν` vanishes.
    pub unbounded: bool,
}

fn suprema(pairs: &[(f64, f64)], t_end: f64, epsilons: &[f64], k_max: usize) -> (f64, f64) {
    let mut sup_i = 0.0f64;
    let mut sup_ii = 0.0f64;
    for &eps in epsilons {
        let w = PI / (t_end + eps);
        for k in 0..=k_max {
            let mu = (w * k as f64).powi(2);
            for &(nu, lap) in pairs {
                let den = mu + nu;
                let r1 = if den > 0.0 { (1.0 + den) / den } else { f64::INFINITY };
                let r2 = if den > 0.0 {
                    (mu + lap) / den
                } else if mu + lap == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                };
                sup_i = sup_i.max(r1);
                sup_ii = sup_ii.max(r2);
            }
        }
    }
    (sup_i, sup_ii)
}

fn drift(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if a.is_finite() && b.is_finite() {
        (a - b).abs() / a.abs().max(b.abs())
    } else {
        f64::INFINITY
    }
}

/// Suprema over `k ≤ k_max`, the `ε` grid and every eigenvalue of the
/// operator table, with a stability check on doubled grids.
pub fn check_spacetime_bounds(
    op: &SpectralOperator,
    t_end: f64,
    epsilons: &[f64],
    k_max: usize,
) -> Result<SpacetimeBounds> {
    if !(t_end > 0.0) {
        return Err(Error::Parameter(format!("T must be positive, got {t_end}")));
    }
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::Parameter("epsilon grid must be nonempty and inside (0, 1)".into()));
    }
    let mut pairs = Vec::new();
    for d in &op.duals {
        for &v in &op.eigen_of(&d.label)?.values {
            pairs.push((v.max(0.0).powf(2.0 / op.order), d.laplace_eig));
        }
    }
    let nu_min = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let (sup_i, sup_ii) = suprema(&pairs, t_end, epsilons, k_max);
    let mut fine_eps: Vec<f64> = epsilons.to_vec();
    fine_eps.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mids: Vec<f64> = fine_eps.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    fine_eps.extend(mids);
    let (fine_i, fine_ii) = suprema(&pairs, t_end, &fine_eps, 2 * k_max);
    let drift_inverse = drift(sup_i, fine_i);
    let drift_ratio = drift(sup_ii, fine_ii);
    let unbounded = !(op.positivity_floor > 0.0) || !sup_i.is_finite();
    Ok(SpacetimeBounds {
        sup_inverse: sup_i,
        inverse_bound: 1.0 + 1.0 / nu_min,
        sup_ratio: sup_ii,
        nu_min,
        drift_inverse,
        drift_ratio,
        stable: drift_inverse < 0.01 && drift_ratio < 0.01,
        unbounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{DualLabel, GroupBackend};
    use crate::linalg::CMatrix;
    use crate::symbol::{make_operator, OperatorParams, Preset};
    use num_complex::Complex64;

    #[test]
    fn shifted_scalar() {
        let b = GroupBackend::Torus(1);
        let duals = b.enumerate_dual(60.0).unwrap();
        let p = OperatorParams { c: 2.0, ..Default::default() };
        let op = make_operator(b, Preset::ShiftedPower, p, &duals).unwrap();
        let r = check_spacetime_bounds(&op, 1.0, &[0.25, 0.5], 32).unwrap();
        assert!(r.sup_inverse <= 1.0 + 1.0 / 2f64.powf(2.0 / 2.0) + 1e-12);
        assert!(r.sup_inverse <= r.inverse_bound + 1e-12);
        assert!(r.stable && !r.unbounded);
    }

    #[test]
    fn unit_eigenvalue_at_k_zero() {
        let d = DualLabel::Torus(vec![0]).index();
        let op = SpectralOperator::from_table(
            GroupBackend::Torus(1),
            2.0,
            vec![(d, CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)))],
        )
        .unwrap();
        let r = check_spacetime_bounds(&op, 1.0, &[0.5], 0).unwrap();
        assert_eq!(r.sup_inverse, 2.0);
    }

    #[test]
    fn laplacian_power_ratio_is_one() {
        let b = GroupBackend::Su2;
        let duals = b.enumerate_dual(20.0).unwrap();
        let op = make_operator(b, Preset::LaplacianPower, OperatorParams::default(), &duals).unwrap();
        let r = check_spacetime_bounds(&op, 1.0, &[0.25, 0.5], 16).unwrap();
        assert!((r.sup_ratio - 1.0).abs() < 1e-12);
        assert!(r.unbounded);
    }
}
