//! Ellipticity constants and resolvent bounds over the left sector.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{DualIndex, DualLabel};
use crate::linalg::{op_norm, singular_range, CMatrix};
use crate::symbol::SpectralOperator;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ellipticity {
    /// Largest `C1` with `C1 ⟨ξ⟩^m ≤ s_min(σ(ξ))`.
    pub c1: f64,
    /// Smallest `C2` with `s_max(σ(ξ)) ≤ C2 ⟨ξ⟩^m`.
    pub c2: f64,
    pub elliptic: bool,
}

/// Tightest two-sided ellipticity constants over `duals`.
pub fn check_ellipticity(op: &SpectralOperator, duals: &[DualIndex]) -> Result<Ellipticity> {
    if duals.is_empty() {
        return Err(Error::Parameter("ellipticity check needs a nonempty dual list".into()));
    }
    let mut c1 = f64::INFINITY;
    let mut c2 = 0.0f64;
    for d in duals {
        let (smin, smax) = singular_range(op.get(&d.label)?);
        let w = d.bracket.powf(op.order);
        c1 = c1.min(smin / w);
        c2 = c2.max(smax / w);
    }
    let elliptic = c1 > 0.0;
    Ok(Ellipticity {
        c1: c1.max(0.0),
        c2,
        elliptic,
    })
}

/// The left sector `Λ = {|Im z| ≤ -Re z}` enlarged by the disc `|z| ≤ ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sector {
    pub epsilon: f64,
}

impl Sector {
    pub fn new(epsilon: f64) -> Self {
        Sector { epsilon }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z.re <= 0.0 && z.im.abs() <= -z.re * (1.0 + 1e-12)) || z.norm() <= self.epsilon
    }

    /// Deterministic samples: the two boundary rays and the negative axis at
    /// geometrically spaced radii in `[r_min, r_max]`, `per_ray` each.
    pub fn samples(&self, r_min: f64, r_max: f64, per_ray: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(3 * per_ray);
        let angles = [0.75 * std::f64::consts::PI, std::f64::consts::PI, -0.75 * std::f64::consts::PI];
        for k in 0..per_ray {
            let s = if per_ray == 1 { 0.0 } else { k as f64 / (per_ray - 1) as f64 };
            let r = r_min * (r_max / r_min).powf(s);
            for &a in &angles {
                out.push(Complex64::from_polar(r, a));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterEllipticity {
    /// `sup ‖(σ(ξ) - z)^{-1}‖ (1 + ⟨ξ⟩ + |z|^{1/m})^m`
    pub worst: f64,
    pub worst_label: DualLabel,
    pub worst_z: (f64, f64),
}

fn resolvent_norm(s: &CMatrix, z: Complex64, label: &DualLabel) -> Result<f64> {
    let n = s.nrows();
    let shifted = s - CMatrix::identity(n, n) * z;
    let (smin, _) = singular_range(&shifted);
    let scale = op_norm(s).max(z.norm()).max(1.0);
    if smin <= 1e-14 * scale {
        return Err(Error::SingularResolvent {
            label: label.to_string(),
            z,
        });
    }
    Ok(1.0 / smin)
}

/// Worst parameter-ellipticity constant over the sampled pairs.
pub fn check_parameter_ellipticity(
    op: &SpectralOperator,
    sector: &Sector,
    z_samples: &[Complex64],
    duals: &[DualIndex],
) -> Result<ParameterEllipticity> {
    if let Some(&z) = z_samples.iter().find(|z| !sector.contains(**z)) {
        return Err(Error::OutsideSector { z });
    }
    if duals.is_empty() || z_samples.is_empty() {
        return Err(Error::Parameter("parameter-ellipticity check needs duals and samples".into()));
    }
    let m = op.order;
    let mut best = ParameterEllipticity {
        worst: 0.0,
        worst_label: duals[0].label.clone(),
        worst_z: (z_samples[0].re, z_samples[0].im),
    };
    for d in duals {
        let s = op.get(&d.label)?;
        for &z in z_samples {
            let r = resolvent_norm(s, z, &d.label)?;
            let v = r * (1.0 + d.bracket + z.norm().powf(1.0 / m)).powf(m);
            if v > best.worst {
                best = ParameterEllipticity {
                    worst: v,
                    worst_label: d.label.clone(),
                    worst_z: (z.re, z.im),
                };
            }
        }
    }
    Ok(best)
}

/// `sup_ξ ‖(σ(ξ) - z)^{-1}‖ ⟨ξ⟩^m` at a fixed `z`.
pub fn resolvent_order_bound(op: &SpectralOperator, z: Complex64, duals: &[DualIndex]) -> Result<f64> {
    let mut worst = 0.0f64;
    for d in duals {
        let r = resolvent_norm(op.get(&d.label)?, z, &d.label)?;
        worst = worst.max(r * d.bracket.powf(op.order));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupBackend;
    use crate::symbol::{make_operator, OperatorParams, Preset};
    use std::f64::consts::PI;

    fn torus_duals(kmax: i64) -> Vec<DualIndex> {
        GroupBackend::Torus(1)
            .enumerate_dual((1.0 + 4.0 * PI * PI * (kmax * kmax) as f64).sqrt())
            .unwrap()
    }

    #[test]
    fn shifted_power_is_exactly_elliptic() {
        let duals = torus_duals(10);
        let op = make_operator(GroupBackend::Torus(1), Preset::ShiftedPower, OperatorParams::default(), &duals).unwrap();
        let e = check_ellipticity(&op, &duals).unwrap();
        assert!((e.c1 - 1.0).abs() < 1e-12 && (e.c2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_power_without_trivial_rep() {
        let duals: Vec<_> = torus_duals(10).into_iter().filter(|d| d.laplace_eig > 0.0).collect();
        let op = make_operator(GroupBackend::Torus(1), Preset::LaplacianPower, OperatorParams::default(), &duals).unwrap();
        let e = check_ellipticity(&op, &duals).unwrap();
        let expected = 4.0 * PI * PI / (1.0 + 4.0 * PI * PI);
        assert!((e.c1 - expected).abs() < 1e-12);
        assert!(e.elliptic);
    }

    #[test]
    fn zero_symbol_is_flagged() {
        let duals = torus_duals(2);
        let table = duals.iter().map(|d| (d.clone(), CMatrix::zeros(1, 1))).collect();
        let op = SpectralOperator::from_table(GroupBackend::Torus(1), 1.0, table).unwrap();
        let e = check_ellipticity(&op, &duals).unwrap();
        assert!(!e.elliptic);
        assert_eq!(e.c1, 0.0);
    }

    #[test]
    fn scalar_parameter_ellipticity() {
        let d = DualLabel::Torus(vec![1]).index();
        let op = SpectralOperator::from_table(
            GroupBackend::Torus(1),
            1.0,
            vec![(d.clone(), CMatrix::from_element(1, 1, Complex64::new(2.0, 0.0)))],
        )
        .unwrap();
        let r = check_parameter_ellipticity(&op, &Sector::new(0.0), &[Complex64::new(-2.0, 0.0)], &[d.clone()]).unwrap();
        assert!((r.worst - (3.0 + d.bracket) / 4.0).abs() < 1e-14);
    }

    #[test]
    fn positive_axis_is_outside() {
        let duals = torus_duals(1);
        let op = make_operator(GroupBackend::Torus(1), Preset::ShiftedPower, OperatorParams::default(), &duals).unwrap();
        let r = check_parameter_ellipticity(&op, &Sector::new(0.01), &[Complex64::new(3.0, 0.0)], &duals);
        assert!(matches!(r, Err(Error::OutsideSector { .. })));
    }

    #[test]
    fn sup_saturates_under_ray_doubling() {
        let duals = torus_duals(16);
        let op = make_operator(GroupBackend::Torus(1), Preset::ShiftedPower, OperatorParams::default(), &duals).unwrap();
        let s = Sector::new(0.0);
        let a = check_parameter_ellipticity(&op, &s, &s.samples(1e-3, 1e4, 34), &duals).unwrap();
        let b = check_parameter_ellipticity(&op, &s, &s.samples(1e-3, 2e4, 67), &duals).unwrap();
        assert!((b.worst - a.worst).abs() / a.worst < 0.05);
        let bound = resolvent_order_bound(&op, Complex64::new(-1.0, 1.0), &duals).unwrap();
        assert!(bound.is_finite() && bound <= 1.0 + 1e-12);
    }
}
