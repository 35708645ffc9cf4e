//! Complex powers by the resolvent integral over `∂Λ_ε`.
//!
//! The contour comes in along the ray `arg λ = 3π/4` from `|λ| = L` to
//! `|λ| = ε`, follows the circle `|λ| = ε` clockwise through `λ = ε` to
//! `arg λ = -3π/4`, and leaves along that ray. It winds once
//! counterclockwise around the spectrum in `(0, ∞)`, and
//! `A^z = -(1/2πi) ∮ λ^z (σ - λ)^{-1} dλ`. The power `λ^z` uses the
//! principal branch: its cut, the negative real axis, lies inside the sector
//! and is never crossed.
//!
//! Each ray is parametrised by `λ = e^{s ± 3πi/4}` with composite
//! Gauss–Legendre panels of unit width in `s`. The arc uses Gauss–Legendre in
//! the angle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::FourierCoefficients;
use crate::linalg::{compensated_sum_c, CMatrix};
use crate::quadrature::gauss_legendre;
use crate::symbol::{Multiplier, SpectralOperator};

/// Contribution allowed from the truncated ray tails.
pub const TAIL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourSpec {
    pub epsilon: f64,
    /// Minimum truncation radius; extended when the tail bound requires it.
    pub ray_length: f64,
    pub nodes_per_segment: usize,
}

impl ContourSpec {
    /// Default contour for an operator: `ε = c^{2/m}/2000`, 16 nodes per panel.
    pub fn for_operator(op: &SpectralOperator) -> Self {
        ContourSpec {
            epsilon: op.positivity_floor.powf(2.0 / op.order) / 2000.0,
            ray_length: 0.0,
            nodes_per_segment: 16,
        }
    }

    /// Ray length so that `(1/π) e^{3π|Im z|/4} L^{Re z} / |Re z| ≤ TAIL_TOL`,
    /// never below the spectrum scale or the configured length.
    pub fn effective_ray_length(&self, z: Complex64, spectrum_max: f64) -> f64 {
        let re = z.re;
        let growth = (0.75 * PI * z.im.abs()).exp();
        let l_tail = (TAIL_TOL * PI * re.abs() / growth).powf(1.0 / re);
        l_tail.max(self.ray_length).max(10.0 * spectrum_max).max(10.0 * self.epsilon)
    }
}

/// Nodes `λ_n` with complex weights `w_n` such that
/// `∮ g(λ) dλ ≈ Σ w_n g(λ_n)` along the oriented contour.
pub fn contour_nodes(spec: &ContourSpec, ray_length: f64) -> Vec<(Complex64, Complex64)> {
    let n = spec.nodes_per_segment.max(2);
    let (x, w) = gauss_legendre(n);
    let s0 = spec.epsilon.ln();
    let s1 = ray_length.ln();
    let panels = (s1 - s0).ceil().max(1.0) as usize;
    let h = (s1 - s0) / panels as f64;
    let mut out = Vec::with_capacity(2 * panels * n + 3 * n);
    let up = Complex64::from_polar(1.0, 0.75 * PI);
    let down = Complex64::from_polar(1.0, -0.75 * PI);
    // incoming upper ray: s runs from s1 down to s0
    for p in (0..panels).rev() {
        let a = s0 + p as f64 * h;
        for i in (0..n).rev() {
            let s = a + 0.5 * h * (x[i] + 1.0);
            let lam = up * s.exp();
            out.push((lam, -lam * (0.5 * h * w[i])));
        }
    }
    // arc from 3π/4 down to -3π/4, three panels
    let arc_panels = 3;
    let dt = 1.5 * PI / arc_panels as f64;
    for p in 0..arc_panels {
        let hi = 0.75 * PI - p as f64 * dt;
        for i in (0..n).rev() {
            let theta = hi - dt + 0.5 * dt * (x[i] + 1.0);
            let lam = Complex64::from_polar(spec.epsilon, theta);
            // dλ = iλ dθ with θ decreasing
            out.push((lam, -Complex64::i() * lam * (0.5 * dt * w[i])));
        }
    }
    // outgoing lower ray
    for p in 0..panels {
        let a = s0 + p as f64 * h;
        for i in 0..n {
            let s = a + 0.5 * h * (x[i] + 1.0);
            let lam = down * s.exp();
            out.push((lam, lam * (0.5 * h * w[i])));
        }
    }
    out
}

/// Principal `λ^z`.
fn principal_pow(lam: Complex64, z: Complex64) -> Complex64 {
    (z * Complex64::new(lam.norm().ln(), lam.arg())).exp()
}

fn validate(op: &SpectralOperator, z: Complex64, spec: &ContourSpec) -> Result<()> {
    if !(z.re < 0.0) {
        return Err(Error::UnsupportedExponent(z));
    }
    let c = op.positivity_floor;
    if !(c > 0.0) {
        return Err(Error::Parameter("contour powers need a positive floor c".into()));
    }
    let eps_max = c.powf(2.0 / op.order) / 1000.0;
    if !(spec.epsilon > 0.0 && spec.epsilon < eps_max) {
        return Err(Error::Parameter(format!(
            "contour epsilon {} must lie in (0, c^(2/m)/1000 = {eps_max})",
            spec.epsilon
        )));
    }
    if spec.nodes_per_segment < 2 {
        return Err(Error::Parameter("contour needs at least 2 nodes per segment".into()));
    }
    Ok(())
}

fn check_proximity(op: &SpectralOperator, nodes: &[(Complex64, Complex64)], epsilon: f64) -> Result<()> {
    let required = 0.5 * epsilon;
    for e in op.eigen.values() {
        for &v in &e.values {
            for (lam, _) in nodes {
                let dist = (lam - Complex64::new(v, 0.0)).norm();
                if dist < required {
                    return Err(Error::ResolventProximity {
                        node: *lam,
                        distance: dist,
                        required,
                    });
                }
            }
        }
    }
    Ok(())
}

fn spectrum_max(op: &SpectralOperator) -> f64 {
    op.eigen
        .values()
        .flat_map(|e| e.values.iter().copied())
        .fold(0.0, f64::max)
}

/// `-(1/2πi) ∮ λ^z (σ(ξ) - λ)^{-1} f̂(ξ) dλ` for every `ξ` in the support.
pub fn contour_power(
    op: &SpectralOperator,
    z: Complex64,
    spec: &ContourSpec,
    coeffs: &FourierCoefficients,
) -> Result<FourierCoefficients> {
    validate(op, z, spec)?;
    let length = spec.effective_ray_length(z, spectrum_max(op));
    let nodes = contour_nodes(spec, length);
    check_proximity(op, &nodes, spec.epsilon)?;
    let weights: Vec<(Complex64, Complex64)> = nodes
        .iter()
        .map(|&(lam, w)| (lam, w * principal_pow(lam, z)))
        .collect();
    let prefactor = -1.0 / Complex64::new(0.0, 2.0 * PI);
    let labels: Vec<_> = coeffs.entries.iter().collect();
    let results: Vec<Result<(crate::group::DualLabel, CMatrix)>> = labels
        .par_iter()
        .map(|(label, f)| {
            let s = op.get(label)?;
            let d = s.nrows();
            if f.nrows() != d {
                return Err(Error::Dimension {
                    expected: d,
                    got: f.nrows(),
                });
            }
            let terms: Vec<CMatrix> = weights
                .iter()
                .map(|&(lam, w)| {
                    let shifted = s - CMatrix::identity(d, d) * lam;
                    let sol = shifted.lu().solve(f).ok_or_else(|| Error::SingularResolvent {
                        label: label.to_string(),
                        z: lam,
                    })?;
                    Ok(sol * w)
                })
                .collect::<Result<_>>()?;
            let out = CMatrix::from_fn(d, f.ncols(), |i, j| {
                compensated_sum_c(terms.iter().map(|t| t[(i, j)])) * prefactor
            });
            Ok(((*label).clone(), out))
        })
        .collect();
    let mut out = FourierCoefficients::new();
    for r in results {
        let (l, m) = r?;
        out.insert(l, m);
    }
    Ok(out)
}

/// The symbol of `A^z` by the contour route, as a multiplier.
pub fn contour_power_symbol(op: &SpectralOperator, z: Complex64, spec: &ContourSpec) -> Result<Multiplier> {
    let ident = Multiplier::identity(&op.duals);
    let coeffs = FourierCoefficients {
        entries: ident.entries,
    };
    let out = contour_power(op, z, spec, &coeffs)?;
    Ok(Multiplier { entries: out.entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{DualLabel, GroupBackend};
    use crate::symbol::{direct_power, make_operator, OperatorParams, Preset};

    fn diag_op(values: &[f64]) -> SpectralOperator {
        let d = DualLabel::Spin(values.len() as u32 - 1).index();
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            values.len(),
            values.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        SpectralOperator::from_table(GroupBackend::Su2, 2.0, vec![(d, m)]).unwrap()
    }

    #[test]
    fn scalar_residue() {
        let op = diag_op(&[4.0]);
        let spec = ContourSpec::for_operator(&op);
        let s = contour_power_symbol(&op, Complex64::new(-1.0, 0.0), &spec).unwrap();
        let v = s.entries.values().next().unwrap()[(0, 0)];
        assert!((v - Complex64::new(0.25, 0.0)).norm() < 1e-8, "{v}");
    }

    #[test]
    fn diagonal_residues() {
        let op = diag_op(&[2.0, 8.0]);
        let spec = ContourSpec::for_operator(&op);
        let s = contour_power_symbol(&op, Complex64::new(-1.0, 0.0), &spec).unwrap();
        let m = s.entries.values().next().unwrap();
        assert!((m[(0, 0)] - Complex64::new(0.5, 0.0)).norm() < 1e-8);
        assert!((m[(1, 1)] - Complex64::new(0.125, 0.0)).norm() < 1e-8);
        assert!(m[(0, 1)].norm() < 1e-8);
    }

    #[test]
    fn agrees_with_direct_power_on_torus() {
        let duals = GroupBackend::Torus(1)
            .enumerate_dual((1.0 + 4.0 * PI * PI * 256.0).sqrt())
            .unwrap();
        let op = make_operator(GroupBackend::Torus(1), Preset::ShiftedPower, OperatorParams::default(), &duals).unwrap();
        let spec = ContourSpec::for_operator(&op);
        for z in [-0.5, -1.0] {
            let z = Complex64::new(z, 0.0);
            let c = contour_power_symbol(&op, z, &spec).unwrap();
            let d = direct_power(&op, z).unwrap();
            let (_, rel) = d.max_diff(&c).unwrap();
            assert!(rel < 1e-6, "z={z} rel={rel}");
        }
    }

    #[test]
    fn errors() {
        let op = diag_op(&[4.0]);
        let spec = ContourSpec::for_operator(&op);
        let f = FourierCoefficients::new();
        assert!(matches!(
            contour_power(&op, Complex64::new(0.5, 0.0), &spec, &f),
            Err(Error::UnsupportedExponent(_))
        ));
        let wide = ContourSpec { epsilon: 0.5, ..spec };
        assert!(matches!(
            contour_power(&op, Complex64::new(-0.5, 0.0), &wide, &f),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn nodes_stay_off_the_spectrum() {
        let op = diag_op(&[1.0, 3.0]);
        let spec = ContourSpec::for_operator(&op);
        let nodes = contour_nodes(&spec, 1e3);
        assert!(check_proximity(&op, &nodes, spec.epsilon).is_ok());
    }
}
