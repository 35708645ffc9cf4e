//! The group Fourier transform pair on a quadrature grid.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{DualIndex, DualLabel, GroupBackend, GroupPoint, QuadratureGrid};
use crate::linalg::{hs_norm, CMatrix};

/// Finitely supported Fourier data `ξ ↦ f̂(ξ)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FourierCoefficients {
    pub entries: BTreeMap<DualLabel, CMatrix>,
}

impl FourierCoefficients {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: DualLabel, m: CMatrix) {
        self.entries.insert(label, m);
    }

    pub fn get(&self, label: &DualLabel) -> Option<&CMatrix> {
        self.entries.get(label)
    }

    /// `(Σ d_ξ ‖f̂(ξ)‖²_HS)^{1/2}`
    pub fn l2_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|(l, m)| l.dim() as f64 * hs_norm(m).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entrywise deviation over the union of both supports.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (l, a) in &self.entries {
            let d = match other.entries.get(l) {
                Some(b) => crate::linalg::max_entry_diff(a, b),
                None => a.iter().map(|z| z.norm()).fold(0.0, f64::max),
            };
            worst = worst.max(d);
        }
        for (l, b) in &other.entries {
            if !self.entries.contains_key(l) {
                worst = worst.max(b.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    pub fn scale(&self, s: Complex64) -> Self {
        FourierCoefficients {
            entries: self.entries.iter().map(|(l, m)| (l.clone(), m * s)).collect(),
        }
    }
}

/// `f̂(ξ) = Σ_nodes w · f(x) · ξ(x)*`
pub fn fourier_transform(
    backend: GroupBackend,
    grid: &QuadratureGrid,
    f: &[Complex64],
    duals: &[DualIndex],
) -> Result<FourierCoefficients> {
    if f.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            got: f.len(),
        });
    }
    for d in duals {
        let deg = d.label.band_degree();
        grid.check_pair(&format!("fourier transform at {}", d.label), deg, deg)?;
    }
    let mats: Vec<Result<(DualLabel, CMatrix)>> = duals
        .par_iter()
        .map(|d| {
            let mut acc = CMatrix::zeros(d.dim, d.dim);
            for ((x, w), fx) in grid.nodes.iter().zip(&grid.weights).zip(f) {
                let r = backend.rep_matrix(&d.label, x)?;
                acc += r.adjoint() * (fx * *w);
            }
            Ok((d.label.clone(), acc))
        })
        .collect();
    let mut out = FourierCoefficients::new();
    for m in mats {
        let (l, a) = m?;
        out.insert(l, a);
    }
    Ok(out)
}

/// `f(x) = Σ_ξ d_ξ Tr[ξ(x) f̂(ξ)]`
pub fn inverse_fourier(backend: GroupBackend, coeffs: &FourierCoefficients, x: &GroupPoint) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (label, m) in &coeffs.entries {
        let r = backend.rep_matrix(label, x)?;
        if r.nrows() != m.nrows() || m.nrows() != m.ncols() {
            return Err(Error::Dimension {
                expected: r.nrows(),
                got: m.nrows(),
            });
        }
        acc += (r * m).trace() * label.dim() as f64;
    }
    Ok(acc)
}

/// Samples of the inverse transform at every grid node.
pub fn synthesize(backend: GroupBackend, coeffs: &FourierCoefficients, grid: &QuadratureGrid) -> Result<Vec<Complex64>> {
    grid.nodes
        .par_iter()
        .map(|x| inverse_fourier(backend, coeffs, x))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn torus_samples(grid: &QuadratureGrid, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        grid.nodes
            .iter()
            .map(|x| match x {
                GroupPoint::Torus(v) => f(v[0]),
                _ => unreachable!(),
            })
            .collect()
    }

    #[test]
    fn constant_function() {
        let b = GroupBackend::Torus(1);
        let g = b.haar_quadrature(16).unwrap();
        let duals = b.enumerate_dual((1.0 + 4.0 * std::f64::consts::PI.powi(2) * 49.0).sqrt()).unwrap();
        assert_eq!(duals.len(), 15);
        let f = vec![Complex64::new(1.0, 0.0); g.len()];
        let c = fourier_transform(b, &g, &f, &duals).unwrap();
        for (l, m) in &c.entries {
            let expected = if *l == DualLabel::Torus(vec![0]) { 1.0 } else { 0.0 };
            assert!((m[(0, 0)] - Complex64::new(expected, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn single_character() {
        let b = GroupBackend::Torus(1);
        let g = b.haar_quadrature(16).unwrap();
        let duals = b.enumerate_dual((1.0 + 4.0 * std::f64::consts::PI.powi(2) * 9.0).sqrt()).unwrap();
        assert_eq!(duals.len(), 7);
        let f = torus_samples(&g, |x| crate::group::character(&[2], &[x]));
        let c = fourier_transform(b, &g, &f, &duals).unwrap();
        for (l, m) in &c.entries {
            let expected = if *l == DualLabel::Torus(vec![2]) { 1.0 } else { 0.0 };
            assert!((m[(0, 0)] - Complex64::new(expected, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn cosine_roundtrip() {
        let b = GroupBackend::Torus(1);
        let g = b.haar_quadrature(8).unwrap();
        let duals = b.enumerate_dual((1.0 + 4.0 * std::f64::consts::PI.powi(2)).sqrt()).unwrap();
        let f = torus_samples(&g, |x| Complex64::new((2.0 * std::f64::consts::PI * x).cos(), 0.0));
        let c = fourier_transform(b, &g, &f, &duals).unwrap();
        let back = synthesize(b, &c, &g).unwrap();
        let err = f.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn su2_single_entry() {
        // f = √3 D^1_{00}: only entry (0,0)-(1,1) of f̂(1) is √3/3
        let b = GroupBackend::Su2;
        let g = b.haar_quadrature(8).unwrap();
        let duals = b.enumerate_dual(2.0).unwrap();
        let f: Vec<Complex64> = g
            .nodes
            .iter()
            .map(|x| b.rep_matrix(&DualLabel::Spin(2), x).unwrap()[(1, 1)] * 3f64.sqrt())
            .collect();
        let c = fourier_transform(b, &g, &f, &duals).unwrap();
        for (l, m) in &c.entries {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let expected = if *l == DualLabel::Spin(2) && i == 1 && j == 1 { 3f64.sqrt() / 3.0 } else { 0.0 };
                    assert!((m[(i, j)] - Complex64::new(expected, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn su2_random_roundtrip() {
        let b = GroupBackend::Su2;
        let g = b.haar_quadrature(8).unwrap();
        let duals = b.enumerate_dual((1.0 + 6.0f64).sqrt()).unwrap();
        assert_eq!(duals.last().unwrap().label, DualLabel::Spin(4));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut c = FourierCoefficients::new();
        for d in &duals {
            let m = CMatrix::from_fn(d.dim, d.dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            c.insert(d.label.clone(), m);
        }
        let f = synthesize(b, &c, &g).unwrap();
        let c2 = fourier_transform(b, &g, &f, &duals).unwrap();
        assert!(c.max_diff(&c2) < 1e-12);
        let back = synthesize(b, &c2, &g).unwrap();
        let err = f.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9);
    }

    #[test]
    fn band_limit_is_enforced() {
        let b = GroupBackend::Torus(1);
        let g = b.haar_quadrature(8).unwrap();
        let duals = b.enumerate_dual(30.0).unwrap();
        let f = vec![Complex64::new(1.0, 0.0); 8];
        assert!(matches!(fourier_transform(b, &g, &f, &duals), Err(Error::BandLimit { .. })));
    }
}
