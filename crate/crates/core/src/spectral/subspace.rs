//! Orthonormal eigenmodes of a multiplier below a frequency cut.
//!
//! For `σ(ξ) = U D U*`, the mode attached to row `i` and eigenvector column
//! `μ` is `e(x) = √d_ξ Σ_ν ξ(x)_{iν} U_{νμ}`. Its Fourier coefficient at `ξ`
//! is `U_{:,μ} e_iᵀ / √d_ξ`, so `σ(ξ)` acts on it by the eigenvalue `D_μ`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{DualIndex, DualLabel, FourierCoefficients, GroupBackend, GroupPoint, QuadratureGrid};
use crate::linalg::{CMatrix, CVector};
use crate::symbol::{apply_operator, check_ellipticity, make_operator, OperatorParams, Preset, SpectralOperator};

/// Relative slack when comparing a frequency against the cut.
const CUT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mode {
    pub dual: DualIndex,
    /// Row `i` of the representation matrix.
    pub row: usize,
    /// Eigenvector column `μ` of `σ(ξ)`.
    pub col: usize,
    #[serde(skip)]
    pub col_mix: CVector,
    /// Eigenvalue `λ^m` of the operator on this mode.
    pub eigenvalue: f64,
    /// Frequency `λ = eigenvalue^{1/m}`.
    pub freq: f64,
}

impl Mode {
    /// Identity of the mode independent of the cut it was built with.
    pub fn key(&self) -> (DualLabel, usize, usize) {
        (self.dual.label.clone(), self.col, self.row)
    }

    /// `e(x)` from an already evaluated representation matrix `ξ(x)`.
    pub fn eval_with(&self, rep: &CMatrix) -> Complex64 {
        let d = self.dual.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for nu in 0..d {
            acc += rep[(self.row, nu)] * self.col_mix[nu];
        }
        acc * (d as f64).sqrt()
    }

    pub fn coefficients(&self) -> FourierCoefficients {
        let d = self.dual.dim;
        let mut m = CMatrix::zeros(d, d);
        let s = 1.0 / (d as f64).sqrt();
        for nu in 0..d {
            m[(nu, self.row)] = self.col_mix[nu] * s;
        }
        let mut c = FourierCoefficients::new();
        c.insert(self.dual.label.clone(), m);
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSubspace {
    pub backend: GroupBackend,
    pub modes: Vec<Mode>,
    pub lambda_cut: f64,
    pub order: f64,
    /// Bracket bound used to guarantee completeness.
    pub bracket_bound: f64,
}

/// Bracket beyond which no representation can carry a frequency `≤ lambda_cut`,
/// from the lower ellipticity constant over the nontrivial representations.
pub fn enumeration_bound(op: &SpectralOperator, lambda_cut: f64) -> Result<f64> {
    let nontrivial: Vec<DualIndex> = op.duals.iter().filter(|d| d.laplace_eig > 0.0).cloned().collect();
    if nontrivial.is_empty() {
        return Err(Error::Coverage("no nontrivial representation in the operator table".into()));
    }
    let e = check_ellipticity(op, &nontrivial)?;
    if !e.elliptic {
        return Err(Error::Parameter("operator is not elliptic on the nontrivial representations".into()));
    }
    Ok((lambda_cut.powf(op.order) / e.c1).powf(1.0 / op.order).max(1.0))
}

/// Build a preset whose table provably covers every frequency `≤ lambda_cut`.
pub fn operator_for_cut(
    backend: GroupBackend,
    preset: Preset,
    params: OperatorParams,
    lambda_cut: f64,
) -> Result<SpectralOperator> {
    let mut cut = (2.0 * lambda_cut + 2.0).max(2.0);
    for _ in 0..16 {
        let duals = backend.enumerate_dual(cut)?;
        let op = make_operator(backend, preset, params, &duals)?;
        let bound = match enumeration_bound(&op, lambda_cut) {
            Err(Error::Coverage(_)) => {
                cut *= 2.0;
                continue;
            }
            other => other?,
        };
        if bound <= op.max_bracket() || bound <= cut {
            return Ok(op);
        }
        cut = 1.1 * bound;
    }
    Err(Error::Numerical("could not size the representation table".into()))
}

/// All modes with frequency `≤ lambda_cut`, sorted by frequency.
pub fn build_subspace(op: &SpectralOperator, lambda_cut: f64, grid: &QuadratureGrid) -> Result<SpectralSubspace> {
    if !(lambda_cut >= 0.0) {
        return Err(Error::Parameter(format!("lambda_cut must be nonnegative, got {lambda_cut}")));
    }
    let bound = enumeration_bound(op, lambda_cut)?;
    let covered = op.duals.iter().any(|d| d.bracket >= bound)
        || op.backend.enumerate_dual(bound)?.iter().all(|d| op.symbol.contains_key(&d.label));
    if !covered {
        return Err(Error::Coverage(format!(
            "operator table stops at bracket {:.6}, completeness needs {:.6}",
            op.max_bracket(),
            bound
        )));
    }
    let threshold = lambda_cut.powf(op.order) * (1.0 + CUT_SLACK);
    let mut modes = Vec::new();
    for d in op.duals.iter().filter(|d| d.bracket <= bound * (1.0 + CUT_SLACK)) {
        let e = op.eigen_of(&d.label)?;
        for (mu, &v) in e.values.iter().enumerate() {
            let v = v.max(0.0);
            if v <= threshold {
                for row in 0..d.dim {
                    modes.push(Mode {
                        dual: d.clone(),
                        row,
                        col: mu,
                        col_mix: e.vectors.column(mu).into_owned(),
                        eigenvalue: v,
                        freq: v.powf(1.0 / op.order),
                    });
                }
            }
        }
    }
    modes.sort_by(|a, b| {
        a.freq
            .partial_cmp(&b.freq)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.dual.label.cmp(&b.dual.label))
            .then(a.col.cmp(&b.col))
            .then(a.row.cmp(&b.row))
    });
    if let Some(deg) = modes.iter().map(|m| m.dual.label.band_degree()).max() {
        grid.check_pair("spectral subspace", deg, deg)?;
    }
    Ok(SpectralSubspace {
        backend: op.backend,
        modes,
        lambda_cut,
        order: op.order,
        bracket_bound: bound,
    })
}

impl SpectralSubspace {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn freqs(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.freq).collect()
    }

    /// Restriction to the modes with frequency `≤ cut`.
    pub fn truncate(&self, cut: f64) -> Self {
        let threshold = cut * (1.0 + CUT_SLACK);
        SpectralSubspace {
            modes: self.modes.iter().filter(|m| m.freq <= threshold).cloned().collect(),
            lambda_cut: cut,
            ..self.clone()
        }
    }

    /// Matrix `E[p, j] = e_j(x_p)`.
    pub fn sample_matrix(&self, points: &[GroupPoint]) -> Result<CMatrix> {
        let mut labels: Vec<&DualLabel> = self.modes.iter().map(|m| &m.dual.label).collect();
        labels.sort();
        labels.dedup();
        let rows: Vec<Result<Vec<Complex64>>> = points
            .par_iter()
            .map(|x| {
                let reps = labels
                    .iter()
                    .map(|l| Ok(((*l).clone(), self.backend.rep_matrix(l, x)?)))
                    .collect::<Result<std::collections::BTreeMap<_, _>>>()?;
                Ok(self.modes.iter().map(|m| m.eval_with(&reps[&m.dual.label])).collect())
            })
            .collect();
        let mut e = CMatrix::zeros(points.len(), self.modes.len());
        for (p, r) in rows.into_iter().enumerate() {
            for (j, v) in r?.into_iter().enumerate() {
                e[(p, j)] = v;
            }
        }
        Ok(e)
    }

    /// Samples of `κ = Σ a_j e_j` at the grid nodes.
    pub fn synthesize(&self, a: &[Complex64], grid: &QuadratureGrid) -> Result<Vec<Complex64>> {
        if a.len() != self.modes.len() {
            return Err(Error::Dimension {
                expected: self.modes.len(),
                got: a.len(),
            });
        }
        let e = self.sample_matrix(&grid.nodes)?;
        let v = e * CVector::from_column_slice(a);
        Ok(v.iter().copied().collect())
    }

    /// Fourier coefficients of `κ = Σ a_j e_j`.
    pub fn coefficients(&self, a: &[Complex64]) -> Result<FourierCoefficients> {
        if a.len() != self.modes.len() {
            return Err(Error::Dimension {
                expected: self.modes.len(),
                got: a.len(),
            });
        }
        let mut out = FourierCoefficients::new();
        for (m, &aj) in self.modes.iter().zip(a) {
            for (l, f) in m.coefficients().entries {
                let slot = out.entries.entry(l).or_insert_with(|| CMatrix::zeros(f.nrows(), f.ncols()));
                *slot += f * aj;
            }
        }
        Ok(out)
    }

    /// Largest `‖A e_j - λ_j^m e_j‖ / max(1, λ_j^m)` over the modes.
    pub fn eigen_residual(&self, op: &SpectralOperator) -> Result<f64> {
        let mut worst = 0.0f64;
        for m in &self.modes {
            let c = m.coefficients();
            let ac = apply_operator(op, &c)?;
            let diff = c.scale(Complex64::new(-m.eigenvalue, 0.0));
            let mut res = ac.clone();
            for (l, v) in diff.entries {
                *res.entries.get_mut(&l).expect("same support") += v;
            }
            worst = worst.max(res.l2_norm() / m.eigenvalue.max(1.0));
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn torus_laplacian_seven_modes() {
        let b = GroupBackend::Torus(1);
        let op = operator_for_cut(b, Preset::LaplacianPower, OperatorParams::default(), 2.0 * PI * 3.0).unwrap();
        let grid = b.haar_quadrature(16).unwrap();
        let s = build_subspace(&op, 2.0 * PI * 3.0, &grid).unwrap();
        assert_eq!(s.len(), 7);
        let mut ks: Vec<i64> = s
            .modes
            .iter()
            .map(|m| match &m.dual.label {
                DualLabel::Torus(k) => k[0],
                _ => unreachable!(),
            })
            .collect();
        ks.sort();
        assert_eq!(ks, vec![-3, -2, -1, 0, 1, 2, 3]);
        for m in &s.modes {
            let DualLabel::Torus(k) = &m.dual.label else { unreachable!() };
            assert!((m.freq - 2.0 * PI * k[0].abs() as f64).abs() < 1e-12);
        }
        assert!(s.eigen_residual(&op).unwrap() < 1e-10);
    }

    #[test]
    fn cut_below_first_positive_frequency() {
        let b = GroupBackend::Torus(1);
        let op = operator_for_cut(b, Preset::ShiftedPower, OperatorParams::default(), 3.0).unwrap();
        let grid = b.haar_quadrature(8).unwrap();
        let s = build_subspace(&op, 3.0, &grid).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.modes[0].dual.label, DualLabel::Torus(vec![0]));
    }

    #[test]
    fn su2_fourteen_modes() {
        let b = GroupBackend::Su2;
        let cut = 3f64.sqrt(); // (1 + ℓ(ℓ+1))^{1/2} at ℓ = 1
        let op = operator_for_cut(b, Preset::ShiftedPower, OperatorParams::default(), cut).unwrap();
        let grid = b.haar_quadrature(8).unwrap();
        let s = build_subspace(&op, cut, &grid).unwrap();
        assert_eq!(s.len(), 14);
        assert!(s.eigen_residual(&op).unwrap() < 1e-10);
    }

    #[test]
    fn perturbed_su2_modes_are_eigenfunctions() {
        let b = GroupBackend::Su2;
        let p = OperatorParams { eta: 0.3, seed: 4, ..Default::default() };
        let op = operator_for_cut(b, Preset::DiagPerturbed, p, 3.0).unwrap();
        let grid = b.haar_quadrature(12).unwrap();
        let s = build_subspace(&op, 3.0, &grid).unwrap();
        assert!(s.eigen_residual(&op).unwrap() < 1e-10);
        // L² normalisation on the grid
        let e = s.sample_matrix(&grid.nodes).unwrap();
        for j in 0..s.len() {
            let n: f64 = (0..grid.len()).map(|p| grid.weights[p] * e[(p, j)].norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn nested_cuts_nest_modes() {
        let b = GroupBackend::Torus(2);
        let op = operator_for_cut(b, Preset::ShiftedPower, OperatorParams::default(), 15.0).unwrap();
        let grid = b.haar_quadrature(12).unwrap();
        let small = build_subspace(&op, 8.0, &grid).unwrap();
        let big = build_subspace(&op, 15.0, &grid).unwrap();
        let keys: Vec<_> = big.modes.iter().map(|m| m.key()).collect();
        assert!(small.modes.iter().all(|m| keys.contains(&m.key())));
        assert_eq!(big.truncate(8.0).modes, small.modes);
    }

    #[test]
    fn band_limit_refusal() {
        let b = GroupBackend::Torus(1);
        let op = operator_for_cut(b, Preset::LaplacianPower, OperatorParams::default(), 2.0 * PI * 10.0).unwrap();
        let grid = b.haar_quadrature(8).unwrap();
        assert!(matches!(
            build_subspace(&op, 2.0 * PI * 10.0, &grid),
            Err(Error::BandLimit { .. })
        ));
    }

    #[test]
    fn incomplete_table_is_a_coverage_error() {
        let b = GroupBackend::Torus(1);
        let duals = b.enumerate_dual(5.0).unwrap();
        let op = make_operator(b, Preset::ShiftedPower, OperatorParams::default(), &duals).unwrap();
        let grid = b.haar_quadrature(64).unwrap();
        assert!(matches!(build_subspace(&op, 40.0, &grid), Err(Error::Coverage(_))));
    }
}
