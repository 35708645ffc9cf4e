//! Gram matrices of a spectral subspace on an observation set and the
//! resulting observability constant.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{DualLabel, GroupBackend, ObservationSet, QuadratureGrid, SetDescriptor};
use crate::linalg::{hermitian_eigen, CMatrix, CVector};
use crate::rng::{stream, TAG_RAYLEIGH};
use crate::spectral::extended::{extended_lambda_min, DEFAULT_PRECISION};
use crate::spectral::SpectralSubspace;

/// `λ_min` below `DOUBLE_TRUST · n · λ_max` is recomputed in extended precision.
pub const DOUBLE_TRUST: f64 = 1e-13;

/// `M[i, j] = ∫_ω conj(e_i) e_j` by quadrature on the grid mask.
pub fn gram_quadrature(subspace: &SpectralSubspace, set: &ObservationSet, grid: &QuadratureGrid) -> Result<CMatrix> {
    if set.mask.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            got: set.mask.len(),
        });
    }
    if let Some(deg) = subspace.modes.iter().map(|m| m.dual.label.band_degree()).max() {
        grid.check_pair("gram matrix", deg, deg)?;
    }
    let idx: Vec<usize> = (0..grid.len()).filter(|&p| set.mask[p]).collect();
    let pts: Vec<_> = idx.iter().map(|&p| grid.nodes[p].clone()).collect();
    let e = subspace.sample_matrix(&pts)?;
    let mut we = e.clone();
    for (r, &p) in idx.iter().enumerate() {
        let w = grid.weights[p];
        for j in 0..we.ncols() {
            we[(r, j)] *= w;
        }
    }
    let m = e.adjoint() * we;
    Ok((&m + m.adjoint()) * Complex64::new(0.5, 0.0))
}

/// The Gram matrix from exact character integrals, when the set has them.
pub fn gram_closed_form(subspace: &SpectralSubspace, set: &SetDescriptor) -> Option<CMatrix> {
    let GroupBackend::Torus(_) = subspace.backend else {
        return None;
    };
    let parts: Vec<(&Vec<i64>, Complex64)> = subspace
        .modes
        .iter()
        .map(|m| match &m.dual.label {
            DualLabel::Torus(k) => (k, m.col_mix[0]),
            DualLabel::Spin(_) => unreachable!("torus backend"),
        })
        .collect();
    let n = parts.len();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let diff: Vec<i64> = parts[j].0.iter().zip(parts[i].0).map(|(a, b)| a - b).collect();
            let v = parts[i].1.conj() * parts[j].1 * set.character_integral(&diff)?;
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    for i in 0..n {
        out[(i, i)].im = 0.0;
    }
    Some(out)
}

/// Closed form when available, quadrature otherwise.
pub fn gram_on_set(subspace: &SpectralSubspace, set: &ObservationSet, grid: &QuadratureGrid) -> Result<CMatrix> {
    match gram_closed_form(subspace, &set.descriptor) {
        Some(m) => Ok(m),
        None => gram_quadrature(subspace, set, grid),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observability {
    pub lam_min: f64,
    pub lam_max: f64,
    pub log10_lam_min: f64,
    /// `C_ω = λ_min^{-1/2}`; infinite for an empty set.
    pub c_omega: f64,
    /// Unit coefficient vector attaining `λ_min`.
    #[serde(skip)]
    pub kappa_worst: Vec<Complex64>,
    pub extended: bool,
    pub below_floor: bool,
    pub dimension: usize,
}

/// `λ_min` of the Gram matrix, recomputed in extended precision when the
/// double-precision value is at rounding level and the set allows it.
pub fn observability_constant(
    subspace: &SpectralSubspace,
    set: &ObservationSet,
    grid: &QuadratureGrid,
) -> Result<Observability> {
    let n = subspace.len();
    if n == 0 {
        return Err(Error::Degenerate("empty subspace".into()));
    }
    let m = gram_on_set(subspace, set, grid)?;
    let (vals, vecs) = hermitian_eigen(&m);
    let lam_max = vals[n - 1];
    let mut out = Observability {
        lam_min: vals[0].max(0.0),
        lam_max,
        log10_lam_min: vals[0].max(0.0).log10(),
        c_omega: 0.0,
        kappa_worst: vecs.column(0).iter().copied().collect(),
        extended: false,
        below_floor: false,
        dimension: n,
    };
    let trusted = DOUBLE_TRUST * n as f64 * lam_max.max(f64::MIN_POSITIVE);
    if vals[0] < trusted {
        let exact_set = gram_closed_form(subspace, &set.descriptor).is_some();
        if exact_set && !matches!(set.descriptor, SetDescriptor::Empty) {
            let e = extended_lambda_min(subspace, &set.descriptor, DEFAULT_PRECISION)?;
            out.lam_min = e.lam_min;
            out.log10_lam_min = e.log10_lam_min;
            out.kappa_worst = e.vector;
            out.extended = true;
            out.below_floor = e.below_floor;
        } else {
            out.below_floor = true;
        }
    }
    out.c_omega = if out.lam_min > 0.0 {
        out.lam_min.powf(-0.5)
    } else {
        f64::INFINITY
    };
    Ok(out)
}

/// Smallest ratio `‖κ‖²_{L²(ω)} / ‖κ‖²_{L²(G)}` over random `κ`, with both
/// norms by quadrature, and the Rayleigh quotient `a* M a / |a|²` it should
/// match.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayleighCheck {
    pub min_ratio: f64,
    pub max_quotient_mismatch: f64,
}

pub fn rayleigh_check(
    subspace: &SpectralSubspace,
    set: &ObservationSet,
    grid: &QuadratureGrid,
    gram: &CMatrix,
    samples: usize,
    seed: u64,
) -> Result<RayleighCheck> {
    let n = subspace.len();
    let e = subspace.sample_matrix(&grid.nodes)?;
    let mut rng = stream(seed, TAG_RAYLEIGH);
    let mut min_ratio = f64::INFINITY;
    let mut mismatch = 0.0f64;
    for _ in 0..samples {
        let a = CVector::from_fn(n, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let k = &e * &a;
        let mut full = 0.0;
        let mut local = 0.0;
        for p in 0..grid.len() {
            let v = grid.weights[p] * k[p].norm_sqr();
            full += v;
            if set.mask[p] {
                local += v;
            }
        }
        let q = (a.adjoint() * gram * &a)[(0, 0)].re / a.norm_squared();
        mismatch = mismatch.max((q - local / full).abs());
        min_ratio = min_ratio.min(local / full);
    }
    Ok(RayleighCheck {
        min_ratio,
        max_quotient_mismatch: mismatch,
    })
}

/// Smallest eigenvalue of `big - small`; nonnegative when `small ≤ big`
/// in the Loewner order.
pub fn loewner_gap(small: &CMatrix, big: &CMatrix) -> f64 {
    hermitian_eigen(&(big - small)).0[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_subspace, operator_for_cut};
    use crate::symbol::{OperatorParams, Preset};
    use std::f64::consts::PI;

    fn torus(kmax: i64, n: usize) -> (SpectralSubspace, QuadratureGrid) {
        let b = GroupBackend::Torus(1);
        let cut = 2.0 * PI * kmax as f64;
        let op = operator_for_cut(b, Preset::LaplacianPower, OperatorParams::default(), cut).unwrap();
        let g = b.haar_quadrature(n).unwrap();
        (build_subspace(&op, cut, &g).unwrap(), g)
    }

    #[test]
    fn two_mode_half_circle() {
        let (s, g) = torus(1, 8);
        let s = SpectralSubspace {
            modes: s
                .modes
                .into_iter()
                .filter(|m| m.dual.label != DualLabel::Torus(vec![-1]))
                .collect(),
            ..s
        };
        let set = ObservationSet::new(s.backend, SetDescriptor::Arcs(vec![(0.0, 0.5)]), &g).unwrap();
        let m = gram_on_set(&s, &set, &g).unwrap();
        let (vals, _) = hermitian_eigen(&m);
        assert!((vals[0] - (0.5 - 1.0 / PI)).abs() < 1e-9);
        assert!((vals[1] - (0.5 + 1.0 / PI)).abs() < 1e-9);
        let o = observability_constant(&s, &set, &g).unwrap();
        assert!((o.c_omega - (0.5 - 1.0 / PI).powf(-0.5)).abs() < 1e-8);
        assert!(!o.extended);
    }

    #[test]
    fn full_set_is_identity() {
        let (s, g) = torus(4, 16);
        let full = ObservationSet::full(s.backend, &g);
        let m = gram_quadrature(&s, &full, &g).unwrap();
        let err = crate::linalg::max_entry_diff(&m, &CMatrix::identity(s.len(), s.len()));
        assert!(err < 1e-13);
    }

    #[test]
    fn su2_full_set_is_identity() {
        let b = GroupBackend::Su2;
        let op = operator_for_cut(b, Preset::ShiftedPower, OperatorParams::default(), 3.0).unwrap();
        let g = b.haar_quadrature(8).unwrap();
        let s = build_subspace(&op, 3.0, &g).unwrap();
        let m = gram_on_set(&s, &ObservationSet::full(b, &g), &g).unwrap();
        let err = crate::linalg::max_entry_diff(&m, &CMatrix::identity(s.len(), s.len()));
        assert!(err < 1e-12, "{err}");
        let o = observability_constant(&s, &ObservationSet::full(b, &g), &g).unwrap();
        assert!((o.c_omega - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_route_converges_to_closed_form() {
        let (s, _) = torus(3, 8);
        let desc = SetDescriptor::Arcs(vec![(0.1, 0.45)]);
        let exact = gram_closed_form(&s, &desc).unwrap();
        let fine = s.backend.haar_quadrature(4096).unwrap();
        let set = ObservationSet::new(s.backend, desc, &fine).unwrap();
        let q = gram_quadrature(&s, &set, &fine).unwrap();
        assert!(crate::linalg::max_entry_diff(&q, &exact) < 2.0 / 4096.0);
    }

    #[test]
    fn rayleigh_quotients_match_the_grid() {
        let (s, g) = torus(3, 64);
        let set = ObservationSet::new(s.backend, SetDescriptor::Arcs(vec![(0.0, 0.5)]), &g).unwrap();
        let m = gram_quadrature(&s, &set, &g).unwrap();
        let r = rayleigh_check(&s, &set, &g, &m, 50, 1).unwrap();
        assert!(r.max_quotient_mismatch < 1e-12);
        assert!(r.min_ratio >= hermitian_eigen(&m).0[0] - 1e-12);
    }

    #[test]
    fn loewner_monotone_in_the_set() {
        let (s, g) = torus(3, 16);
        let a = gram_closed_form(&s, &SetDescriptor::Arcs(vec![(0.0, 0.2)])).unwrap();
        let b = gram_closed_form(&s, &SetDescriptor::Arcs(vec![(0.0, 0.4)])).unwrap();
        assert!(loewner_gap(&a, &b) > -1e-14);
        let _ = g;
    }

    #[test]
    fn tiny_values_switch_to_extended() {
        let (s, g) = torus(12, 32);
        let set = ObservationSet::new(s.backend, SetDescriptor::Arcs(vec![(0.0, 0.3)]), &g).unwrap();
        let o = observability_constant(&s, &set, &g).unwrap();
        assert!(o.extended);
        assert!((o.lam_min / 7.4737e-30 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn empty_set_is_unobservable() {
        let (s, g) = torus(2, 8);
        let set = ObservationSet::new(s.backend, SetDescriptor::Empty, &g).unwrap();
        let o = observability_constant(&s, &set, &g).unwrap();
        assert_eq!(o.lam_min, 0.0);
        assert!(o.c_omega.is_infinite());
    }
}
