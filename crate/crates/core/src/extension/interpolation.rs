//! Empirical interpolation exponents
//! `‖F‖_{H¹(G×(α,T-α))} ≤ C ‖F‖_{H¹(G_T)}^κ ‖κ‖_{L²(ω)}^{1-κ}`.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::field::sinh_extension;
use crate::group::{ObservationSet, QuadratureGrid};
use crate::linalg::{CMatrix, CVector};
use crate::rng::{mix, stream, TAG_INTERP};
use crate::spectral::{gram_on_set, SpectralSubspace};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolationRow {
    pub draw_id: usize,
    pub lambda: f64,
    pub lhs: f64,
    pub h1_full: f64,
    pub l2_omega: f64,
    pub log_lhs: f64,
    pub log_h1_full: f64,
    /// Smallest admissible exponent; `NaN` for flagged rows.
    pub kappa_star: f64,
    pub degenerate: bool,
}

/// Smallest `κ ∈ [0, 1]` with `ln lhs ≤ ln C + κ ln X + (1-κ) ln Y`, by
/// bisection. `None` when even `κ = 1` fails.
pub fn kappa_star(log_lhs: f64, log_x: f64, log_y: f64, log_c: f64) -> Option<f64> {
    let g = |k: f64| log_c + k * log_x + (1.0 - k) * log_y - log_lhs;
    if g(0.0) >= 0.0 {
        return Some(0.0);
    }
    if g(1.0) < 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Some(hi)
}

/// One row for the coefficient vector `a`; `gram` is the Gram matrix on `ω`.
pub fn interpolation_row(
    subspace: &SpectralSubspace,
    a: &[Complex64],
    gram: &CMatrix,
    t_end: f64,
    alpha: f64,
    log_c: f64,
    draw_id: usize,
) -> Result<InterpolationRow> {
    if !(alpha > 0.0 && alpha < 0.5 * t_end) {
        return Err(Error::Parameter(format!("alpha must lie in (0, T/2), got {alpha} with T = {t_end}")));
    }
    let f = sinh_extension(subspace, a, t_end)?;
    let log_lhs = f.log_h_norm(alpha, t_end - alpha, 1)?;
    let log_x = f.log_h_norm(0.0, t_end, 1)?;
    let av = CVector::from_column_slice(a);
    let y2 = (av.adjoint() * gram * &av)[(0, 0)].re;
    let l2_omega = y2.max(0.0).sqrt();
    let degenerate = !(l2_omega > 1e-300);
    let kappa = if degenerate {
        f64::NAN
    } else {
        kappa_star(log_lhs, log_x, l2_omega.ln(), log_c).unwrap_or(f64::NAN)
    };
    Ok(InterpolationRow {
        draw_id,
        lambda: subspace.lambda_cut,
        lhs: log_lhs.exp(),
        h1_full: log_x.exp(),
        l2_omega,
        log_lhs,
        log_h1_full: log_x,
        kappa_star: kappa,
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolationStudy {
    pub rows: Vec<InterpolationRow>,
    /// Largest `κ*` over the unflagged rows.
    pub kappa_max: f64,
    pub flagged: usize,
}

/// Random unit draws `κ = Σ a_j e_j` with `Σ |a_j|² = 1`.
#[allow(clippy::too_many_arguments)]
pub fn interpolation_study(
    subspace: &SpectralSubspace,
    set: &ObservationSet,
    grid: &QuadratureGrid,
    t_end: f64,
    alpha: f64,
    draws: usize,
    seed: u64,
    log_c: f64,
) -> Result<InterpolationStudy> {
    if subspace.is_empty() {
        return Err(Error::Degenerate("empty subspace".into()));
    }
    let gram = gram_on_set(subspace, set, grid)?;
    let mut rows = Vec::with_capacity(draws);
    for d in 0..draws {
        let mut rng = stream(mix(seed ^ d as u64), TAG_INTERP);
        let mut a: Vec<Complex64> = (0..subspace.len())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let n = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        a.iter_mut().for_each(|z| *z /= n);
        rows.push(interpolation_row(subspace, &a, &gram, t_end, alpha, log_c, d)?);
    }
    let flagged = rows.iter().filter(|r| r.kappa_star.is_nan()).count();
    let kappa_max = rows
        .iter()
        .filter(|r| !r.kappa_star.is_nan())
        .map(|r| r.kappa_star)
        .fold(f64::NAN, f64::max);
    Ok(InterpolationStudy {
        rows,
        kappa_max,
        flagged,
    })
}
