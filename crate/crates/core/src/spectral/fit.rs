//! Affine upper envelopes `y ≤ log C1 + C2 x` with `C2 ≥ 0`.
//!
//! Among all lines lying above every point, the fit minimises the line's
//! value at the mean abscissa. That is a two-variable linear program whose
//! optimum sits on a line through two data points or on the horizontal line
//! through the highest point; all candidates are enumerated. Ties go to the
//! smaller slope.

use serde::Serialize;

use crate::error::{Error, Result};

const ACTIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpFit {
    pub log_c1: f64,
    pub c1: f64,
    pub c2: f64,
    /// `log C1 + C2 x_i - y_i ≥ 0`
    pub residuals: Vec<f64>,
    /// Indices of the points on the envelope.
    pub active: Vec<usize>,
}

/// Tightest envelope in the mean-gap sense.
pub fn fit_envelope(xs: &[f64], ys: &[f64]) -> Result<ExpFit> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.is_empty() {
        return Err(Error::Degenerate("no points to fit".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Parameter("envelope fit needs finite points".into()));
    }
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let scale = ys.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    let ymax = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut best = (ymax, 0.0f64);
    let objective = |(c, s): (f64, f64)| c + s * mean;
    for i in 0..n {
        for j in i + 1..n {
            if xs[i] == xs[j] {
                continue;
            }
            let s = (ys[j] - ys[i]) / (xs[j] - xs[i]);
            if s < 0.0 {
                continue;
            }
            let c = ys[i] - s * xs[i];
            let feasible = (0..n).all(|k| ys[k] <= c + s * xs[k] + ACTIVE_TOL * scale);
            if !feasible {
                continue;
            }
            let (o, ob) = (objective((c, s)), objective(best));
            if o < ob - 1e-12 * scale || ((o - ob).abs() <= 1e-12 * scale && s < best.1) {
                best = (c, s);
            }
        }
    }
    let s = best.1;
    // lift the intercept so the envelope holds exactly
    let c = (0..n).map(|k| ys[k] - s * xs[k]).fold(f64::NEG_INFINITY, f64::max);
    let residuals: Vec<f64> = (0..n).map(|k| c + s * xs[k] - ys[k]).collect();
    let active = (0..n).filter(|&k| residuals[k] <= ACTIVE_TOL * scale).collect();
    Ok(ExpFit {
        log_c1: c,
        c1: c.exp(),
        c2: s,
        residuals,
        active,
    })
}

/// Fit `C_ω(λ) ≤ C1 e^{C2 λ}` from Gram minima: `y = -½ ln λ_min`.
pub fn fit_spectral_constants(lambdas: &[f64], lam_mins: &[f64]) -> Result<ExpFit> {
    if lambdas.len() != lam_mins.len() {
        return Err(Error::Dimension {
            expected: lambdas.len(),
            got: lam_mins.len(),
        });
    }
    let mut ys = Vec::with_capacity(lam_mins.len());
    for (&l, &v) in lambdas.iter().zip(lam_mins) {
        if !(v > 0.0) {
            return Err(Error::Unfittable { lambda: l, value: v });
        }
        ys.push(-0.5 * v.ln());
    }
    fit_envelope(lambdas, &ys)
}

/// Same fit from `log10 λ_min`, for values outside the `f64` range.
pub fn fit_spectral_constants_log10(lambdas: &[f64], log10_lam_mins: &[f64]) -> Result<ExpFit> {
    let mut ys = Vec::with_capacity(log10_lam_mins.len());
    for (&l, &v) in lambdas.iter().zip(log10_lam_mins) {
        if !v.is_finite() {
            return Err(Error::Unfittable { lambda: l, value: 0.0 });
        }
        ys.push(-0.5 * v * std::f64::consts::LN_10);
    }
    fit_envelope(lambdas, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points() {
        let f = fit_envelope(&[1.0, 2.0], &[0.0, 1.0]).unwrap();
        assert!((f.c2 - 1.0).abs() < 1e-14);
        assert!((f.log_c1 + 1.0).abs() < 1e-14);
        assert_eq!(f.active, vec![0, 1]);
    }

    #[test]
    fn constant_data_has_zero_slope() {
        let f = fit_spectral_constants(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(f.c2, 0.0);
        assert!((f.c1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn decreasing_data_is_horizontal() {
        let f = fit_envelope(&[0.0, 1.0, 2.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(f.c2, 0.0);
        assert_eq!(f.log_c1, 3.0);
    }

    #[test]
    fn envelope_holds_and_touches_twice() {
        let xs: Vec<f64> = (1..=8).map(|v| v as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.7 * x + 0.3 * (3.0 * x).sin()).collect();
        let f = fit_envelope(&xs, &ys).unwrap();
        assert!(f.residuals.iter().all(|&r| r >= 0.0));
        assert!(f.active.len() >= 2);
        // no feasible line through the data has a smaller mean gap
        let mean = 4.5;
        for s in (0..200).map(|i| i as f64 * 0.01) {
            let c = xs.iter().zip(&ys).map(|(x, y)| y - s * x).fold(f64::NEG_INFINITY, f64::max);
            assert!(c + s * mean >= f.log_c1 + f.c2 * mean - 1e-12);
        }
    }

    #[test]
    fn nonpositive_minimum_is_unfittable() {
        assert!(matches!(
            fit_spectral_constants(&[1.0, 2.0], &[0.5, 0.0]),
            Err(Error::Unfittable { .. })
        ));
    }
}
