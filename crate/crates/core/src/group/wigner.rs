//! Wigner D-matrices for SU(2) via the explicit little-d sum.
//!
//! Representations are labelled by `two_j = 2ℓ`. Rows and columns are ordered
//! by magnetic number descending, `m = ℓ, ℓ-1, …, -ℓ`, and
//! `D^ℓ_{m'm}(α, β, γ) = e^{-i m' α} d^ℓ_{m'm}(β) e^{-i m γ}` (z-y-z Euler
//! angles, active rotations), so `D^{1/2}` is the defining representation.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::CMatrix;

/// Largest supported `ℓ`.
pub const MAX_SPIN: f64 = 25.0;
pub const MAX_TWO_J: u32 = 50;

fn ln_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0f64; 2 * MAX_TWO_J as usize + 2];
        for k in 1..t.len() {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    })
}

/// Little-d matrix `d^ℓ(β)` with `ℓ = two_j / 2`.
pub fn small_d(two_j: u32, beta: f64) -> DMatrix<f64> {
    assert!(two_j <= MAX_TWO_J, "spin above supported range");
    let lf = ln_factorials();
    let dim = two_j as usize + 1;
    let c = (0.5 * beta).cos();
    let s = (0.5 * beta).sin();
    let tj = two_j as i64;
    let mut d = DMatrix::<f64>::zeros(dim, dim);
    for row in 0..dim {
        let two_mp = tj - 2 * row as i64;
        for col in 0..dim {
            let two_m = tj - 2 * col as i64;
            // integer combinations j±m', j±m, m'-m
            let jpmp = ((tj + two_mp) / 2) as usize;
            let jmmp = ((tj - two_mp) / 2) as usize;
            let jpm = ((tj + two_m) / 2) as usize;
            let jmm = ((tj - two_m) / 2) as usize;
            let mpmm = (two_mp - two_m) / 2;
            let prefactor = 0.5 * (lf[jpmp] + lf[jmmp] + lf[jpm] + lf[jmm]);
            let s_lo = 0i64.max(-mpmm);
            let s_hi = (jpm as i64).min(jmmp as i64);
            let mut acc = 0.0;
            for k in s_lo..=s_hi {
                let denom = lf[(jpm as i64 - k) as usize]
                    + lf[k as usize]
                    + lf[(mpmm + k) as usize]
                    + lf[(jmmp as i64 - k) as usize];
                let cos_pow = (tj - mpmm - 2 * k) as i32;
                let sin_pow = (mpmm + 2 * k) as i32;
                let sign = if (mpmm + k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                acc += sign * (prefactor - denom).exp() * c.powi(cos_pow) * s.powi(sin_pow);
            }
            d[(row, col)] = acc;
        }
    }
    d
}

/// Full Wigner matrix `D^ℓ(α, β, γ)`.
pub fn wigner_d(two_j: u32, alpha: f64, beta: f64, gamma: f64) -> CMatrix {
    let d = small_d(two_j, beta);
    let dim = two_j as usize + 1;
    let tj = two_j as f64;
    CMatrix::from_fn(dim, dim, |row, col| {
        let mp = 0.5 * tj - row as f64;
        let m = 0.5 * tj - col as f64;
        Complex64::from_polar(d[(row, col)], -(mp * alpha + m * gamma))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_half_matches_defining_rep() {
        let (a, b, g) = (0.3, 1.1, 2.9);
        let m = wigner_d(1, a, b, g);
        let expected = [
            Complex64::from_polar((b / 2.0).cos(), -(a + g) / 2.0),
            Complex64::from_polar(-(b / 2.0).sin(), -(a - g) / 2.0),
            Complex64::from_polar((b / 2.0).sin(), (a - g) / 2.0),
            Complex64::from_polar((b / 2.0).cos(), (a + g) / 2.0),
        ];
        for (k, e) in expected.iter().enumerate() {
            assert!((m[(k / 2, k % 2)] - e).norm() < 1e-15);
        }
    }

    #[test]
    fn spin_one_closed_forms() {
        let b = 0.77f64;
        let d = small_d(2, b);
        // standard table: d^1_{00} = cos β, d^1_{10} = -sin β/√2, d^1_{11} = (1+cos β)/2
        assert!((d[(1, 1)] - b.cos()).abs() < 1e-15);
        assert!((d[(0, 1)] + b.sin() / 2f64.sqrt()).abs() < 1e-15);
        assert!((d[(0, 0)] - 0.5 * (1.0 + b.cos())).abs() < 1e-15);
        assert!((d[(2, 0)] - 0.5 * (1.0 - b.cos())).abs() < 1e-15);
    }

    #[test]
    fn little_d_is_orthogonal_up_to_spin_25() {
        // the alternating sum loses digits at large spin
        for (two_j, tol) in [(0u32, 1e-14), (1, 1e-14), (5, 1e-13), (12, 1e-12), (31, 1e-9), (50, 1e-7)] {
            let d = small_d(two_j, 1.234);
            let prod = d.transpose() * &d;
            let err = (prod - DMatrix::<f64>::identity(two_j as usize + 1, two_j as usize + 1)).abs().max();
            assert!(err < tol, "two_j={two_j} err={err}");
        }
    }
}
