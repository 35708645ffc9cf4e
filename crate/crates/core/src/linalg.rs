//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Hermitian eigendecomposition with eigenvalues ascending.
///
/// Each eigenvector is rephased so that its largest-magnitude entry is real
/// and positive (first such entry on ties), which makes the output a
/// deterministic function of the input.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    // symmetrise to remove rounding asymmetry before the solver sees it
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(i).into_owned();
        let v = normalise_phase(v);
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

/// Rephase a vector so its largest-magnitude entry is real positive.
pub fn normalise_phase(mut v: CVector) -> CVector {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm();
        if a > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = a;
        }
    }
    if best_abs > 0.0 {
        let phase = v[best].conj() / best_abs;
        v *= phase;
        v[best] = Complex64::new(v[best].re, 0.0);
    }
    v
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Extreme singular values (min, max) of a square matrix.
pub fn singular_range(m: &CMatrix) -> (f64, f64) {
    if m.nrows() == 0 {
        return (0.0, 0.0);
    }
    let gram = m.adjoint() * m;
    let (vals, _) = hermitian_eigen(&gram);
    let smin = vals[0].max(0.0).sqrt();
    let smax = vals[vals.len() - 1].max(0.0).sqrt();
    (smin, smax)
}

/// Operator (spectral) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    singular_range(m).1
}

/// Max |a_ij - b_ij|.
pub fn max_entry_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Hermitian deviation max |m - m*|.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_entry_diff(m, &m.adjoint())
}

/// Neumaier-compensated sum in a fixed order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Compensated complex sum in a fixed order.
pub fn compensated_sum_c(values: impl IntoIterator<Item = Complex64>) -> Complex64 {
    let vals: Vec<Complex64> = values.into_iter().collect();
    Complex64::new(
        compensated_sum(vals.iter().map(|z| z.re)),
        compensated_sum(vals.iter().map(|z| z.im)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_and_phase_fixed() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 1.0 / std::f64::consts::PI),
                Complex64::new(0.0, -1.0 / std::f64::consts::PI),
                Complex64::new(0.5, 0.0),
            ],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!(vals[0] < vals[1]);
        assert!((vals[0] - (0.5 - 1.0 / std::f64::consts::PI)).abs() < 1e-15);
        for c in 0..2 {
            let col = vecs.column(c);
            let (imax, _) = col
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, z)| if z.norm() > acc.1 + 1e-12 { (i, z.norm()) } else { acc });
            assert_eq!(col[imax].im, 0.0);
            assert!(col[imax].re > 0.0);
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = vec![1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
