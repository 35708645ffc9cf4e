//! Concrete compact groups: the tori `T^1`, `T^2` and `SU(2)`.
//!
//! Conventions fixed once for the whole crate:
//!
//! * Torus points are coordinate tuples in `[0, 1)^n`; characters are
//!   `e^{2πi k·x}` and the positive Laplacian has eigenvalue `4π²|k|²`.
//! * SU(2) points are z-y-z Euler angles with `α ∈ [0, 2π)`, `β ∈ [0, π]`,
//!   `γ ∈ [0, 4π)` and normalised Haar density `sin β / (16π²)`. The
//!   Laplacian (quadratic Casimir) has eigenvalue `ℓ(ℓ+1)` on `D^ℓ`.
//! * The geodesic distance on SU(2) is the rotation angle `θ ∈ [0, 2π]`
//!   with `cos(θ/2) = Re Tr(g h*) / 2`; the group diameter is `2π`.
//!
//! Every spectral quantity downstream scales covariantly with these
//! Laplacian normalisations.

pub mod fourier;
pub mod haar;
pub mod observation;
pub mod wigner;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

pub use fourier::{fourier_transform, inverse_fourier, synthesize, FourierCoefficients};
pub use haar::QuadratureGrid;
pub use observation::{ObservationSet, SetDescriptor};

/// Label of an irreducible unitary representation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum DualLabel {
    /// Character `e^{2πi k·x}` of `T^n`.
    Torus(Vec<i64>),
    /// Spin-`ℓ` representation of SU(2), stored as `2ℓ`.
    Spin(u32),
}

impl DualLabel {
    pub fn dim(&self) -> usize {
        match self {
            DualLabel::Torus(_) => 1,
            DualLabel::Spin(two_l) => *two_l as usize + 1,
        }
    }

    /// Eigenvalue of the positive Laplacian on the matrix entries.
    pub fn laplace_eig(&self) -> f64 {
        match self {
            DualLabel::Torus(k) => {
                let k2: i64 = k.iter().map(|v| v * v).sum();
                4.0 * PI * PI * k2 as f64
            }
            DualLabel::Spin(two_l) => {
                let tl = *two_l as f64;
                tl * (tl + 2.0) / 4.0
            }
        }
    }

    /// Degree used for band-limit bookkeeping: `max |k_i|` on tori, `2ℓ` on SU(2).
    pub fn band_degree(&self) -> usize {
        match self {
            DualLabel::Torus(k) => k.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0),
            DualLabel::Spin(two_l) => *two_l as usize,
        }
    }

    pub fn index(&self) -> DualIndex {
        let laplace_eig = self.laplace_eig();
        DualIndex {
            label: self.clone(),
            dim: self.dim(),
            laplace_eig,
            bracket: (1.0 + laplace_eig).sqrt(),
        }
    }
}

impl fmt::Display for DualLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DualLabel::Torus(k) => {
                let parts: Vec<String> = k.iter().map(|v| v.to_string()).collect();
                write!(f, "k={}", parts.join(";"))
            }
            DualLabel::Spin(two_l) => {
                if two_l % 2 == 0 {
                    write!(f, "l={}", two_l / 2)
                } else {
                    write!(f, "l={}/2", two_l)
                }
            }
        }
    }
}

/// A representation together with its dimension and Laplacian data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualIndex {
    pub label: DualLabel,
    pub dim: usize,
    pub laplace_eig: f64,
    /// `⟨ξ⟩ = (1 + λ_ξ)^{1/2}`
    pub bracket: f64,
}

/// Euler angles of an SU(2) element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerAngles { alpha, beta, gamma }
    }

    /// The 2×2 special unitary matrix of these angles.
    pub fn to_su2(&self) -> [[Complex64; 2]; 2] {
        let c = (0.5 * self.beta).cos();
        let s = (0.5 * self.beta).sin();
        let a = Complex64::from_polar(c, -0.5 * (self.alpha + self.gamma));
        let b = Complex64::from_polar(s, 0.5 * (self.alpha - self.gamma));
        [[a, -b.conj()], [b, a.conj()]]
    }

    /// Inverse of [`EulerAngles::to_su2`], normalised into the chart ranges.
    pub fn from_su2(u: &[[Complex64; 2]; 2]) -> Self {
        let a = u[0][0];
        let b = u[1][0];
        let beta = 2.0 * b.norm().atan2(a.norm());
        let tiny = 1e-14;
        let (mut alpha, mut gamma) = if a.norm() > tiny && b.norm() > tiny {
            (b.arg() - a.arg(), -a.arg() - b.arg())
        } else if b.norm() <= tiny {
            (0.0, -2.0 * a.arg())
        } else {
            (0.0, -2.0 * b.arg())
        };
        let shift = (alpha / (2.0 * PI)).floor();
        alpha -= 2.0 * PI * shift;
        gamma -= 2.0 * PI * shift;
        gamma = gamma.rem_euclid(4.0 * PI);
        if alpha >= 2.0 * PI {
            alpha -= 2.0 * PI;
            gamma = (gamma - 2.0 * PI).rem_euclid(4.0 * PI);
        }
        EulerAngles { alpha, beta, gamma }
    }
}

/// A point of one of the supported groups.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GroupPoint {
    Torus(Vec<f64>),
    Euler(EulerAngles),
}

impl GroupPoint {
    pub fn torus1(x: f64) -> Self {
        GroupPoint::Torus(vec![x])
    }
}

fn su2_mul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// A concrete compact group backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GroupBackend {
    /// The flat torus `T^n = R^n / Z^n`, `n ∈ {1, 2}`.
    Torus(usize),
    Su2,
}

impl GroupBackend {
    /// Parse one of `"torus1" | "torus2" | "su2"`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "torus1" => Ok(GroupBackend::Torus(1)),
            "torus2" => Ok(GroupBackend::Torus(2)),
            "su2" => Ok(GroupBackend::Su2),
            other => Err(Error::Config(format!(
                "unsupported group '{other}' (expected torus1, torus2 or su2)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GroupBackend::Torus(1) => "torus1",
            GroupBackend::Torus(_) => "torus2",
            GroupBackend::Su2 => "su2",
        }
    }

    pub fn identity(&self) -> GroupPoint {
        match self {
            GroupBackend::Torus(n) => GroupPoint::Torus(vec![0.0; *n]),
            GroupBackend::Su2 => GroupPoint::Euler(EulerAngles::new(0.0, 0.0, 0.0)),
        }
    }

    /// Representations with `⟨ξ⟩ ≤ bracket_cut`, ascending in Laplacian
    /// eigenvalue and then in label order.
    pub fn enumerate_dual(&self, bracket_cut: f64) -> Result<Vec<DualIndex>> {
        if !(bracket_cut >= 1.0) {
            return Err(Error::Parameter(format!("bracket_cut must be >= 1, got {bracket_cut}")));
        }
        let eig_cut = (bracket_cut * bracket_cut - 1.0) * (1.0 + 1e-12) + 1e-12;
        let mut out = Vec::new();
        match *self {
            GroupBackend::Torus(n) => {
                let kmax = (eig_cut.sqrt() / (2.0 * PI)).floor() as i64;
                let side = (2 * kmax + 1) as usize;
                let total = side.pow(n as u32);
                for idx in 0..total {
                    let mut rem = idx;
                    let mut k = vec![0i64; n];
                    for slot in k.iter_mut().rev() {
                        *slot = (rem % side) as i64 - kmax;
                        rem /= side;
                    }
                    let label = DualLabel::Torus(k);
                    if label.laplace_eig() <= eig_cut {
                        out.push(label.index());
                    }
                }
            }
            GroupBackend::Su2 => {
                let mut two_l = 0u32;
                loop {
                    let label = DualLabel::Spin(two_l);
                    if label.laplace_eig() > eig_cut {
                        break;
                    }
                    if two_l > wigner::MAX_TWO_J {
                        return Err(Error::Parameter(format!(
                            "bracket cut {bracket_cut} needs spin above {}",
                            wigner::MAX_SPIN
                        )));
                    }
                    out.push(label.index());
                    two_l += 1;
                }
            }
        }
        out.sort_by(|a, b| {
            a.laplace_eig
                .partial_cmp(&b.laplace_eig)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.label.cmp(&b.label))
        });
        Ok(out)
    }

    fn check_label(&self, label: &DualLabel) -> Result<()> {
        match (self, label) {
            (GroupBackend::Torus(n), DualLabel::Torus(k)) if k.len() == *n => Ok(()),
            (GroupBackend::Su2, DualLabel::Spin(tl)) if *tl <= wigner::MAX_TWO_J => Ok(()),
            _ => Err(Error::Parameter(format!(
                "representation {label} does not belong to {}",
                self.name()
            ))),
        }
    }

    fn check_point(&self, x: &GroupPoint) -> Result<()> {
        match (self, x) {
            (GroupBackend::Torus(n), GroupPoint::Torus(v)) if v.len() == *n => Ok(()),
            (GroupBackend::Su2, GroupPoint::Euler(_)) => Ok(()),
            _ => Err(Error::Parameter(format!("point {x:?} does not belong to {}", self.name()))),
        }
    }

    /// Matrix of the representation `ξ` at the point `x`.
    pub fn rep_matrix(&self, label: &DualLabel, x: &GroupPoint) -> Result<CMatrix> {
        self.check_label(label)?;
        self.check_point(x)?;
        Ok(match (label, x) {
            (DualLabel::Torus(k), GroupPoint::Torus(v)) => {
                CMatrix::from_element(1, 1, character(k, v))
            }
            (DualLabel::Spin(tl), GroupPoint::Euler(e)) => {
                wigner::wigner_d(*tl, e.alpha, e.beta, e.gamma)
            }
            _ => unreachable!("checked above"),
        })
    }

    /// Group product `xy`.
    pub fn compose(&self, x: &GroupPoint, y: &GroupPoint) -> Result<GroupPoint> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(match (x, y) {
            (GroupPoint::Torus(a), GroupPoint::Torus(b)) => {
                GroupPoint::Torus(a.iter().zip(b).map(|(s, t)| (s + t).rem_euclid(1.0)).collect())
            }
            (GroupPoint::Euler(a), GroupPoint::Euler(b)) => {
                GroupPoint::Euler(EulerAngles::from_su2(&su2_mul(&a.to_su2(), &b.to_su2())))
            }
            _ => unreachable!("checked above"),
        })
    }

    /// Geodesic distance (see module docs for the SU(2) convention).
    pub fn distance(&self, x: &GroupPoint, y: &GroupPoint) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(match (x, y) {
            (GroupPoint::Torus(a), GroupPoint::Torus(b)) => a
                .iter()
                .zip(b)
                .map(|(s, t)| {
                    let d = (s - t).rem_euclid(1.0);
                    let d = d.min(1.0 - d);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            (GroupPoint::Euler(a), GroupPoint::Euler(b)) => {
                let g = a.to_su2();
                let h = b.to_su2();
                // Re Tr(g h*)
                let mut tr = Complex64::new(0.0, 0.0);
                for i in 0..2 {
                    for k in 0..2 {
                        tr += g[i][k] * h[i][k].conj();
                    }
                }
                2.0 * (0.5 * tr.re).clamp(-1.0, 1.0).acos()
            }
            _ => unreachable!("checked above"),
        })
    }

    pub fn diameter(&self) -> f64 {
        match self {
            GroupBackend::Torus(n) => 0.5 * (*n as f64).sqrt(),
            GroupBackend::Su2 => 2.0 * PI,
        }
    }

    pub fn haar_quadrature(&self, resolution: usize) -> Result<QuadratureGrid> {
        QuadratureGrid::new(*self, resolution)
    }
}

/// `e^{2πi k·x}`
pub fn character(k: &[i64], x: &[f64]) -> Complex64 {
    let phase: f64 = k.iter().zip(x).map(|(ki, xi)| *ki as f64 * xi).sum();
    let turn = phase.rem_euclid(1.0);
    Complex64::from_polar(1.0, 2.0 * PI * turn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hs_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_euler(rng: &mut ChaCha8Rng) -> EulerAngles {
        EulerAngles::new(
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.0..PI),
            rng.gen_range(0.0..4.0 * PI),
        )
    }

    #[test]
    fn torus1_trivial_cut() {
        let duals = GroupBackend::Torus(1).enumerate_dual(1.0).unwrap();
        assert_eq!(duals.len(), 1);
        assert_eq!(duals[0].label, DualLabel::Torus(vec![0]));
        assert_eq!(duals[0].bracket, 1.0);
    }

    #[test]
    fn torus_eigenvalue_matches_second_difference() {
        // -f'' of e^{2πi 3x} by a central difference, compared to 4π²·9
        let label = DualLabel::Torus(vec![3]);
        let h = 1e-4;
        let x = 0.137;
        let f = |t: f64| character(&[3], &[t]);
        let lap = -(f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h) / f(x);
        assert!((lap.re - label.laplace_eig()).abs() / label.laplace_eig() < 1e-6);
        assert!((label.laplace_eig() - 355.305_758_01).abs() < 1e-6);
    }

    #[test]
    fn su2_cut_two_gives_three_spins() {
        let duals = GroupBackend::Su2.enumerate_dual(2.0).unwrap();
        let labels: Vec<_> = duals.iter().map(|d| d.label.clone()).collect();
        assert_eq!(labels, vec![DualLabel::Spin(0), DualLabel::Spin(1), DualLabel::Spin(2)]);
        let eigs: Vec<f64> = duals.iter().map(|d| d.laplace_eig).collect();
        assert_eq!(eigs, vec![0.0, 0.75, 2.0]);
        let dims: Vec<usize> = duals.iter().map(|d| d.dim).collect();
        assert_eq!(dims, vec![1, 2, 3]);
    }

    #[test]
    fn casimir_eigenvalue_by_finite_differences() {
        // L = -[∂β² + cot β ∂β + (∂α² - 2 cos β ∂α∂γ + ∂γ²)/sin²β]
        let g = GroupBackend::Su2;
        let (a, b, c) = (0.7, 1.2, 2.1);
        let h = 1e-3;
        for two_l in [1u32, 2, 3, 4] {
            let label = DualLabel::Spin(two_l);
            let d = |x: f64, y: f64, z: f64| {
                g.rep_matrix(&label, &GroupPoint::Euler(EulerAngles::new(x, y, z))).unwrap()
            };
            let f0 = d(a, b, c);
            let d_bb = (d(a, b + h, c) - &f0 * Complex64::new(2.0, 0.0) + d(a, b - h, c)) / Complex64::new(h * h, 0.0);
            let d_b = (d(a, b + h, c) - d(a, b - h, c)) / Complex64::new(2.0 * h, 0.0);
            let d_aa = (d(a + h, b, c) - &f0 * Complex64::new(2.0, 0.0) + d(a - h, b, c)) / Complex64::new(h * h, 0.0);
            let d_cc = (d(a, b, c + h) - &f0 * Complex64::new(2.0, 0.0) + d(a, b, c - h)) / Complex64::new(h * h, 0.0);
            let d_ac = (d(a + h, b, c + h) - d(a + h, b, c - h) - d(a - h, b, c + h) + d(a - h, b, c - h))
                / Complex64::new(4.0 * h * h, 0.0);
            let s2 = b.sin().powi(2);
            let lap = -(d_bb + d_b * Complex64::new(b.cos() / b.sin(), 0.0)
                + (d_aa - d_ac * Complex64::new(2.0 * b.cos(), 0.0) + d_cc) / Complex64::new(s2, 0.0));
            let expected = &f0 * Complex64::new(label.laplace_eig(), 0.0);
            let err = hs_norm(&(lap - &expected)) / hs_norm(&expected);
            assert!(err < 1e-5, "two_l={two_l} err={err}");
        }
    }

    #[test]
    fn rep_matrix_identity_cases() {
        let t = GroupBackend::Torus(1);
        let m = t.rep_matrix(&DualLabel::Torus(vec![5]), &GroupPoint::torus1(0.0)).unwrap();
        assert_eq!(m[(0, 0)], Complex64::new(1.0, 0.0));
        let s = GroupBackend::Su2;
        let m = s.rep_matrix(&DualLabel::Spin(1), &s.identity()).unwrap();
        assert!(hs_norm(&(m - CMatrix::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn su2_reps_are_unitary_homomorphisms() {
        let g = GroupBackend::Su2;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = GroupPoint::Euler(random_euler(&mut rng));
            let y = GroupPoint::Euler(random_euler(&mut rng));
            let xy = g.compose(&x, &y).unwrap();
            for two_l in 0..=6u32 {
                let label = DualLabel::Spin(two_l);
                let dx = g.rep_matrix(&label, &x).unwrap();
                let dy = g.rep_matrix(&label, &y).unwrap();
                let dxy = g.rep_matrix(&label, &xy).unwrap();
                let n = two_l as usize + 1;
                assert!(hs_norm(&(dx.adjoint() * &dx - CMatrix::identity(n, n))) < 1e-10);
                assert!(hs_norm(&(&dx * &dy - &dxy)) < 1e-9, "two_l={two_l}");
            }
        }
    }

    #[test]
    fn euler_roundtrip_stays_in_chart() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let e = random_euler(&mut rng);
            let back = EulerAngles::from_su2(&e.to_su2());
            assert!((0.0..2.0 * PI).contains(&back.alpha));
            assert!((0.0..4.0 * PI).contains(&back.gamma));
            let u = e.to_su2();
            let v = back.to_su2();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((u[i][j] - v[i][j]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn distances() {
        let t = GroupBackend::Torus(1);
        let d = t.distance(&GroupPoint::torus1(0.9), &GroupPoint::torus1(0.1)).unwrap();
        assert!((d - 0.2).abs() < 1e-15);
        let s = GroupBackend::Su2;
        // rotation by angle θ about z: α + γ = θ
        let x = GroupPoint::Euler(EulerAngles::new(0.0, 0.0, 1.3));
        let d = s.distance(&s.identity(), &x).unwrap();
        assert!((d - 1.3).abs() < 1e-12);
        // -I is at distance 2π
        let minus = GroupPoint::Euler(EulerAngles::new(0.0, 0.0, 2.0 * PI));
        assert!((s.distance(&s.identity(), &minus).unwrap() - 2.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn unknown_backend_is_config_error() {
        assert!(matches!(GroupBackend::from_name("so3"), Err(Error::Config(_))));
    }
}
