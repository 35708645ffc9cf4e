//! The flat bump `E` and the plateau cutoff `ψ` built from it.
//!
//! `E(t) = e^{-1/(a²-t²)} (a²-t²)^{10}` on `[0, a)` and zero beyond. With
//! `η̃(t) = E(t)(1 - Bt² + Ct⁴)` and `B, C` chosen so that `η̃''(0) = η̃⁗(0) = 0`,
//! the cutoff is `ψ = E(0)²` on `[0, T]`, `E(0) η̃(t - T)` on `[T, T + a]` and
//! zero up to `T + ε`, extended oddly to negative times.

use serde::Serialize;

use crate::error::{Error, Result};

/// `E^{(i)}(t)` for `0 ≤ i ≤ 4`.
pub fn bump_e(t: f64, a: f64, i: usize) -> Result<f64> {
    if i > 4 {
        return Err(Error::UnsupportedOrder(i));
    }
    if !(a > 0.0) {
        return Err(Error::Parameter(format!("bump radius must be positive, got {a}")));
    }
    if !(t >= 0.0 && t <= 4.0 * a / 3.0) {
        return Err(Error::OutOfRange {
            t,
            lo: 0.0,
            hi: 4.0 * a / 3.0,
        });
    }
    if t >= a {
        return Ok(0.0);
    }
    let u = a * a - t * t;
    let g = (-1.0 / u).exp();
    let (a2, t2) = (a * a, t * t);
    let (a4, a6, a8, a10, a12) = (a2 * a2, a2.powi(3), a2.powi(4), a2.powi(5), a2.powi(6));
    let (t4, t6, t8) = (t2 * t2, t2.powi(3), t2.powi(4));
    Ok(match i {
        0 => g * u.powi(10),
        1 => 2.0 * t * g * u.powi(8) * (-10.0 * a2 + 10.0 * t2 - 1.0),
        2 => {
            -2.0 * g
                * u.powi(6)
                * (10.0 * a6 + a4 * (1.0 - 210.0 * t2) + a2 * (390.0 * t4 - 38.0 * t2) - 190.0 * t6 + 37.0 * t4
                    - 2.0 * t2)
        }
        3 => {
            4.0 * t
                * g
                * u.powi(4)
                * (270.0 * a8 + a6 * (54.0 - 2520.0 * t2) + a4 * (5940.0 * t4 - 594.0 * t2 + 3.0)
                    - 54.0 * a2 * (100.0 * t6 - 19.0 * t4 + t2)
                    + t2 * (1710.0 * t6 - 486.0 * t4 + 51.0 * t2 - 2.0))
        }
        _ => {
            4.0 * g
                * u.powi(2)
                * (270.0 * a12 - 54.0 * a10 * (190.0 * t2 - 1.0) + 3.0 * a8 * (22470.0 * t4 - 954.0 * t2 + 1.0)
                    - 12.0 * a6 * t2 * (14370.0 * t4 - 1581.0 * t2 + 25.0)
                    + 6.0 * a4 * t2 * (35235.0 * t6 - 6714.0 * t4 + 371.0 * t2 - 2.0)
                    - 2.0 * a2 * t4 * (62730.0 * t6 - 17415.0 * t4 + 1782.0 * t2 - 68.0)
                    + t4 * (29070.0 * t8 - 10710.0 * t6 + 1635.0 * t4 - 124.0 * t2 + 4.0))
        }
    })
}

/// `(B, C)` with `η̃''(0) = η̃⁗(0) = 0`.
pub fn derive_eta_coeffs(a: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) {
        return Err(Error::Degenerate(format!("bump radius {a} gives E(0) = 0")));
    }
    let e0 = bump_e(0.0, a, 0)?;
    if e0 == 0.0 {
        return Err(Error::Degenerate(format!("E(0) underflows at a = {a}")));
    }
    let e2 = bump_e(0.0, a, 2)?;
    let e4 = bump_e(0.0, a, 4)?;
    let b = e2 / (2.0 * e0);
    let c = (12.0 * b * e2 - e4) / (24.0 * e0);
    Ok((b, c))
}

/// The alternative pair `B = (E''(0) - E(0))/2`,
/// `C = (6(E''(0) - E(0))E''(0) - E⁗(0)) / (12 E(0))`, kept for comparison.
pub fn printed_eta_coeffs(a: f64) -> Result<(f64, f64)> {
    let e0 = bump_e(0.0, a, 0)?;
    let e2 = bump_e(0.0, a, 2)?;
    let e4 = bump_e(0.0, a, 4)?;
    Ok(((e2 - e0) / 2.0, (6.0 * (e2 - e0) * e2 - e4) / (12.0 * e0)))
}

/// `η̃^{(i)}(t)` for the given `(B, C)`, by the Leibniz rule.
pub fn eta_tilde(t: f64, a: f64, (b, c): (f64, f64), i: usize) -> Result<f64> {
    if i > 4 {
        return Err(Error::UnsupportedOrder(i));
    }
    let p = [
        1.0 - b * t * t + c * t.powi(4),
        -2.0 * b * t + 4.0 * c * t.powi(3),
        -2.0 * b + 12.0 * c * t * t,
        24.0 * c * t,
        24.0 * c,
    ];
    let binom = [[1.0, 0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0, 0.0], [1.0, 3.0, 3.0, 1.0, 0.0], [1.0, 4.0, 6.0, 4.0, 1.0]];
    let mut acc = 0.0;
    for k in 0..=i {
        acc += binom[i][k] * bump_e(t, a, i - k)? * p[k];
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffSpec {
    pub epsilon: f64,
    pub a: f64,
    pub t_end: f64,
    pub b: f64,
    pub c: f64,
    pub e0: f64,
    /// Plateau value `E(0) η̃(0) = E(0)²`.
    pub psi0: f64,
}

impl CutoffSpec {
    pub fn new(epsilon: f64, t_end: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if !(t_end > 0.0) {
            return Err(Error::Parameter(format!("T must be positive, got {t_end}")));
        }
        let a = 0.75 * epsilon;
        let (b, c) = derive_eta_coeffs(a)?;
        let e0 = bump_e(0.0, a, 0)?;
        Ok(CutoffSpec {
            epsilon,
            a,
            t_end,
            b,
            c,
            e0,
            psi0: e0 * e0,
        })
    }

    pub fn support_end(&self) -> f64 {
        self.t_end + self.epsilon
    }

    /// `ψ^{(i)}(t)` on `[-(T+ε), T+ε]`.
    pub fn psi(&self, t: f64, i: usize) -> Result<f64> {
        if i > 4 {
            return Err(Error::UnsupportedOrder(i));
        }
        let end = self.support_end();
        if !(t.abs() <= end) {
            return Err(Error::OutOfRange { t, lo: -end, hi: end });
        }
        if t < 0.0 {
            // d^i/dt^i [-ψ(-t)] = -(-1)^i ψ^{(i)}(-t)
            let v = self.psi(-t, i)?;
            return Ok(if i % 2 == 0 { -v } else { v });
        }
        if t <= self.t_end {
            return Ok(if i == 0 { self.psi0 } else { 0.0 });
        }
        let s = t - self.t_end;
        if s >= self.a {
            return Ok(0.0);
        }
        Ok(self.e0 * eta_tilde(s, self.a, (self.b, self.c), i)?)
    }

    /// `ψ^{(i)}(T⁺)` for `i = 1..4`.
    pub fn derivatives_at_end(&self) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (i, v) in out.iter_mut().enumerate() {
            *v = self.e0 * eta_tilde(0.0, self.a, (self.b, self.c), i + 1)?;
        }
        Ok(out)
    }

    /// `‖ψ^{(i)}‖_∞` for `i = 1..4`, sampled on the transition `[T, T + a]`.
    pub fn derivative_sup(&self, samples: usize) -> Result<[f64; 4]> {
        let mut out = [0.0f64; 4];
        for k in 0..=samples {
            let s = self.a * k as f64 / samples as f64;
            for (i, v) in out.iter_mut().enumerate() {
                let d = if s >= self.a {
                    0.0
                } else {
                    self.e0 * eta_tilde(s, self.a, (self.b, self.c), i + 1)?
                };
                *v = v.max(d.abs());
            }
        }
        Ok(out)
    }
}

/// One row of the cutoff report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffRow {
    pub epsilon: f64,
    pub psi0: f64,
    pub d_at_t: [f64; 4],
    pub max_norm: [f64; 4],
}

pub fn cutoff_check(epsilons: &[f64], t_end: f64, samples: usize) -> Result<Vec<CutoffRow>> {
    epsilons
        .iter()
        .map(|&e| {
            let spec = CutoffSpec::new(e, t_end)?;
            Ok(CutoffRow {
                epsilon: e,
                psi0: spec.psi0,
                d_at_t: spec.derivatives_at_end()?,
                max_norm: spec.derivative_sup(samples)?,
            })
        })
        .collect()
}
