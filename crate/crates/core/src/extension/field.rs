//! Space-time fields `Σ_j c_j(t) e_j(x)` with analytic time profiles.
//!
//! Each mode stores an amplitude and a profile whose derivatives are exact.
//! Large `sinh` arguments are kept as `mantissa · e^{log}` so that norms of
//! fields with `λT` up to [`MAX_SCALED_EXPONENT`] stay finite in log form.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::cutoff::CutoffSpec;
use crate::linalg::compensated_sum;
use crate::quadrature::TimeGrid;
use crate::spectral::SpectralSubspace;

/// Arguments above this are stored in scaled form.
pub const SCALE_SWITCH: f64 = 30.0;
/// Largest `λT` accepted by the scaled representation.
pub const MAX_SCALED_EXPONENT: f64 = 1e5;
/// Largest `λT` for routines that work with plain values.
pub const MAX_PLAIN_EXPONENT: f64 = 700.0;
/// Default Gauss–Legendre density in time.
pub const NODES_PER_UNIT: usize = 64;

/// `mant · e^{log}`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mant: f64,
    pub log: f64,
}

impl Scaled {
    pub fn plain(v: f64) -> Self {
        Scaled { mant: v, log: 0.0 }
    }

    pub fn value(&self) -> f64 {
        self.mant * self.log.exp()
    }

    /// `ln |v|²`
    pub fn log_sq(&self) -> f64 {
        2.0 * (self.mant.abs().ln() + self.log)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Profile {
    /// `sinh(λt)/λ`, or `t` at `λ = 0`.
    Sinh(f64),
    /// `Σ c_k t^k`
    Poly(Vec<f64>),
}

impl Profile {
    /// `n`-th time derivative at `t`.
    pub fn deriv(&self, t: f64, n: usize) -> Scaled {
        match self {
            Profile::Sinh(l) if *l == 0.0 => Profile::Poly(vec![0.0, 1.0]).deriv(t, n),
            Profile::Sinh(l) => {
                let x = l * t;
                let lp = l.powi(n as i32 - 1);
                let odd_fn = n % 2 == 0; // sinh for even n, cosh for odd n
                if x.abs() <= SCALE_SWITCH {
                    let v = if odd_fn { x.sinh() } else { x.cosh() };
                    Scaled::plain(lp * v)
                } else {
                    let e = (-2.0 * x.abs()).exp();
                    let m = if odd_fn { x.signum() * 0.5 * (1.0 - e) } else { 0.5 * (1.0 + e) };
                    Scaled { mant: lp * m, log: x.abs() }
                }
            }
            Profile::Poly(c) => {
                let mut acc = 0.0;
                for (k, &ck) in c.iter().enumerate().skip(n) {
                    let fall: f64 = (0..n).map(|i| (k - i) as f64).product();
                    acc += ck * fall * t.powi((k - n) as i32);
                }
                Scaled::plain(acc)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldMode {
    pub amp: Complex64,
    /// Frequency `λ_j`.
    pub freq: f64,
    /// Eigenvalue of `A^{2/m}` on the mode.
    pub a2m: f64,
    /// Laplace–Beltrami eigenvalue of the mode's representation.
    pub laplace: f64,
    pub profile: Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceTimeField {
    pub modes: Vec<FieldMode>,
    /// The field is defined on `[-t_max, t_max]`.
    pub t_max: f64,
}

/// Running `ln Σ e^{x_i}`.
#[derive(Debug, Clone, Copy)]
struct LogSum {
    max: f64,
    sum: f64,
}

impl LogSum {
    fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.sum += (x - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// `F(x,t) = Σ sinh(λ_j t)/λ_j · a_j e_j(x)` on `[-t_max, t_max]`.
pub fn sinh_extension(subspace: &SpectralSubspace, a: &[Complex64], t_max: f64) -> Result<SpaceTimeField> {
    if a.len() != subspace.len() {
        return Err(Error::Dimension {
            expected: subspace.len(),
            got: a.len(),
        });
    }
    if !(t_max > 0.0) {
        return Err(Error::Parameter(format!("time horizon must be positive, got {t_max}")));
    }
    let mut modes = Vec::with_capacity(a.len());
    for (m, &amp) in subspace.modes.iter().zip(a) {
        if m.freq * t_max > MAX_SCALED_EXPONENT {
            return Err(Error::Magnitude(m.freq * t_max));
        }
        modes.push(FieldMode {
            amp,
            freq: m.freq,
            a2m: m.eigenvalue.powf(2.0 / subspace.order),
            laplace: m.dual.laplace_eig,
            profile: Profile::Sinh(m.freq),
        });
    }
    Ok(SpaceTimeField { modes, t_max })
}

impl SpaceTimeField {
    /// `∂_t^n c_j(t)` without the amplitude.
    pub fn profile(&self, j: usize, t: f64, n: usize) -> Scaled {
        self.modes[j].profile.deriv(t, n)
    }

    /// Fourier coefficients `∂_t^n c_j(t)` in plain form.
    pub fn coefficients(&self, t: f64, n: usize) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.amp * m.profile.deriv(t, n).value()).collect()
    }

    fn check_interval(&self, t0: f64, t1: f64) -> Result<()> {
        let tol = 1e-12 * self.t_max.max(1.0);
        if t0 < -self.t_max - tol || t0 > t1 {
            return Err(Error::OutOfRange {
                t: t0,
                lo: -self.t_max,
                hi: t1,
            });
        }
        if t1 > self.t_max + tol {
            return Err(Error::OutOfRange {
                t: t1,
                lo: t0,
                hi: self.t_max,
            });
        }
        Ok(())
    }

    /// `ln ‖F‖_{H^s(G × (t0, t1))}` with
    /// `‖f‖² = Σ_{j≤s} ∫ ‖∂_t^j f‖² + ‖(1+ℒ)^{j/2} f‖² dt`; the `j = 0`
    /// term therefore counts the `L²` norm twice.
    pub fn log_h_norm(&self, t0: f64, t1: f64, s: usize) -> Result<f64> {
        if s > 1 {
            return Err(Error::UnsupportedOrder(s));
        }
        self.check_interval(t0, t1)?;
        if t1 == t0 {
            return Ok(f64::NEG_INFINITY);
        }
        let grid = TimeGrid::composite(&[t0, t1], NODES_PER_UNIT, 16)?;
        let mut acc = LogSum::new();
        for m in &self.modes {
            if m.amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let la = 2.0 * m.amp.norm().ln();
            for (&t, &w) in grid.nodes.iter().zip(&grid.weights) {
                let lw = w.ln() + la;
                for j in 0..=s {
                    let d = m.profile.deriv(t, j);
                    let p = m.profile.deriv(t, 0);
                    acc.add(lw + d.log_sq());
                    acc.add(lw + j as f64 * (1.0 + m.laplace).ln() + p.log_sq());
                }
            }
        }
        Ok(0.5 * acc.value())
    }

    pub fn h_norm(&self, t0: f64, t1: f64, s: usize) -> Result<f64> {
        Ok(self.log_h_norm(t0, t1, s)?.exp())
    }

    fn check_plain(&self) -> Result<()> {
        for m in &self.modes {
            if m.freq * self.t_max > MAX_PLAIN_EXPONENT {
                return Err(Error::Magnitude(m.freq * self.t_max));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CancellationReport {
    /// `max |c_j'' - λ_j² c_j|`
    pub residual: f64,
    /// `max |a_j| max(|p_j|, λ_j² |p_j|)`
    pub scale: f64,
    pub relative: f64,
}

/// `(-∂_t² + A^{2/m})F` on the plateau `[0, T]`, mode by mode with exact
/// time derivatives.
pub fn check_cancellation(field: &SpaceTimeField) -> Result<CancellationReport> {
    let grid = TimeGrid::composite(&[0.0, field.t_max], NODES_PER_UNIT, 16)?;
    let mut residual = 0.0f64;
    let mut scale = 0.0f64;
    for m in &field.modes {
        let amp = m.amp.norm();
        for &t in grid.nodes.iter().chain(std::iter::once(&field.t_max)) {
            let p = m.profile.deriv(t, 0);
            let p2 = m.profile.deriv(t, 2);
            // both share the same scaling exponent
            let shift = (p2.log - p.log).exp();
            let r = (p2.mant * shift - m.a2m * p.mant).abs() * amp;
            let s = amp * p.mant.abs().max(m.a2m * p.mant.abs());
            let norm = p.log.exp();
            residual = residual.max(r * norm);
            scale = scale.max(s * norm);
        }
    }
    Ok(CancellationReport {
        residual,
        scale,
        relative: if scale > 0.0 { residual / scale } else { 0.0 },
    })
}

/// `φ = ψ F` with `F` frozen at `F(T)` after `T`, extended oddly in time.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffField<'a> {
    pub field: &'a SpaceTimeField,
    pub cutoff: CutoffSpec,
}

impl<'a> CutoffField<'a> {
    pub fn new(field: &'a SpaceTimeField, cutoff: CutoffSpec) -> Result<Self> {
        if (cutoff.t_end - field.t_max).abs() > 1e-12 * field.t_max {
            return Err(Error::Parameter(format!(
                "cutoff plateau ends at {} but the field is defined up to {}",
                cutoff.t_end, field.t_max
            )));
        }
        field.check_plain()?;
        Ok(CutoffField { field, cutoff })
    }

    /// Coefficients of `(-∂_t² + A^{2/m})φ` at `t`.
    pub fn residual(&self, t: f64) -> Result<Vec<Complex64>> {
        if t < 0.0 {
            return Ok(self.residual(-t)?.into_iter().map(|v| -v).collect());
        }
        let tt = self.cutoff.t_end;
        let mut out = Vec::with_capacity(self.field.modes.len());
        for m in &self.field.modes {
            let v = if t <= tt {
                let c = m.profile.deriv(t, 0).value();
                let c2 = m.profile.deriv(t, 2).value();
                self.cutoff.psi0 * (-c2 + m.a2m * c)
            } else {
                let c = m.profile.deriv(tt, 0).value();
                c * (-self.cutoff.psi(t, 2)? + m.a2m * self.cutoff.psi(t, 0)?)
            };
            out.push(m.amp * v);
        }
        Ok(out)
    }

    /// Mirrored grid on `[-(T+ε), T+ε]` with breaks at `T` and `T + a`.
    pub fn default_grid(&self) -> Result<TimeGrid> {
        let c = &self.cutoff;
        TimeGrid::mirrored(&[0.0, c.t_end, c.t_end + c.a, c.t_end + c.epsilon], NODES_PER_UNIT, 16)
    }
}

/// `(‖(-∂_t²+A^{2/m})φ‖²` over the doubled interval, `2‖·‖²` over
/// `[0, T+ε])`.
pub fn check_symmetry(phi: &CutoffField, grid: &TimeGrid) -> Result<(f64, f64)> {
    if !grid.is_mirrored() {
        return Err(Error::GridSymmetry);
    }
    let end = phi.cutoff.support_end();
    if grid.nodes.iter().any(|t| t.abs() > end) {
        return Err(Error::Parameter("time grid leaves the support of the cutoff".into()));
    }
    let mut full = Vec::with_capacity(grid.len());
    let mut half = Vec::with_capacity(grid.len() / 2);
    for (&t, &w) in grid.nodes.iter().zip(&grid.weights) {
        let r: f64 = phi.residual(t)?.iter().map(|v| v.norm_sqr()).sum();
        full.push(w * r);
        if t > 0.0 {
            half.push(w * r);
        }
    }
    Ok((compensated_sum(full), 2.0 * compensated_sum(half)))
}
