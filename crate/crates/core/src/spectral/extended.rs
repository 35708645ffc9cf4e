//! Smallest Gram eigenvalue on torus arcs and boxes in extended precision.
//!
//! The Gram entries are `conj(u_i) u_j ∫_ω e^{2πi (k_j - k_i)·x} dx` with the
//! integrals evaluated in closed form at `precision` bits. The matrix is
//! Cholesky factored and `λ_min` is found by inverse iteration followed by a
//! Rayleigh quotient, all at the same precision.

use std::collections::BTreeMap;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::observation::arcs_disjoint;
use crate::group::{DualLabel, SetDescriptor};
use crate::spectral::SpectralSubspace;

const RM: RoundingMode = RoundingMode::ToEven;
pub const DEFAULT_PRECISION: usize = 320;

/// Values below this are indistinguishable from rounding at `precision`
/// bits for an `n × n` Gram matrix.
pub fn underflow_floor(n: usize, precision: usize) -> f64 {
    1e-13 * n as f64 * 2f64.powi(-(precision as i32 - 53))
}

/// Nearest `f64`, flushing to zero below the normal range.
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let Some((m, _, s, e, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = *m.last().expect("nonzero mantissa");
    let next = if m.len() > 1 { m[m.len() - 2] } else { 0 };
    let mant = top as f64 + next as f64 * 2f64.powi(-64);
    let e = e as i32 - 64;
    if e < -1100 {
        return 0.0;
    }
    // split the scaling to stay inside the exponent range
    let v = mant * 2f64.powi(e / 2) * 2f64.powi(e - e / 2);
    if s == Sign::Neg {
        -v
    } else {
        v
    }
}

#[derive(Clone, Debug)]
struct Cx {
    re: BigFloat,
    im: BigFloat,
}

struct Ctx {
    p: usize,
    cc: Consts,
    two_pi: BigFloat,
}

impl Ctx {
    fn new(p: usize) -> Result<Self> {
        let mut cc = Consts::new().map_err(|e| Error::Numerical(format!("extended constants: {e:?}")))?;
        let pi = cc.pi(p, RM);
        let two_pi = pi.mul(&BigFloat::from_f64(2.0, p), p, RM);
        Ok(Ctx { p, cc, two_pi })
    }

    fn f(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.p)
    }

    fn zero(&self) -> Cx {
        Cx {
            re: self.f(0.0),
            im: self.f(0.0),
        }
    }

    fn cx(&self, z: Complex64) -> Cx {
        Cx {
            re: self.f(z.re),
            im: self.f(z.im),
        }
    }

    fn add(&self, a: &Cx, b: &Cx) -> Cx {
        Cx {
            re: a.re.add(&b.re, self.p, RM),
            im: a.im.add(&b.im, self.p, RM),
        }
    }

    fn sub(&self, a: &Cx, b: &Cx) -> Cx {
        Cx {
            re: a.re.sub(&b.re, self.p, RM),
            im: a.im.sub(&b.im, self.p, RM),
        }
    }

    fn mul(&self, a: &Cx, b: &Cx) -> Cx {
        let p = self.p;
        Cx {
            re: a.re.mul(&b.re, p, RM).sub(&a.im.mul(&b.im, p, RM), p, RM),
            im: a.re.mul(&b.im, p, RM).add(&a.im.mul(&b.re, p, RM), p, RM),
        }
    }

    fn conj(&self, a: &Cx) -> Cx {
        Cx {
            re: a.re.clone(),
            im: a.im.neg(),
        }
    }

    fn scale(&self, a: &Cx, s: &BigFloat) -> Cx {
        Cx {
            re: a.re.mul(s, self.p, RM),
            im: a.im.mul(s, self.p, RM),
        }
    }

    fn norm_sqr(&self, a: &Cx) -> BigFloat {
        a.re.mul(&a.re, self.p, RM).add(&a.im.mul(&a.im, self.p, RM), self.p, RM)
    }

    /// `∫_a^b e^{2πi n x} dx`
    fn arc_integral(&mut self, n: i64, (a, b): (f64, f64)) -> Cx {
        let p = self.p;
        if n == 0 {
            return Cx {
                re: self.f(b).sub(&self.f(a), p, RM),
                im: self.f(0.0),
            };
        }
        let w = self.two_pi.mul(&self.f(n as f64), p, RM);
        let ta = w.mul(&self.f(a), p, RM);
        let tb = w.mul(&self.f(b), p, RM);
        let (sa, ca) = (ta.sin(p, RM, &mut self.cc), ta.cos(p, RM, &mut self.cc));
        let (sb, cb) = (tb.sin(p, RM, &mut self.cc), tb.cos(p, RM, &mut self.cc));
        // (e^{iθb} - e^{iθa}) / (i w)
        Cx {
            re: sb.sub(&sa, p, RM).div(&w, p, RM),
            im: ca.sub(&cb, p, RM).div(&w, p, RM),
        }
    }

    fn set_integral(&mut self, set: &SetDescriptor, n: &[i64]) -> Result<Cx> {
        match set {
            SetDescriptor::Empty => Ok(self.zero()),
            SetDescriptor::Full => Ok(if n.iter().all(|&v| v == 0) {
                self.cx(Complex64::new(1.0, 0.0))
            } else {
                self.zero()
            }),
            SetDescriptor::Arcs(arcs) if n.len() == 1 && arcs_disjoint(arcs) => {
                let mut acc = self.zero();
                for &arc in arcs {
                    let v = self.arc_integral(n[0], arc);
                    acc = self.add(&acc, &v);
                }
                Ok(acc)
            }
            SetDescriptor::Box(arcs) if arcs.len() == n.len() => {
                let mut acc = self.cx(Complex64::new(1.0, 0.0));
                for (&arc, &ni) in arcs.iter().zip(n) {
                    let v = self.arc_integral(ni, arc);
                    acc = self.mul(&acc, &v);
                }
                Ok(acc)
            }
            _ => Err(Error::Parameter(format!(
                "extended precision needs disjoint torus arcs or a box, got {}",
                set.describe()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtendedEigen {
    pub lam_min: f64,
    /// `log10 λ_min`, finite even when `λ_min` is below the `f64` range.
    pub log10_lam_min: f64,
    #[serde(skip)]
    pub vector: Vec<Complex64>,
    pub iterations: usize,
    pub precision: usize,
    pub floor: f64,
    pub below_floor: bool,
}

fn log10_of(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        Some((m, _, _, e, _)) => {
            let top = *m.last().expect("nonzero mantissa") as f64 * 2f64.powi(-64);
            top.log10() + e as f64 * 2f64.log10()
        }
        None => f64::NAN,
    }
}

/// Smallest eigenvalue of the Gram matrix of a torus subspace on `set`.
pub fn extended_lambda_min(subspace: &SpectralSubspace, set: &SetDescriptor, precision: usize) -> Result<ExtendedEigen> {
    if precision < 64 {
        return Err(Error::Parameter("extended precision needs at least 64 bits".into()));
    }
    let n = subspace.len();
    if n == 0 {
        return Err(Error::Degenerate("empty subspace".into()));
    }
    let mut labels = Vec::with_capacity(n);
    for m in &subspace.modes {
        match &m.dual.label {
            DualLabel::Torus(k) => labels.push((k.clone(), m.col_mix[0])),
            DualLabel::Spin(_) => {
                return Err(Error::Parameter("extended precision is available on tori only".into()));
            }
        }
    }
    let mut ctx = Ctx::new(precision)?;
    let p = precision;
    let mut cache: BTreeMap<Vec<i64>, Cx> = BTreeMap::new();
    let mut g = vec![vec![ctx.zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let diff: Vec<i64> = labels[j].0.iter().zip(&labels[i].0).map(|(a, b)| a - b).collect();
            let integral = match cache.get(&diff) {
                Some(v) => v.clone(),
                None => {
                    let v = ctx.set_integral(set, &diff)?;
                    cache.insert(diff, v.clone());
                    v
                }
            };
            let ui = ctx.conj(&ctx.cx(labels[i].1));
            let uj = ctx.cx(labels[j].1);
            let v = ctx.mul(&ctx.mul(&ui, &uj), &integral);
            g[j][i] = ctx.conj(&v);
            g[i][j] = v;
        }
    }
    // Cholesky G = L L*
    let mut l = vec![vec![ctx.zero(); n]; n];
    for j in 0..n {
        let mut d = g[j][j].re.clone();
        for k in 0..j {
            d = d.sub(&ctx.norm_sqr(&l[j][k]), p, RM);
        }
        if d.is_zero() || d.sign() == Some(Sign::Neg) {
            return Ok(ExtendedEigen {
                lam_min: 0.0,
                log10_lam_min: f64::NEG_INFINITY,
                vector: vec![Complex64::new(0.0, 0.0); n],
                iterations: 0,
                precision,
                floor: underflow_floor(n, precision),
                below_floor: true,
            });
        }
        let djj = d.sqrt(p, RM);
        l[j][j] = Cx {
            re: djj.clone(),
            im: ctx.f(0.0),
        };
        for i in j + 1..n {
            let mut s = g[i][j].clone();
            for k in 0..j {
                s = ctx.sub(&s, &ctx.mul(&l[i][k], &ctx.conj(&l[j][k])));
            }
            l[i][j] = Cx {
                re: s.re.div(&djj, p, RM),
                im: s.im.div(&djj, p, RM),
            };
        }
    }
    let solve = |ctx: &Ctx, b: &[Cx]| -> Vec<Cx> {
        let mut y = vec![ctx.zero(); n];
        for i in 0..n {
            let mut s = b[i].clone();
            for k in 0..i {
                s = ctx.sub(&s, &ctx.mul(&l[i][k], &y[k]));
            }
            y[i] = Cx {
                re: s.re.div(&l[i][i].re, p, RM),
                im: s.im.div(&l[i][i].re, p, RM),
            };
        }
        let mut x = vec![ctx.zero(); n];
        for i in (0..n).rev() {
            let mut s = y[i].clone();
            for k in i + 1..n {
                s = ctx.sub(&s, &ctx.mul(&ctx.conj(&l[k][i]), &x[k]));
            }
            x[i] = Cx {
                re: s.re.div(&l[i][i].re, p, RM),
                im: s.im.div(&l[i][i].re, p, RM),
            };
        }
        x
    };
    let normalise = |ctx: &Ctx, v: &[Cx]| -> Vec<Cx> {
        let mut s = ctx.f(0.0);
        for c in v {
            s = s.add(&ctx.norm_sqr(c), p, RM);
        }
        let inv = ctx.f(1.0).div(&s.sqrt(p, RM), p, RM);
        v.iter().map(|c| ctx.scale(c, &inv)).collect()
    };
    let rayleigh = |ctx: &Ctx, v: &[Cx]| -> BigFloat {
        let mut acc = ctx.zero();
        for i in 0..n {
            let mut gi = ctx.zero();
            for j in 0..n {
                gi = ctx.add(&gi, &ctx.mul(&g[i][j], &v[j]));
            }
            acc = ctx.add(&acc, &ctx.mul(&ctx.conj(&v[i]), &gi));
        }
        acc.re
    };
    // deterministic start with weight on every mode
    let start: Vec<Cx> = (0..n)
        .map(|i| ctx.cx(Complex64::new(1.0 + 0.1 * i as f64, 0.01 * (i % 7) as f64)))
        .collect();
    let mut v = normalise(&ctx, &start);
    let mut lam = rayleigh(&ctx, &v);
    let mut iterations = 0;
    let tol = 2f64.powi(-(precision as i32 / 2));
    for it in 1..=500 {
        iterations = it;
        v = normalise(&ctx, &solve(&ctx, &v));
        let next = rayleigh(&ctx, &v);
        let change = next.sub(&lam, p, RM);
        lam = next;
        let rel = to_f64(&change.div(&lam, p, RM)).abs();
        if rel < tol {
            break;
        }
    }
    let floor = underflow_floor(n, precision);
    let lam_f = to_f64(&lam);
    let log10 = log10_of(&lam);
    let vector = v.iter().map(|c| Complex64::new(to_f64(&c.re), to_f64(&c.im))).collect();
    Ok(ExtendedEigen {
        lam_min: lam_f,
        log10_lam_min: log10,
        vector,
        iterations,
        precision,
        floor,
        below_floor: !(log10 > floor.log10()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_subspace, operator_for_cut};
    use crate::group::GroupBackend;
    use crate::symbol::{OperatorParams, Preset};
    use std::f64::consts::PI;

    fn torus_subspace(kmax: i64) -> SpectralSubspace {
        let b = GroupBackend::Torus(1);
        let cut = 2.0 * PI * kmax as f64;
        let op = operator_for_cut(b, Preset::LaplacianPower, OperatorParams::default(), cut).unwrap();
        build_subspace(&op, cut, &b.haar_quadrature(2 * kmax as usize + 2).unwrap()).unwrap()
    }

    #[test]
    fn round_trip_to_f64() {
        for v in [1.0, -3.5, 1e-200, 6.02e23, std::f64::consts::PI] {
            assert_eq!(to_f64(&BigFloat::from_f64(v, 256)), v);
        }
        assert_eq!(to_f64(&BigFloat::from_f64(0.0, 128)), 0.0);
    }

    #[test]
    fn matches_double_precision_for_small_bands() {
        let set = SetDescriptor::Arcs(vec![(0.0, 0.3)]);
        for (k, expected) in [(1, 0.0037163), (2, 1.8112e-5), (4, 2.8739e-10)] {
            let e = extended_lambda_min(&torus_subspace(k), &set, 192).unwrap();
            assert!((e.lam_min / expected - 1.0).abs() < 1e-4, "k={k} {}", e.lam_min);
        }
    }

    #[test]
    fn resolves_values_below_double_rounding() {
        // independent high-precision reference values
        let set = SetDescriptor::Arcs(vec![(0.0, 0.3)]);
        let e = extended_lambda_min(&torus_subspace(12), &set, DEFAULT_PRECISION).unwrap();
        assert!((e.lam_min / 7.4737e-30 - 1.0).abs() < 1e-4, "{}", e.lam_min);
        assert!(!e.below_floor);
    }

    #[test]
    fn full_set_gives_one() {
        let e = extended_lambda_min(&torus_subspace(3), &SetDescriptor::Full, 128).unwrap();
        assert!((e.lam_min - 1.0).abs() < 1e-15);
    }
}
