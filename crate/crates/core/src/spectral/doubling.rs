//! Doubling ratios `sup_{B(c,2R)} |κ| / sup_{B(c,R)} |κ|` over a spectral
//! subspace.
//!
//! The sup ratio is not smooth, so each trial climbs the smooth surrogate
//! `‖κ‖_{L^16(B2R)} / ‖κ‖_{L^16(BR)}` by projected gradient ascent on the unit
//! sphere and then records the true sup ratio on the evaluation points. The
//! best ratio over all trials is reported.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupBackend, GroupPoint};
use crate::linalg::CMatrix;
use crate::rng::{mix, stream, TAG_DOUBLING};
use crate::spectral::fit::{fit_envelope, ExpFit};
use crate::spectral::SpectralSubspace;

/// Half the surrogate exponent.
const SURROGATE_P: i32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoublingSpec {
    pub radius: f64,
    pub trials: usize,
    pub ascent_steps: usize,
    /// Points per unit length on tori, Haar grid resolution on SU(2).
    pub density: usize,
    pub seed: u64,
}

impl Default for DoublingSpec {
    fn default() -> Self {
        DoublingSpec {
            radius: 0.1,
            trials: 16,
            ascent_steps: 60,
            density: 2000,
            seed: 0,
        }
    }
}

/// Evaluation points of `B(c, 2R)` with a flag for membership in `B(c, R)`.
#[derive(Debug, Clone)]
pub struct BallPoints {
    pub points: Vec<GroupPoint>,
    pub inner: Vec<bool>,
}

pub fn ball_points(backend: GroupBackend, center: &GroupPoint, radius: f64, density: usize) -> Result<BallPoints> {
    if !(radius > 0.0) {
        return Err(Error::Parameter(format!("doubling radius must be positive, got {radius}")));
    }
    let outer = 2.0 * radius;
    let mut points = Vec::new();
    let mut inner = Vec::new();
    match (backend, center) {
        (GroupBackend::Torus(n), GroupPoint::Torus(c)) => {
            let half = outer.min(0.5);
            let steps = ((2.0 * half * density as f64).ceil() as usize).max(8);
            let offs: Vec<f64> = (0..=steps).map(|i| -half + 2.0 * half * i as f64 / steps as f64).collect();
            let total = offs.len().pow(n as u32);
            for flat in 0..total {
                let mut rem = flat;
                let mut d = Vec::with_capacity(n);
                for _ in 0..n {
                    d.push(offs[rem % offs.len()]);
                    rem /= offs.len();
                }
                let r = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r < outer || outer >= backend.diameter() {
                    let x: Vec<f64> = c.iter().zip(&d).map(|(a, b)| (a + b).rem_euclid(1.0)).collect();
                    let x = GroupPoint::Torus(x);
                    inner.push(backend.distance(center, &x)? < radius);
                    points.push(x);
                }
            }
        }
        (GroupBackend::Su2, GroupPoint::Euler(_)) => {
            let grid = backend.haar_quadrature(density.max(4))?;
            let e = backend.identity();
            for g in &grid.nodes {
                let d = backend.distance(&e, g)?;
                if d < outer {
                    points.push(backend.compose(center, g)?);
                    inner.push(d < radius);
                }
            }
            points.push(center.clone());
            inner.push(true);
        }
        _ => return Err(Error::Parameter("center does not belong to the group".into())),
    }
    if !inner.iter().any(|&b| b) {
        return Err(Error::Parameter("evaluation grid has no point in the inner ball".into()));
    }
    Ok(BallPoints { points, inner })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingResult {
    pub ratio: f64,
    #[serde(skip)]
    pub coefficients: Vec<Complex64>,
    pub trials_used: usize,
    pub discarded: usize,
    pub eval_points: usize,
}

/// `ln ‖v‖_{2p}` on the selected rows, computed with a max shift.
fn log_lp(v: &[Complex64], sel: &[usize]) -> f64 {
    let m = sel.iter().map(|&i| v[i].norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return f64::NEG_INFINITY;
    }
    let s: f64 = sel.iter().map(|&i| (v[i].norm() / m).powi(2 * SURROGATE_P)).sum();
    m.ln() + s.ln() / (2 * SURROGATE_P) as f64
}

/// Gradient of `ln ‖E a‖_{2p}` with respect to `conj(a)`, up to a positive factor.
fn grad_log_lp(e: &CMatrix, v: &[Complex64], sel: &[usize]) -> Vec<Complex64> {
    let m = sel.iter().map(|&i| v[i].norm()).fold(0.0, f64::max);
    let mut g = vec![Complex64::new(0.0, 0.0); e.ncols()];
    if m == 0.0 {
        return g;
    }
    let mut s = 0.0;
    for &i in sel {
        let u = v[i] / m;
        let w = u.norm().powi(2 * SURROGATE_P - 2);
        s += u.norm().powi(2 * SURROGATE_P);
        for j in 0..e.ncols() {
            g[j] += e[(i, j)].conj() * u * w;
        }
    }
    g.iter().map(|z| z / (s * m)).collect()
}

fn sup_ratio(v: &[Complex64], inner: &[usize]) -> (f64, f64) {
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let small = inner.iter().map(|&i| v[i].norm()).fold(0.0, f64::max);
    (big, small)
}

fn normalise(a: &mut [Complex64]) {
    let n = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in a.iter_mut() {
        *z /= n;
    }
}

/// True sup ratio of `κ = Σ a_j e_j` on the evaluation points.
pub fn ratio_of(subspace: &SpectralSubspace, pts: &BallPoints, a: &[Complex64]) -> Result<f64> {
    let e = subspace.sample_matrix(&pts.points)?;
    let v: Vec<Complex64> = (&e * crate::linalg::CVector::from_column_slice(a)).iter().copied().collect();
    let inner: Vec<usize> = (0..v.len()).filter(|&i| pts.inner[i]).collect();
    let (big, small) = sup_ratio(&v, &inner);
    Ok(big / small)
}

/// Largest doubling ratio found over the subspace.
pub fn doubling_ratio(subspace: &SpectralSubspace, center: &GroupPoint, spec: &DoublingSpec) -> Result<DoublingResult> {
    if subspace.is_empty() {
        return Err(Error::Degenerate("empty subspace".into()));
    }
    if spec.trials == 0 {
        return Err(Error::Parameter("doubling needs at least one trial".into()));
    }
    let pts = ball_points(subspace.backend, center, spec.radius, spec.density)?;
    let e = subspace.sample_matrix(&pts.points)?;
    let all: Vec<usize> = (0..pts.points.len()).collect();
    let inner: Vec<usize> = all.iter().copied().filter(|&i| pts.inner[i]).collect();
    let n = subspace.len();
    let eval = |a: &[Complex64]| -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); e.nrows()];
        for (i, vi) in v.iter_mut().enumerate() {
            for j in 0..n {
                *vi += e[(i, j)] * a[j];
            }
        }
        v
    };
    let results: Vec<Option<(f64, Vec<Complex64>)>> = (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(mix(spec.seed ^ t as u64), TAG_DOUBLING);
            let mut a: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            normalise(&mut a);
            let surrogate = |v: &[Complex64]| log_lp(v, &all) - log_lp(v, &inner);
            let mut v = eval(&a);
            let mut f = surrogate(&v);
            let mut step = 1.0;
            for _ in 0..spec.ascent_steps {
                let gb = grad_log_lp(&e, &v, &all);
                let gs = grad_log_lp(&e, &v, &inner);
                let g: Vec<Complex64> = gb.iter().zip(&gs).map(|(x, y)| x - y).collect();
                let gn = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if !(gn > 1e-14) {
                    break;
                }
                let mut accepted = false;
                for _ in 0..30 {
                    let mut trial: Vec<Complex64> = a.iter().zip(&g).map(|(x, y)| x + y * (step / gn)).collect();
                    normalise(&mut trial);
                    let tv = eval(&trial);
                    let tf = surrogate(&tv);
                    if tf > f {
                        a = trial;
                        v = tv;
                        f = tf;
                        step *= 2.0;
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            let (big, small) = sup_ratio(&v, &inner);
            if small < 1e-300 || !big.is_finite() {
                None
            } else {
                Some((big / small, a))
            }
        })
        .collect();
    let discarded = results.iter().filter(|r| r.is_none()).count();
    let (ratio, coefficients) = results
        .into_iter()
        .flatten()
        .max_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal))
        .ok_or_else(|| Error::Numerical("every doubling trial vanished on the inner ball".into()))?;
    Ok(DoublingResult {
        ratio,
        coefficients,
        trials_used: spec.trials - discarded,
        discarded,
        eval_points: pts.points.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingScan {
    pub lambdas: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Envelope of `ln ratio` against `λ`.
    pub fit: ExpFit,
}

/// Doubling ratios for each cut in `lambdas`, from one enclosing subspace.
pub fn doubling_scan(
    subspace: &SpectralSubspace,
    lambdas: &[f64],
    center: &GroupPoint,
    spec: &DoublingSpec,
) -> Result<DoublingScan> {
    let mut ratios = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        if l > subspace.lambda_cut * (1.0 + 1e-12) {
            return Err(Error::Parameter(format!(
                "cut {l} exceeds the subspace cut {}",
                subspace.lambda_cut
            )));
        }
        ratios.push(doubling_ratio(&subspace.truncate(l), center, spec)?.ratio);
    }
    let logs: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let fit = fit_envelope(lambdas, &logs)?;
    Ok(DoublingScan {
        lambdas: lambdas.to_vec(),
        ratios,
        fit,
    })
}
