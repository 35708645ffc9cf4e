//! Short-time growth of the observability cost, `C_T ≤ C1 e^{C2 T^{-β}}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::control::hum::{observability_cost, ControlProblem};
use crate::error::{Error, Result};
use crate::spectral::{fit_envelope, ExpFit};

pub const BETA_POINTS: usize = 64;
pub const MIN_VALID_ROWS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostRow {
    pub t: f64,
    pub c_t: f64,
    pub cond: f64,
    /// `ok`, `non_monotone` or `ill_conditioned`
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostFit {
    pub rows: Vec<CostRow>,
    pub beta_hat: f64,
    pub r_squared: f64,
    pub beta_range: (f64, f64),
    pub envelope: ExpFit,
    /// `ln C_T ≤ ln C1 + C2 T^{-β̂}` on every valid row.
    pub envelope_holds: bool,
    pub alpha: f64,
    pub order: f64,
}

impl CostFit {
    pub fn valid(&self) -> impl Iterator<Item = &CostRow> {
        self.rows.iter().filter(|r| r.flag == "ok")
    }
}

fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    if sxx == 0.0 {
        return 0.0;
    }
    (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
}

/// `C_T` on `t_grid`, a least-squares `β̂` on `[0.5, 4]/(αm - 1)` and the
/// tightest envelope at `β̂`.
pub fn cost_scan(problem: &ControlProblem, t_grid: &[f64]) -> Result<CostFit> {
    let excess = problem.alpha * problem.order - 1.0;
    if !(excess > 0.0) {
        return Err(Error::Parameter(format!(
            "cost fit needs alpha * m > 1, got {}",
            problem.alpha * problem.order
        )));
    }
    let mut ts = t_grid.to_vec();
    if ts.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Parameter("horizons must be positive".into()));
    }
    ts.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let costs: Vec<(f64, std::result::Result<(f64, f64), f64>)> = ts
        .par_iter()
        .map(|&t| {
            let p = problem.with_horizon(t)?;
            Ok(match observability_cost(&p) {
                Ok(o) => (t, Ok((o.c_t, o.cond))),
                Err(Error::IllConditioned { cond, .. }) => (t, Err(cond)),
                Err(e) => return Err(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(costs.len());
    let mut last = f64::NEG_INFINITY;
    for (t, c) in costs {
        rows.push(match c {
            Ok((c_t, cond)) => {
                let flag = if c_t.is_finite() && c_t > last {
                    last = c_t;
                    "ok"
                } else {
                    "non_monotone"
                };
                CostRow { t, c_t, cond, flag: flag.into() }
            }
            Err(cond) => CostRow {
                t,
                c_t: f64::NAN,
                cond,
                flag: "ill_conditioned".into(),
            },
        });
    }
    let valid: Vec<&CostRow> = rows.iter().filter(|r| r.flag == "ok").collect();
    if valid.len() < MIN_VALID_ROWS {
        return Err(Error::Degenerate(format!(
            "{} valid cost rows, need {MIN_VALID_ROWS}",
            valid.len()
        )));
    }
    let ys: Vec<f64> = valid.iter().map(|r| r.c_t.ln()).collect();
    let (lo, hi) = (0.5 / excess, 4.0 / excess);
    let mut best = (lo, f64::NEG_INFINITY);
    for i in 0..BETA_POINTS {
        let beta = lo + (hi - lo) * i as f64 / (BETA_POINTS - 1) as f64;
        let xs: Vec<f64> = valid.iter().map(|r| r.t.powf(-beta)).collect();
        let r2 = r_squared(&xs, &ys);
        if r2 > best.1 + 1e-12 {
            best = (beta, r2);
        }
    }
    let xs: Vec<f64> = valid.iter().map(|r| r.t.powf(-best.0)).collect();
    let envelope = fit_envelope(&xs, &ys)?;
    let envelope_holds = envelope.residuals.iter().all(|r| *r >= -1e-12 * (1.0 + envelope.log_c1.abs()));
    Ok(CostFit {
        rows,
        beta_hat: best.0,
        r_squared: best.1,
        beta_range: (lo, hi),
        envelope,
        envelope_holds,
        alpha: problem.alpha,
        order: problem.order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::test_support::torus_problem_alpha;
    use crate::linalg::CMatrix;
    use num_complex::Complex64;

    const GRID: [f64; 5] = [0.8, 0.4, 0.2, 0.1, 0.05];

    #[test]
    fn single_mode_closed_form() {
        let p = ControlProblem::from_parts(
            vec![1.0],
            vec![0.0],
            CMatrix::identity(1, 1),
            1.0,
            vec![Complex64::new(1.0, 0.0)],
            1.0,
            2.0,
        )
        .unwrap();
        let fit = cost_scan(&p, &GRID).unwrap();
        for r in &fit.rows {
            let exact = (-r.t).exp() / ((1.0 - (-2.0 * r.t).exp()) / 2.0).sqrt();
            assert!((r.c_t - exact).abs() < 1e-12 * exact);
        }
        assert!(fit.envelope_holds);
    }

    #[test]
    fn torus_scan_is_monotone_with_envelope() {
        let p = torus_problem_alpha(3, (0.0, 0.3), false, 1.0, 1.0);
        let fit = cost_scan(&p, &GRID).unwrap();
        assert!(fit.rows.iter().all(|r| r.flag == "ok"), "{:?}", fit.rows);
        assert!(fit.rows.windows(2).all(|w| w[1].c_t > w[0].c_t));
        assert!(fit.envelope_holds);
        assert!(fit.envelope.c2 >= 0.0);
    }

    #[test]
    fn steeper_near_threshold() {
        let a = cost_scan(&torus_problem_alpha(3, (0.0, 0.3), false, 1.0, 0.6), &GRID).unwrap();
        let b = cost_scan(&torus_problem_alpha(3, (0.0, 0.3), false, 1.0, 1.0), &GRID).unwrap();
        assert!(a.beta_hat > b.beta_hat, "{} vs {}", a.beta_hat, b.beta_hat);
    }

    #[test]
    fn subcritical_is_refused() {
        let p = torus_problem_alpha(1, (0.0, 0.3), false, 1.0, 0.5);
        assert!(p.subcritical);
        assert!(cost_scan(&p, &GRID).is_err());
        assert!(cost_scan(&torus_problem_alpha(1, (0.0, 0.3), false, 1.0, 1.0), &GRID[..3]).is_err());
    }
}
