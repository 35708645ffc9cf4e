//! Numerical estimation of toroidal symbol-class constants on `T^1 × Z`.
//!
//! `C_{α,β} = max (w(k))^{-m + ρα - δβ} |Δ_k^α ∂_x^β a(x, k)|` over a uniform
//! `x` grid and `|k| ≤ K`, where `Δ_k` is the forward difference in `k` and
//! `∂_x` is an eighth-order periodic central difference.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Weight `w(k)` used in the class inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BracketWeight {
    /// `1 + |k|`
    Lattice,
    /// `⟨k⟩ = (1 + 4π²k²)^{1/2}`, the Laplacian bracket of `T^1`.
    Laplacian,
}

impl BracketWeight {
    pub fn eval(&self, k: i64) -> f64 {
        match self {
            BracketWeight::Lattice => 1.0 + k.unsigned_abs() as f64,
            BracketWeight::Laplacian => (1.0 + 4.0 * std::f64::consts::PI.powi(2) * (k * k) as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolClassSpec {
    pub m: f64,
    pub rho: f64,
    pub delta: f64,
    pub max_order: usize,
    /// Largest `|k|`; the divergence check also evaluates `2K`.
    pub k_max: i64,
    pub x_points: usize,
    pub weight: BracketWeight,
}

impl Default for SymbolClassSpec {
    fn default() -> Self {
        SymbolClassSpec {
            m: 0.0,
            rho: 1.0,
            delta: 0.0,
            max_order: 3,
            k_max: 256,
            x_points: 256,
            weight: BracketWeight::Lattice,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolClassReport {
    /// `table[α][β]` at `|k| ≤ 2K`.
    pub table: Vec<Vec<f64>>,
    /// The same table restricted to `|k| ≤ K`.
    pub table_half: Vec<Vec<f64>>,
    /// Rounding-level bound for each entry; entries below it carry no
    /// information about growth.
    pub noise_floor: Vec<Vec<f64>>,
    /// Some entry above its noise floor grew by more than 1% between `K`
    /// and `2K`.
    pub diverging: bool,
}

/// Finite-difference weights for the `order`-th derivative at 0 on the given
/// integer offsets (Fornberg's recursion, unit spacing).
pub fn fd_weights(order: usize, offsets: &[f64]) -> Vec<f64> {
    let n = offsets.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[order]).collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Estimate the class constants of `a(x, k)` up to `max_order` in both
/// indices.
pub fn check_symbol_class(a: impl Fn(f64, i64) -> Complex64 + Sync, spec: &SymbolClassSpec) -> Result<SymbolClassReport> {
    if spec.max_order > 3 {
        return Err(Error::UnsupportedOrder(spec.max_order));
    }
    if !(0.0..=1.0).contains(&spec.rho) || !(0.0..=1.0).contains(&spec.delta) {
        return Err(Error::Parameter("rho and delta must lie in [0, 1]".into()));
    }
    if spec.k_max < 1 || spec.x_points < 16 {
        return Err(Error::Parameter("need k_max >= 1 and at least 16 x points".into()));
    }
    let order = spec.max_order;
    let nx = spec.x_points;
    let h = 1.0 / nx as f64;
    let kk = 2 * spec.k_max;
    // k from -kk to kk + order
    let ks: Vec<i64> = (-kk..=kk + order as i64).collect();
    let samples: Vec<Vec<Complex64>> = {
        use rayon::prelude::*;
        ks.par_iter()
            .map(|&k| (0..nx).map(|i| a(i as f64 * h, k)).collect())
            .collect()
    };
    // x-derivative stencils
    let stencils: Vec<(Vec<i64>, Vec<f64>)> = (0..=order)
        .map(|beta| {
            if beta == 0 {
                return (vec![0], vec![1.0]);
            }
            let p: i64 = if beta >= 3 { 5 } else { 4 };
            let offs: Vec<i64> = (-p..=p).collect();
            let w = fd_weights(beta, &offs.iter().map(|&o| o as f64).collect::<Vec<_>>());
            (offs, w.iter().map(|v| v / h.powi(beta as i32)).collect())
        })
        .collect();
    let mut table = vec![vec![0.0f64; order + 1]; order + 1];
    let mut table_half = vec![vec![0.0f64; order + 1]; order + 1];
    let mut noise_floor = vec![vec![0.0f64; order + 1]; order + 1];
    let row_scale: Vec<f64> = samples
        .iter()
        .map(|row| row.iter().map(|z| z.norm()).fold(0.0, f64::max))
        .collect();
    for (beta, (offs, w)) in stencils.iter().enumerate() {
        let stencil_l1: f64 = w.iter().map(|v| v.abs()).sum();
        // ∂_x^β a on every k row
        let dx: Vec<Vec<Complex64>> = samples
            .iter()
            .map(|row| {
                (0..nx)
                    .map(|i| {
                        offs.iter()
                            .zip(w)
                            .map(|(&o, &wi)| row[(i as i64 + o).rem_euclid(nx as i64) as usize] * wi)
                            .sum()
                    })
                    .collect()
            })
            .collect();
        for alpha in 0..=order {
            let coeffs: Vec<f64> = (0..=alpha)
                .map(|j| {
                    let s = if (alpha - j) % 2 == 0 { 1.0 } else { -1.0 };
                    s * binomial(alpha, j)
                })
                .collect();
            let expo = -spec.m + spec.rho * alpha as f64 - spec.delta * beta as f64;
            for (idx, &k) in ks.iter().enumerate() {
                if k > kk {
                    break;
                }
                let wk = spec.weight.eval(k).powf(expo);
                let mut row_max = 0.0f64;
                for i in 0..nx {
                    let v: Complex64 = coeffs.iter().enumerate().map(|(j, c)| dx[idx + j][i] * c).sum();
                    row_max = row_max.max(v.norm());
                }
                let val = wk * row_max;
                let scale = row_scale[idx..=idx + alpha].iter().fold(0.0f64, |a, &b| a.max(b));
                let noise = 64.0 * f64::EPSILON * scale * stencil_l1 * 2f64.powi(alpha as i32) * wk;
                noise_floor[alpha][beta] = noise_floor[alpha][beta].max(noise);
                table[alpha][beta] = table[alpha][beta].max(val);
                if k.abs() <= spec.k_max {
                    table_half[alpha][beta] = table_half[alpha][beta].max(val);
                }
            }
        }
    }
    let diverging = table
        .iter()
        .flatten()
        .zip(table_half.iter().flatten())
        .zip(noise_floor.iter().flatten())
        .any(|((full, half), noise)| *full > 1.01 * *half && *full > *noise);
    Ok(SymbolClassReport {
        table,
        table_half,
        noise_floor,
        diverging,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn fornberg_matches_known_stencils() {
        let offs: Vec<f64> = (-4..=4).map(|v| v as f64).collect();
        let w1 = fd_weights(1, &offs);
        let expected = [1.0 / 280.0, -4.0 / 105.0, 0.2, -0.8, 0.0, 0.8, -0.2, 4.0 / 105.0, -1.0 / 280.0];
        for (a, b) in w1.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        let w2 = fd_weights(2, &offs);
        assert!((w2[4] + 205.0 / 72.0).abs() < 1e-13);
    }

    #[test]
    fn pure_oscillation() {
        let spec = SymbolClassSpec { k_max: 8, ..Default::default() };
        let r = check_symbol_class(|x, _| Complex64::from_polar(1.0, 2.0 * PI * x), &spec).unwrap();
        for beta in 0..=3 {
            let expected = (2.0 * PI).powi(beta as i32);
            assert!((r.table[0][beta] - expected).abs() < 1e-8 * expected, "beta={beta} {}", r.table[0][beta]);
        }
        assert!(!r.diverging);
    }

    #[test]
    fn laplacian_symbol_is_order_two() {
        let a = |_: f64, k: i64| Complex64::new(1.0 + 4.0 * PI * PI * (k * k) as f64, 0.0);
        let spec = SymbolClassSpec {
            m: 2.0,
            k_max: 64,
            weight: BracketWeight::Laplacian,
            ..Default::default()
        };
        let r = check_symbol_class(a, &spec).unwrap();
        assert!(r.table[0][0] <= 1.0 + 1e-12);
        assert!(r.table.iter().flatten().all(|v| v.is_finite()));
        assert!(!r.diverging);
        // the lattice weight gives the same class with a larger constant
        let lattice = check_symbol_class(a, &SymbolClassSpec { weight: BracketWeight::Lattice, ..spec }).unwrap();
        assert!(lattice.table[0][0] < 4.0 * PI * PI);
    }

    #[test]
    fn wrong_order_diverges() {
        let a = |_: f64, k: i64| Complex64::new((k * k) as f64, 0.0);
        let spec = SymbolClassSpec { m: 1.0, k_max: 32, ..Default::default() };
        assert!(check_symbol_class(a, &spec).unwrap().diverging);
    }

    #[test]
    fn order_above_three_rejected() {
        let spec = SymbolClassSpec { max_order: 4, ..Default::default() };
        assert!(matches!(check_symbol_class(|_, _| Complex64::new(1.0, 0.0), &spec), Err(Error::UnsupportedOrder(4))));
    }
}
