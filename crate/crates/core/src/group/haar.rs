//! Product quadrature rules for normalised Haar measure.
//!
//! Torus resolution `N` is the uniform `N^n` grid. It integrates
//! `e^{2πi k·x}` exactly whenever every `|k_i| ≤ N - 1`, so a product of two
//! characters is exact when their degrees sum to at most `N - 1`.
//!
//! SU(2) resolution `R` uses `R + 1` uniform nodes in `α`, `2R + 1` uniform
//! nodes in `γ` and `⌈(R + 1)/2⌉` Gauss–Legendre nodes in `cos β`. Products
//! `D^{ℓ1}_{mn} conj(D^{ℓ2}_{m'n'})` are exact whenever `ℓ1 + ℓ2 ≤ R`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::group::{EulerAngles, GroupBackend, GroupPoint};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub backend: GroupBackend,
    pub resolution: usize,
    pub nodes: Vec<GroupPoint>,
    pub weights: Vec<f64>,
    /// Largest `deg(a) + deg(b)` for which products of entries are exact,
    /// in the units of [`crate::group::DualLabel::band_degree`].
    pub pair_limit: usize,
}

impl QuadratureGrid {
    pub fn new(backend: GroupBackend, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Parameter(format!("resolution must be >= 2, got {resolution}")));
        }
        match backend {
            GroupBackend::Torus(n) => {
                let total = resolution.pow(n as u32);
                let w = 1.0 / total as f64;
                let nodes = (0..total)
                    .map(|idx| {
                        let mut rem = idx;
                        let mut x = vec![0.0; n];
                        for slot in x.iter_mut().rev() {
                            *slot = (rem % resolution) as f64 / resolution as f64;
                            rem /= resolution;
                        }
                        GroupPoint::Torus(x)
                    })
                    .collect();
                Ok(QuadratureGrid {
                    backend,
                    resolution,
                    nodes,
                    weights: vec![w; total],
                    pair_limit: resolution - 1,
                })
            }
            GroupBackend::Su2 => {
                let n_alpha = resolution + 1;
                let n_gamma = 2 * resolution + 1;
                let n_beta = (resolution + 1).div_ceil(2);
                let (x, w) = gauss_legendre(n_beta);
                let mut nodes = Vec::with_capacity(n_alpha * n_beta * n_gamma);
                let mut weights = Vec::with_capacity(n_alpha * n_beta * n_gamma);
                for ia in 0..n_alpha {
                    let alpha = 2.0 * PI * ia as f64 / n_alpha as f64;
                    for (xb, wb) in x.iter().zip(&w) {
                        let beta = xb.clamp(-1.0, 1.0).acos();
                        for ig in 0..n_gamma {
                            let gamma = 4.0 * PI * ig as f64 / n_gamma as f64;
                            nodes.push(GroupPoint::Euler(EulerAngles::new(alpha, beta, gamma)));
                            weights.push(0.5 * wb / (n_alpha * n_gamma) as f64);
                        }
                    }
                }
                Ok(QuadratureGrid {
                    backend,
                    resolution,
                    nodes,
                    weights,
                    pair_limit: 2 * resolution,
                })
            }
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Refuse a product integral of degrees `a` and `b` beyond the exact range.
    pub fn check_pair(&self, what: &str, a: usize, b: usize) -> Result<()> {
        if a + b > self.pair_limit {
            return Err(Error::BandLimit {
                what: what.to_string(),
                needed: a + b,
                supported: self.pair_limit,
            });
        }
        Ok(())
    }
}
