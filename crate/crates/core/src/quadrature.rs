//! One-dimensional Gauss–Legendre rules and composite/mirrored time grids.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
///
/// Nodes are found by Newton iteration on the three-term Legendre recurrence
/// and placed symmetrically: `x[i] == -x[n - 1 - i]` bit for bit.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "gauss_legendre needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess for the i-th largest root
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[n - 1 - i] = z;
        x[i] = -z;
        w[n - 1 - i] = weight;
        w[i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A one-dimensional quadrature rule on a time interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TimeGrid {
    /// Gauss–Legendre with `n` nodes on `[a, b]`.
    pub fn gauss(a: f64, b: f64, n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        TimeGrid {
            nodes: x.iter().map(|xi| mid + half * xi).collect(),
            weights: w.iter().map(|wi| half * wi).collect(),
        }
    }

    /// Composite Gauss–Legendre over consecutive breakpoints, with
    /// `nodes_per_unit` nodes per unit length (at least `min_nodes` per panel).
    pub fn composite(breaks: &[f64], nodes_per_unit: usize, min_nodes: usize) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::Parameter("composite grid needs two breakpoints".into()));
        }
        let mut grid = TimeGrid {
            nodes: Vec::new(),
            weights: Vec::new(),
        };
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b < a {
                return Err(Error::Parameter(format!("breakpoints not increasing: {a} > {b}")));
            }
            if b == a {
                continue;
            }
            let n = ((b - a) * nodes_per_unit as f64).ceil() as usize;
            let panel = TimeGrid::gauss(a, b, n.max(min_nodes).max(1));
            grid.nodes.extend(panel.nodes);
            grid.weights.extend(panel.weights);
        }
        Ok(grid)
    }

    /// Grid on `[-h, h]` built from a composite grid on `[0, h]` and its mirror
    /// image, so that `nodes[i] == -nodes[n-1-i]` and the weights coincide.
    pub fn mirrored(positive_breaks: &[f64], nodes_per_unit: usize, min_nodes: usize) -> Result<Self> {
        if positive_breaks.first() != Some(&0.0) {
            return Err(Error::Parameter("mirrored grid breakpoints must start at 0".into()));
        }
        let half = TimeGrid::composite(positive_breaks, nodes_per_unit, min_nodes)?;
        let mut nodes: Vec<f64> = half.nodes.iter().rev().map(|t| -t).collect();
        let mut weights: Vec<f64> = half.weights.iter().rev().copied().collect();
        nodes.extend_from_slice(&half.nodes);
        weights.extend_from_slice(&half.weights);
        Ok(TimeGrid { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True when nodes are mirror images of each other with equal weights.
    pub fn is_mirrored(&self) -> bool {
        let n = self.nodes.len();
        (0..n).all(|i| {
            self.nodes[i] == -self.nodes[n - 1 - i] && self.weights[i] == self.weights[n - 1 - i]
        })
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}
