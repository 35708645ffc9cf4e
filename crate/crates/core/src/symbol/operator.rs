//! Hermitian Fourier multipliers `σ(ξ)` and their spectral calculus.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{DualIndex, DualLabel, FourierCoefficients, GroupBackend};
use crate::linalg::{hermitian_defect, hermitian_eigen, max_entry_diff, CMatrix};
use crate::rng;

/// Tolerance for Hermitian symmetry and positivity of stored symbols.
pub const SYMBOL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Preset {
    /// `σ(ξ) = λ_ξ^{m/2} I`
    LaplacianPower,
    /// `σ(ξ) = (c + λ_ξ)^{m/2} I`
    ShiftedPower,
    /// `σ(ξ) = (c + λ_ξ)^{m/2} diag(1 + η v_i)`
    DiagPerturbed,
}

impl Preset {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "laplacian_power" => Ok(Preset::LaplacianPower),
            "shifted_power" => Ok(Preset::ShiftedPower),
            "diag_perturbed" => Ok(Preset::DiagPerturbed),
            other => Err(Error::Config(format!(
                "unknown operator preset '{other}' (expected laplacian_power, shifted_power or diag_perturbed)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::LaplacianPower => "laplacian_power",
            Preset::ShiftedPower => "shifted_power",
            Preset::DiagPerturbed => "diag_perturbed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorParams {
    pub m: f64,
    pub c: f64,
    pub eta: f64,
    pub seed: u64,
}

impl Default for OperatorParams {
    fn default() -> Self {
        OperatorParams {
            m: 2.0,
            c: 1.0,
            eta: 0.0,
            seed: 0,
        }
    }
}

/// Per-representation eigendecomposition `σ(ξ) = U D U*`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// A positive Hermitian matrix-valued Fourier multiplier of order `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOperator {
    pub backend: GroupBackend,
    pub duals: Vec<DualIndex>,
    pub symbol: BTreeMap<DualLabel, CMatrix>,
    pub eigen: BTreeMap<DualLabel, SymbolEigen>,
    pub order: f64,
    pub positivity_floor: f64,
}

impl SpectralOperator {
    /// Build from an explicit table; checks symmetry and positivity and sets
    /// the floor to the smallest eigenvalue found.
    pub fn from_table(backend: GroupBackend, order: f64, table: Vec<(DualIndex, CMatrix)>) -> Result<Self> {
        if !(order > 0.0) {
            return Err(Error::Parameter(format!("order m must be positive, got {order}")));
        }
        let mut duals = Vec::with_capacity(table.len());
        let mut symbol = BTreeMap::new();
        let mut eigen = BTreeMap::new();
        let mut floor = f64::INFINITY;
        for (d, m) in table {
            if m.nrows() != d.dim || m.ncols() != d.dim {
                return Err(Error::Dimension {
                    expected: d.dim,
                    got: m.nrows(),
                });
            }
            let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
            if hermitian_defect(&m) > SYMBOL_TOL * scale {
                return Err(Error::Parameter(format!("symbol at {} is not Hermitian", d.label)));
            }
            let (values, vectors) = hermitian_eigen(&m);
            if values[0] < -SYMBOL_TOL * scale {
                return Err(Error::Parameter(format!(
                    "symbol at {} has negative eigenvalue {}",
                    d.label, values[0]
                )));
            }
            floor = floor.min(values[0].max(0.0));
            eigen.insert(d.label.clone(), SymbolEigen { values, vectors });
            symbol.insert(d.label.clone(), m);
            duals.push(d);
        }
        if duals.is_empty() {
            floor = 0.0;
        }
        Ok(SpectralOperator {
            backend,
            duals,
            symbol,
            eigen,
            order,
            positivity_floor: floor,
        })
    }

    pub fn get(&self, label: &DualLabel) -> Result<&CMatrix> {
        self.symbol.get(label).ok_or_else(|| Error::Coverage(label.to_string()))
    }

    pub fn eigen_of(&self, label: &DualLabel) -> Result<&SymbolEigen> {
        self.eigen.get(label).ok_or_else(|| Error::Coverage(label.to_string()))
    }

    pub fn max_bracket(&self) -> f64 {
        self.duals.iter().map(|d| d.bracket).fold(1.0, f64::max)
    }
}

fn label_key(label: &DualLabel) -> u64 {
    match label {
        DualLabel::Torus(k) => k
            .iter()
            .fold(rng::mix(k.len() as u64), |h, &v| rng::mix(h ^ v as u64)),
        DualLabel::Spin(t) => rng::mix(0x5350_494e ^ *t as u64),
    }
}

/// Instantiate a preset on the given representations.
pub fn make_operator(
    backend: GroupBackend,
    preset: Preset,
    params: OperatorParams,
    duals: &[DualIndex],
) -> Result<SpectralOperator> {
    let OperatorParams { m, c, eta, seed } = params;
    if !(m > 0.0) {
        return Err(Error::Parameter(format!("order m must be positive, got {m}")));
    }
    if preset != Preset::LaplacianPower && !(c >= 0.0) {
        return Err(Error::Parameter(format!("shift c must be nonnegative, got {c}")));
    }
    if preset == Preset::DiagPerturbed && !(eta.abs() < 0.5) {
        return Err(Error::Parameter(format!("|eta| must be < 1/2, got {eta}")));
    }
    let table = duals
        .iter()
        .map(|d| {
            let mat = match preset {
                Preset::LaplacianPower => {
                    CMatrix::identity(d.dim, d.dim) * Complex64::new(d.laplace_eig.powf(0.5 * m), 0.0)
                }
                Preset::ShiftedPower => {
                    CMatrix::identity(d.dim, d.dim) * Complex64::new((c + d.laplace_eig).powf(0.5 * m), 0.0)
                }
                Preset::DiagPerturbed => {
                    let base = (c + d.laplace_eig).powf(0.5 * m);
                    let mut r = rng::stream(seed ^ label_key(&d.label), rng::TAG_OPERATOR);
                    let mut mat = CMatrix::zeros(d.dim, d.dim);
                    for i in 0..d.dim {
                        let v: f64 = r.gen_range(-1.0..=1.0);
                        mat[(i, i)] = Complex64::new(base * (1.0 + eta * v), 0.0);
                    }
                    mat
                }
            };
            (d.clone(), mat)
        })
        .collect();
    let mut op = SpectralOperator::from_table(backend, m, table)?;
    // report the analytic floor rather than the enumerated minimum
    op.positivity_floor = match preset {
        Preset::LaplacianPower => 0.0,
        Preset::ShiftedPower => c.powf(0.5 * m),
        Preset::DiagPerturbed => c.powf(0.5 * m) * (1.0 - eta.abs()),
    }
    .min(op.positivity_floor);
    Ok(op)
}

/// `f̂(ξ) ↦ σ(ξ) f̂(ξ)`
pub fn apply_operator(op: &SpectralOperator, coeffs: &FourierCoefficients) -> Result<FourierCoefficients> {
    let mut out = FourierCoefficients::new();
    for (label, f) in &coeffs.entries {
        let s = op.get(label)?;
        out.insert(label.clone(), s * f);
    }
    Ok(out)
}

/// A general (not necessarily Hermitian) matrix multiplier.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Multiplier {
    pub entries: BTreeMap<DualLabel, CMatrix>,
}

impl Multiplier {
    pub fn identity(duals: &[DualIndex]) -> Self {
        Multiplier {
            entries: duals
                .iter()
                .map(|d| (d.label.clone(), CMatrix::identity(d.dim, d.dim)))
                .collect(),
        }
    }

    pub fn of_operator(op: &SpectralOperator) -> Self {
        Multiplier {
            entries: op.symbol.clone(),
        }
    }

    /// Pointwise product `(self · other)(ξ)`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (l, a) in &self.entries {
            let b = other.entries.get(l).ok_or_else(|| Error::Coverage(l.to_string()))?;
            entries.insert(l.clone(), a * b);
        }
        Ok(Multiplier { entries })
    }

    pub fn apply(&self, coeffs: &FourierCoefficients) -> Result<FourierCoefficients> {
        let mut out = FourierCoefficients::new();
        for (label, f) in &coeffs.entries {
            let s = self.entries.get(label).ok_or_else(|| Error::Coverage(label.to_string()))?;
            out.insert(label.clone(), s * f);
        }
        Ok(out)
    }

    /// Largest entrywise difference, and the same relative to the entry scale
    /// of `self` at each representation.
    pub fn max_diff(&self, other: &Self) -> Result<(f64, f64)> {
        let mut abs = 0.0f64;
        let mut rel = 0.0f64;
        for (l, a) in &self.entries {
            let b = other.entries.get(l).ok_or_else(|| Error::Coverage(l.to_string()))?;
            let d = max_entry_diff(a, b);
            let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
            abs = abs.max(d);
            if scale > 0.0 {
                rel = rel.max(d / scale);
            } else {
                rel = rel.max(d);
            }
        }
        Ok((abs, rel))
    }
}

/// Spectral power `σ(ξ)^z = U D^z U*` on every representation.
///
/// Zero eigenvalues are sent to zero for `Re z ≥ 0` (the kernel projection is
/// dropped, so `z = 0` gives `I - P_0`) and are rejected for `Re z < 0`.
pub fn direct_power(op: &SpectralOperator, z: Complex64) -> Result<Multiplier> {
    let mut entries = BTreeMap::new();
    for d in &op.duals {
        let e = op.eigen_of(&d.label)?;
        let scale = e.values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let powers: Vec<Complex64> = e
            .values
            .iter()
            .map(|&v| {
                if v <= SYMBOL_TOL * scale {
                    if z.re < 0.0 {
                        Err(Error::SingularPower {
                            label: d.label.to_string(),
                            re: z.re,
                        })
                    } else {
                        Ok(Complex64::new(0.0, 0.0))
                    }
                } else {
                    Ok((z * v.ln()).exp())
                }
            })
            .collect::<Result<_>>()?;
        let u = &e.vectors;
        let mut scaled = u.clone();
        for (j, p) in powers.iter().enumerate() {
            let mut col = scaled.column_mut(j);
            col *= *p;
        }
        entries.insert(d.label.clone(), scaled * u.adjoint());
    }
    Ok(Multiplier { entries })
}
