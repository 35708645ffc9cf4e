//! Spectral subspaces, observability constants on open sets and doubling
//! ratios, with affine envelope fits of their logarithms.

pub mod doubling;
pub mod extended;
pub mod fit;
pub mod gram;
pub mod subspace;

pub use doubling::{doubling_ratio, doubling_scan, DoublingResult, DoublingScan, DoublingSpec};
pub use extended::{extended_lambda_min, ExtendedEigen};
pub use fit::{fit_envelope, fit_spectral_constants, fit_spectral_constants_log10, ExpFit};
pub use gram::{gram_closed_form, gram_on_set, gram_quadrature, loewner_gap, observability_constant, rayleigh_check, Observability};
pub use subspace::{build_subspace, enumeration_bound, operator_for_cut, Mode, SpectralSubspace};
