//! Space-time extension of eigenfunction sums, the plateau cutoff, and the
//! identities and bounds used around them.

pub mod bounds;
pub mod cutoff;
pub mod field;
pub mod interpolation;

pub use bounds::{check_spacetime_bounds, SpacetimeBounds};
pub use cutoff::{bump_e, cutoff_check, derive_eta_coeffs, eta_tilde, printed_eta_coeffs, CutoffRow, CutoffSpec};
pub use field::{
    check_cancellation, check_symmetry, sinh_extension, CancellationReport, CutoffField, FieldMode, Profile,
    SpaceTimeField,
};
pub use interpolation::{interpolation_row, interpolation_study, kappa_star, InterpolationRow, InterpolationStudy};
