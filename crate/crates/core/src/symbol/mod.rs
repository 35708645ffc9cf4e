//! Positive elliptic Fourier multipliers, sector resolvent bounds, complex
//! powers and symbol-class estimates.

pub mod class;
pub mod contour;
pub mod ellipticity;
pub mod operator;

pub use class::{check_symbol_class, BracketWeight, SymbolClassReport, SymbolClassSpec};
pub use contour::{contour_power, contour_power_symbol, ContourSpec};
pub use ellipticity::{
    check_ellipticity, check_parameter_ellipticity, resolvent_order_bound, Ellipticity, ParameterEllipticity, Sector,
};
pub use operator::{
    apply_operator, direct_power, make_operator, Multiplier, OperatorParams, Preset, SpectralOperator, SymbolEigen,
};
