//! Null controls for `u' + A^α u = 1_ω g` on spectral subspaces.

pub mod hum;
pub mod lr;
pub mod scan;

pub use hum::{
    control_coefficients, control_gramian, control_gramian_quadrature, cross_gramian, duality_check,
    heat_propagate, hum_control, observability_cost, ControlProblem, ControlResult, Duality, ObservabilityCost,
    COND_LIMIT, DEFAULT_TOL, EXPORT_SAMPLES,
};
pub use lr::{lr_scheme, LrReport, LrStage};
pub use scan::{cost_scan, CostFit, CostRow};
