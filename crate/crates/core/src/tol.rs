//! Numeric tolerances used throughout the crate.
//!
//! The piecewise-linear calculus is exact, so tolerances only enter where two
//! independently computed real numbers are compared or where a fixed point is
//! located by bisection.

/// Absolute tolerance for comparing two independently computed reals.
pub const ABS_TOL: f64 = 1e-12;

/// Target bracket width for scalar fixed-point bisections.
pub const BISECT_TOL: f64 = 1e-13;

/// Maximum bisection iterations before giving up.
pub const BISECT_MAX_ITERS: usize = 200;

/// Agreement tolerance between the independent relaxation routes.
pub const ROUTE_TOL: f64 = 1e-9;

/// Resolution at which strict inequalities are decided when classifying
/// characteristic points.
pub const STRICTNESS_TOL: f64 = 1e-9;

/// Default probe radius for characteristic-point classification.
pub const DEFAULT_EPS_PROBE: f64 = 1e-3;

/// Samples per side when probing strict monotonicity near a point.
pub const PROBE_SAMPLES: usize = 16;
