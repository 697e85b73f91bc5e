//! Centralized tolerances.
//!
//! The hierarchy is deliberate: each layer's numerical error must sit well
//! below the noise floor of the layer that consumes it.
//!
//! kernel (1e-8) < solvers (1e-7 / 1e-6) < formula-vs-FD (1e-4) = inequality slack (1e-4)

/// Curvature kernel identities (Riemann symmetries, Bianchi contractions,
/// flow residual ∂τg + 2Ric). AD on closed-form metrics is exact up to
/// rounding; 1e-8 leaves ~7 digits of headroom.
pub const KERNEL: f64 = 1e-8;

/// Euler–Lagrange residual certifying an 𝓛-geodesic. Shooting converges the
/// endpoint to integrator accuracy (rtol 1e-10); the quintic-Hermite curve
/// representation reproduces the second derivative to ~1e-9 on the catalog.
pub const GEODESIC: f64 = 1e-7;

/// Transport isometry Mᵀ G_t M = G_s and pointwise transport residual.
pub const TRANSPORT: f64 = 1e-7;

/// Pointwise 𝓛-Jacobi ODE residual of a solved variation field.
pub const JACOBI: f64 = 1e-6;

/// Agreement between the two published forms of the second variation.
pub const Q_FORMS: f64 = 1e-6;

/// Closed-form first/second derivative formulas of L versus central finite
/// differences of re-solved distances. FD noise over BVP re-solves dominates
/// every other error here.
pub const FORMULA_VS_FD: f64 = 1e-4;

/// Slack granted to the main differential inequalities.
pub const INEQUALITY: f64 = 1e-4;

/// Trace identity Σᵢ H(T,eᵢ) = d/dτ(R + |T|²), limited by the FD step in τ.
pub const TRACE_IDENTITY: f64 = 1e-5;

/// Two converged BVP solutions count as distinct minimizers when their 𝓛
/// values differ by more than this ...
pub const MULTIPLICITY_VALUE: f64 = 1e-6;

/// ... or their initial velocities differ by more than this.
pub const MULTIPLICITY_VELOCITY: f64 = 1e-3;

/// Non-decrease slack for monotonicity traces.
pub const MONOTONICITY: f64 = 1e-4;
