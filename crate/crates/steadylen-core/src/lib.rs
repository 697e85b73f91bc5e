//! Numerical kernel for the steady length functional
//!
//! 𝓛(γ) = ∫ₛᵗ ( R(γ(τ),τ) + |γ′(τ)|²_{g_τ} ) dτ
//!
//! along exact solutions of Ricci flow ∂g/∂τ = −2 Ric(g), together with the
//! induced two-point distance L((p,s),(q,t)) = inf 𝓛, its first and second
//! variations, and the differential inequalities and monotonicity statements
//! that L satisfies.
//!
//! The crate is `no_std` (alloc only). Everything here is deterministic pure
//! computation: curvature via nested forward-mode automatic differentiation,
//! geodesics via adaptive Runge–Kutta shooting, Hessians via 𝓛-Jacobi fields.
//! File formats, the CLI, and report writing live in the companion crate
//! `steadylen-cli`.
//!
//! Module map:
//! * [`geom`] — metric families, Christoffel/Riemann/Ricci and their
//!   covariant and time derivatives at a point,
//! * [`flows`] — the catalog of closed-form Ricci flows and the flow verifier,
//! * [`curve`] — sampled spacetime curves with quintic-Hermite interpolation,
//! * [`lgeo`] — 𝓛, the geodesic ODE, two-point boundary value solvers,
//!   the transport operator and 𝓛-Jacobi fields,
//! * [`lfunc`] — the distance L, gradients, time derivatives, second
//!   variation Q, H(T,V), the M×M Hessian and the □ operator,
//! * [`verify`] — inequality reports, soliton saturation residual,
//!   monotonicity scans, finite-difference cross-checks.

#![no_std]

extern crate alloc;

pub mod curve;
pub mod flows;
pub mod geom;
pub mod lfunc;
pub mod lgeo;
pub mod linalg;
pub mod ode;
pub mod opt;
pub mod quad;
pub mod rng;
pub mod scalar;
pub mod tol;
pub mod verify;

use alloc::string::String;

/// Errors surfaced by the solvers and evaluators.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A point or time lies outside the declared chart / time domain.
    /// The payload carries the parameter value at which the domain was left.
    OutOfDomain { at: f64, what: &'static str },
    /// The metric failed to be positive definite at an evaluation point.
    DegenerateMetric { at: f64 },
    /// Mismatched vector/matrix dimensions.
    Shape { expected: usize, got: usize },
    /// An unknown flow name or out-of-range flow parameter.
    InvalidFlow(String),
    /// Endpoint times violate s < t or lie outside the flow's time domain.
    InvalidTimes { s: f64, t: f64 },
    /// The boundary value solver failed from every start.
    BvpFailure {
        starts: usize,
        converged: usize,
        best_miss: f64,
    },
    /// Endpoints are conjugate along the geodesic: the Jacobi boundary
    /// system is singular and the Hessian is not defined through it.
    ConjugatePoints,
    /// A quantity that presupposes a unique minimizer was requested at a
    /// pair where several minimizers were detected.
    Multiplicity,
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::OutOfDomain { at, what } => write!(f, "out of domain ({what}) at {at}"),
            Error::DegenerateMetric { at } => {
                write!(f, "metric not positive definite at tau={at}")
            }
            Error::Shape { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidFlow(msg) => write!(f, "invalid flow: {msg}"),
            Error::InvalidTimes { s, t } => {
                write!(f, "invalid endpoint times s={s}, t={t} (need s < t inside the flow domain)")
            }
            Error::BvpFailure {
                starts,
                converged,
                best_miss,
            } => write!(
                f,
                "boundary value solve failed: {converged}/{starts} starts converged, best endpoint miss {best_miss:.3e}"
            ),
            Error::ConjugatePoints => write!(f, "endpoints conjugate along the geodesic"),
            Error::Multiplicity => write!(f, "no unique minimizing geodesic at this pair"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
