//! Closed-form and numerical solutions of the impulsive logistic equation
//!
//! ```text
//! x' = r(t) (1 - x / K(t)) x          between impulses
//! x(t0 + k) = (1 - E) x((t0 + k)^-)   at t = t0 + k, k = 1, 2, ...
//! ```
//!
//! with period-1 coefficients `r`, `K`. The crate evaluates the per-interval
//! solution and the positive periodic solution analytically, integrates the
//! same system with RK4 as an independent check, and turns the jump,
//! periodicity and fixed-point properties into verification reports.

pub mod analysis;
pub mod closed_form;
pub mod coefficients;
pub mod error;
pub mod integrator;
pub mod quadrature;

pub use closed_form::{derive_constants, Model, ModelParams, SolutionConstants};
pub use coefficients::{compute_a, compute_b, CoefficientPair, PeriodicCoefficient};
pub use error::{Error, Result};
pub use integrator::{exact_constant_flow, integrate, StepControl, Trajectory};
