//! Casimir-Polder (CP) potentials of an isotropically polarizable particle
//! near a homogeneous dielectric body, computed with a basis-free multiple
//! scattering expansion (MSE).
//!
//! The scattering part of the electromagnetic Green tensor is expanded in
//! powers of a weakly singular surface operator built from free dyadic Green
//! tensors of the interior and exterior media. Each expansion order is an
//! ordinary multidimensional integral over imaginary frequency and surface
//! points; no surface mesh, basis functions, or operator inversion is
//! involved. Partial sums are accelerated with a Shanks transformation.
//!
//! Everything is expressed in units with `ħcα = 1`, and results are reported
//! as the dimensionless amplitude `Υ = -U·d⁴`.
//!
//! Module map:
//! * [`geometry`]: smoothed-wedge and sphere parametrizations, coordinate
//!   maps between the smooth-tip and sharp-tip frames.
//! * [`green`]: free dyadic Green tensor blocks at imaginary frequency.
//! * [`operators`]: surface scattering kernel `K` and bulk-surface kernel
//!   `M`, tangentially reduced.
//! * [`quadrature`]: deterministic randomized quasi-Monte Carlo integration
//!   with the singularity-cancelling polar change of variables.
//! * [`mse`]: assembly and evaluation of the per-order contributions.
//! * [`accel`]: Shanks acceleration and the even/odd splitting policy.
//! * [`reference`]: exact baselines: sharp PEC wedge, dielectric plate,
//!   proximity estimate, reduced-PEC predictor.

pub mod accel;
pub mod geometry;
pub mod green;
mod linalg;
pub mod mse;
pub mod operators;
pub mod quadrature;
pub mod reference;

pub use linalg::{Mat3, Vec3};

/// Library-wide error type.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration violates a documented range or consistency invariant.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A kernel was requested at coincident points (or a bulk point on the
    /// surface); these evaluations are excluded by the quadrature maps and
    /// must never be requested directly.
    #[error("singular kernel evaluation at coincident points")]
    SingularEvaluation,
    /// The acceleration routines need at least three partial sums.
    #[error("need at least {needed} partial sums, got {got}")]
    TooFewPartialSums { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
