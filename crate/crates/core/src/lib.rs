//! Exact symbolic analysis of affine connection control systems.
//!
//! The crate answers three questions about a system `(Q, ∇, {g_1..g_m})`
//! given in a single coordinate chart with polynomial or rational-function
//! data:
//!
//! * is the system geodesically accessible from a point (symmetric-product
//!   closure of the inputs spans the tangent space)?
//! * does a regular distribution `D` qualify as a mechanical quotient
//!   (involutive, connection-invariant, curvature-invariant, and
//!   input-invariant)?
//! * what is the reduced system in adapted coordinates, and do numerically
//!   integrated trajectories of the original system project onto
//!   trajectories of the reduced one?
//!
//! All symbolic computation is exact over the field of rational functions
//! with arbitrary-precision rational coefficients; floating point appears
//! only in the fixed-step integrator of [`simulate`].

pub mod accessibility;
pub mod distribution;
mod error;
pub mod geometry;
pub mod quotient;
pub mod report;
pub mod simulate;
pub mod symexpr;
pub mod sysfile;
pub mod verify;

pub use error::{Error, Result};
