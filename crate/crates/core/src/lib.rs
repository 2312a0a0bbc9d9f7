//! Monte Carlo kernels for boundary value problems of degenerate (hypoelliptic)
//! diffusions, solved along stochastic characteristics.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! outside world (model files, CSV, thread pools, the CLI) lives in the
//! companion `stochar` crate; parallelism is injected through [`Executor`].
//!
//! Module map:
//!
//! - [`poly`], [`field`], [`hormander`]: exact polynomial fields, Lie brackets,
//!   the generator and bracket-spanning checks.
//! - [`domain`], [`model`]: diffusion models `dx = b dt + σ dW` and the
//!   domains they are stopped on.
//! - [`sim`]: Euler–Maruyama stepping with exit detection for τ, τ₀ and τ̄.
//! - [`estimate`]: expectation functionals of exit data, Green's operator,
//!   Dynkin and PDE residual checks.
//! - [`boundary`]: regularity probes, niceness certificates and hypothesis
//!   diagnostics near boundary points.
//! - [`ergodic`]: Lyapunov certificates, cycle constructions and recurrence.

#![no_std]
#![allow(
    // `!(x > 0.0)` is how NaN gets rejected along with nonpositive values
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments,
    clippy::type_complexity
)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod boundary;
pub mod domain;
pub mod ergodic;
mod error;
pub mod estimate;
pub mod exec;
pub mod field;
pub mod grid;
pub mod hormander;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod rng;
pub mod sim;
pub mod stats;

pub use domain::{Domain, Exhaustion, Membership, Shape};
pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use field::{PolyMatrix, PolyVectorField, VectorFieldSystem};
pub use grid::Grid;
pub use model::DiffusionModel;
pub use poly::MultiPoly;
pub use sim::{ExitKind, ExitRecord, SimConfig};
pub use stats::MCEstimate;
