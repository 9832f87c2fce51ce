//! Finite-difference seismic modeling: acoustic and elastic propagators with
//! CPML absorbing boundaries, a distributed halo-exchange executor and a
//! benchmark harness.

// `!(x > 0.0)` rejects NaN along with non-positive values; `a = a + b` keeps
// kernels generic over scalar types without assign operators.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::assign_op_pattern)]

pub mod bench;
pub mod cli;
pub mod cpml;
pub mod dist;
pub mod driver;
pub mod error;
pub mod exec;
pub mod grid;
pub mod model;
pub mod propagators;
pub mod real;
pub mod source;
pub mod stencil;

pub use error::{Error, Result};
