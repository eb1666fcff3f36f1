//! Emulated reduced-precision two-grid and V-cycle solvers with a priori
//! rounding-error bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cycles;
pub mod error;
pub mod harness;
pub mod hierarchy;
pub mod linops;
pub mod precision;
pub mod sparse;

pub use error::{Error, Result};
