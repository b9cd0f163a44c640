//! Operator-valued Nevanlinna-Pick interpolation over families of test
//! functions: decide solvability through Agler decompositions, build the
//! auxiliary function of a solvable problem and evaluate every interpolant
//! through its linear-fractional parametrization.

// Negated float comparisons are used on purpose so that NaN fails checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agler_solver;
pub mod aux_function;
pub mod cli;
pub mod colligation;
pub mod cpkernel;
pub mod error;
pub mod io;
pub mod numerics;
pub mod parametrizer;
pub mod rng;
pub mod testfam;

pub use error::{Error, Result};
