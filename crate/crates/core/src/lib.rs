//! Nonlocality certification for the triangle network.
//!
//! The crate computes quantum distributions on the triangle (three two-qubit
//! sources, three four-outcome parties), and certifies them nonlocal by
//! showing that linear relaxations of the parity-token-counting local set are
//! infeasible. Every infeasibility verdict carries a Farkas certificate that
//! is checked independently of the solver that produced it.

pub mod certify;
pub mod dist;
pub mod error;
pub mod lp;
pub mod optim;
pub mod qmodel;

pub use error::{Error, Result};
