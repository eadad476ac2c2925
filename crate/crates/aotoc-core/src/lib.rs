//! Haar-averaged bipartite A-OTOC of noisy encoding-decoding circuits.
//!
//! An L-qubit register is scrambled by a unitary U, hit by k copies of a
//! single-qubit channel on its first k qubits, and unscrambled by U^dag.
//! This crate evaluates the Haar average of the bipartite algebraic
//! out-of-time-order correlator of that circuit by three independent routes:
//!
//! * a finite-L closed form in the channel's natural-representation moments
//!   ([`closed_form`]), together with its thermodynamic limit,
//! * an exact Weingarten-calculus engine over S4 ([`weingarten`]),
//! * direct dense circuit simulation with Haar, Clifford, or dual-unitary
//!   brickwork scramblers ([`circuit`]).

pub mod channel;
pub mod circuit;
pub mod closed_form;
pub mod error;
pub mod sweep;
pub mod tensor;
pub mod weingarten;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod testutil;
