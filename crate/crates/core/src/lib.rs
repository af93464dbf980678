//! Constant-weight subspace machinery for multi-particle states.
//!
//! The crate is `no_std` (it needs `alloc`) and is organized bottom-up:
//!
//! * [`weights`]: single-particle weight systems (SU(2) spins, direct sums,
//!   the SU(3) fundamental, custom weightings).
//! * [`partitions`]: the solution set of the constant-weight equation, its
//!   permutation quotient, frequency matrices and exact ranks.
//! * [`state`]: multi-index bases, constant-weight sectors, sampled states.
//! * [`rdm`]: partial traces, diagonals and density-matrix checks.
//! * [`relations`]: b-vectors, the linear relations on marginal diagonals,
//!   the induction shift between context sizes and perfect-tensor witnesses.
//! * [`marginals`]: the two-body certificate for constant-weight liftability.
//!
//! Weights use the doubled convention throughout: an SU(2) spin-j particle
//! has integer weights `-2j, -2j+2, ..., 2j`.

#![no_std]

extern crate alloc;

pub mod error;
pub mod exact;
pub mod linalg;
pub mod marginals;
pub mod partitions;
pub mod rdm;
pub mod relations;
pub mod sampling;
pub mod state;
pub mod weights;

pub use error::{Error, Result};
pub use exact::Rational;
pub use num_complex::Complex64;
