//! Quantum-correlation measures for N-partite finite-dimensional states.
//!
//! The crate is organised bottom-up:
//!
//! - [`qstate`]: density operators, partial traces, spectral matrix functions
//!   and entropies (all logarithms base 2, values in bits).
//! - [`partitions`]: bipartitions `γ|γ′` of the party set and the subsystem
//!   permutations that make a cut contiguous.
//! - [`measurements`]: rank-1 projective bases, dephasing maps and
//!   conditional ensembles.
//! - [`optim`]: the Nelder-Mead simplex engine and the unitary chart used to
//!   search over measurement bases.
//! - [`correlations`]: original, symmetric, γ- and genuine multipartite
//!   discord.
//! - [`witness`]: the `D_p` metric, the witness `W`, concurrences, GMC checks
//!   and the convex-roof upper bound.
//! - [`zoo`], [`io`], [`report`]: named test states, JSON file formats and
//!   the analysis report emitted by the CLI.

pub mod correlations;
pub mod error;
pub mod io;
pub mod measurements;
pub mod optim;
pub mod partitions;
pub mod qstate;
pub mod report;
pub mod witness;
pub mod zoo;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
