//! Computational core for weak hypergraph regularity and geometric Ramsey
//! counting.
//!
//! * [`ff`]: prime fields, dense tables over `F_q^m`, the discrete Fourier
//!   transform and the sphere functions `sigma_t`.
//! * [`hypergraph`]: hypergraph bundles, boundaries and entry removal.
//! * [`forms`]: the rectangle counting forms, box norms and the
//!   Gowers-Cauchy-Schwarz / von Neumann checks.
//! * [`regularity`]: partitions, conditional expectation, energy and the
//!   energy-increment weak regularity algorithm.
//! * [`lattice`]: lattice simplices, copy enumeration, the lattice counting
//!   forms, `U^1` norms, grid decompositions, uniformity and density
//!   increment.
//! * [`harness`]: scenarios, set generators, CSV/JSON emission and the
//!   acceptance runner.

pub mod error;
pub mod ff;
pub mod forms;
pub mod harness;
pub mod hypergraph;
pub mod lattice;
pub mod regularity;

pub use error::{Error, Result};
