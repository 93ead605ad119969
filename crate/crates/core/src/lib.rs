//! Finite-dimensional laboratory for time-frequency analysis of
//! pseudodifferential operators on the cyclic group `Z_N` (N odd).
//!
//! Signals live in `C^N`, symbols on the phase plane `Z_N x Z_N`, and Gabor
//! frames are indexed by separable lattices `alpha Z_N x beta Z_N`. The crate
//! provides the Weyl calculus, short-time Fourier analysis, solid convolution
//! algebras on phase-space lattices, convolution-dominated matrix norms, and
//! the almost-diagonalization experiments that tie them together.

pub mod aldiag;
pub mod cdmat;
pub mod error;
pub mod molecules;
pub mod phase;
pub mod weyl;
pub mod seqalg;
pub mod symclass;
pub mod util;

pub use error::{Error, Result};
pub use util::C64;
