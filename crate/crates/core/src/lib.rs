//! Scattering quantum walks on finite graphs.
//!
//! A walk is parameterized by a per-vertex family of unitary scattering
//! matrices S(x) acting on the directed-edge space l2(D). The crate builds
//! the unitary walk operator U_S, derives the open channels it induces on
//! edges (Phi_S) and on vertices (Psi_S), and analyzes their spectral and
//! asymptotic behavior through the associated classical Markov chains.

pub mod error;
pub mod graph;
pub mod grover;
pub mod induced;
pub mod numerics;
pub mod open_walk;
pub mod scattering;
pub mod walk;

pub use error::{Result, SqwError};
pub use graph::{EdgeBasis, FunctionalGraph, Graph};
pub use scattering::{validate_family, OmegaFamily, ScatteringFamily};
