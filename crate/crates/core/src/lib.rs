//! Canonical decompositions of bipartite positive semidefinite matrices.
//!
//! A state `T` on `C^m ⊗ C^n` whose blocks (after a local filter on B) are
//! commuting normal matrices splits uniquely as `Σ_γ A_γ ⊗ B_γ` with distinct
//! unit-trace `A_γ` and independent images of the `B_γ`. This crate computes
//! that split, the pure-product refinement, a separability test for states
//! with `rank T = rank T_B`, and the detection of quantum-classical and
//! classical-quantum channels from their Choi matrices.

pub mod bipartite;
pub mod channels;
pub mod decompose;
pub mod error;
pub mod jointdiag;
pub mod matcore;
pub mod toolkit;

pub use bipartite::{BipartiteMatrix, BlockGrid, FilteredPair};
pub use decompose::{CanonicalDecomposition, MarginalRankVerdict, Side, Term};
pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, Tolerances, C64};
