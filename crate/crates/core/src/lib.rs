//! Frame theory workbench for sequence spaces.
//!
//! Finite sections of (possibly infinite) families of vectors and functionals
//! are analysed through their analysis and synthesis operators: frame and
//! Riesz bounds in both the squared Hilbert and the unsquared `X_d`
//! conventions, the parametrization of all duals as left inverses of the
//! analysis operator, synthesis pseudo-duals, and partial-sum diagnostics for
//! series expansions.

pub mod builtins;
pub mod duals;
pub mod error;
pub mod expansion;
pub mod frame;
pub mod linalg;
pub mod opnorm;
pub mod reproduce;
pub mod scalar;
pub mod sequences;

pub use error::{FrameError, Result};
pub use linalg::{Matrix, SequenceSpaceSpec, Vector};
pub use scalar::Scalar;
pub use sequences::{FrameSystem, SparseVec};
