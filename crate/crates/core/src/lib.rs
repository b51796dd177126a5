//! Exact operator calculus for quasi-exactly solvable (QES) operators.
//!
//! The crate builds the differential operators that preserve the polynomial
//! spaces `P(N,V)` and `P(N-Δ,V) ⊕ P(N,V)`, checks the commutation and
//! anticommutation relations they satisfy, counts the Young-symmetrizer
//! constraints on `{Q,Q}`, re-derives the Jacobi conditions of the abstract
//! superalgebras, and computes exact spectra on the invariant spaces.
//!
//! All arithmetic is over exact rationals. Floating point only appears in
//! [`verify::spectrum`] when the caller asks for approximate roots.

pub mod abstract_jacobi;
pub mod error;
pub mod expr;
pub mod gens;
pub mod gradedop;
pub mod linalg;
pub mod polyspace;
pub mod rational;
pub mod symm;
pub mod verify;
pub mod weylop;

pub use error::{Error, Result};
pub use gens::{AlphaCoefficients, GenContext, MultiIndex};
pub use gradedop::{GradedOp, GradedVector};
pub use polyspace::{Monomial, Poly, SpaceSpec};
pub use rational::Rational;
pub use weylop::{DerivMulti, DiffOp};

#[cfg(feature = "parallel")]
pub(crate) mod par {
    pub use rayon::prelude::*;
}
