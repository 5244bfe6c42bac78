//! Lattice laboratory for the Seiberg–Witten equations with `n` spinors on a
//! flat 3-torus.
//!
//! The crate discretizes the blown-up system
//!
//! ```text
//! ‖Ψ‖_{L²} = 1,   D_{A⊗B} Ψ = 0,   sin²(α) F_A = cos²(α) μ(Ψ)
//! ```
//!
//! on a periodic cubic lattice, solves it along decreasing `α`, and provides
//! the diagnostics used to study degenerating sequences of solutions:
//! frequency functions, critical radii, growth laws, Hölder seminorms, zero
//! sets, and the hyperkähler-quotient picture of the `α = 0` limit.

pub mod dirac;
pub mod error;
pub mod frequency;
pub mod fueter;
pub mod gauge;
pub mod lattice;
pub(crate) mod linalg;
pub mod runner;
pub mod snapshot;
pub mod solver;
pub mod spin;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
