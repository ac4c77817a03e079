//! Finite semifinite models for diagonalizing commuting self-adjoint tuples
//! modulo symmetric operator spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`symfun`]: step functions on `(0, ∞)`, concave ψ-functions, Lorentz and
//!   Marcinkiewicz norms, fundamental functions and the `L_{n,1}` embedding test.
//! * [`ncalg`]: block matrix algebras with weighted traces, operators, singular
//!   value functions and symmetric operator norms.
//! * [`jointspec`]: joint diagonalization of commuting Hermitian tuples, spectral
//!   projections of boxes and dyadic atoms.
//! * [`construct`]: dyadic approximate units, generating projections, and the
//!   explicit diagonal approximants with their error budgets.
//! * [`certify`]: commutator-norm optimization and trace certificates on banded
//!   operators of the one-sided sequence space.

pub mod certify;
pub mod construct;
pub mod error;
pub mod jointspec;
pub mod ncalg;
pub mod symfun;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
