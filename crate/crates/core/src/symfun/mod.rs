//! Symmetric function spaces on `(0, ∞)`: step functions, ψ-functions,
//! Lorentz and Marcinkiewicz norms, fundamental functions.

mod embedding;
mod norms;
mod parse;
mod psi;
mod space;
mod step;

pub use embedding::{embedding_test_ln1, embedding_test_space, EmbeddingReport, EmbeddingVerdict};
pub use norms::{fundamental_function, lorentz_norm, marcinkiewicz_norm, psi_plus_l1, space_norm};
pub use parse::{parse_psi, parse_space};
pub use psi::PsiFunction;
pub use space::SpaceSpec;
pub use step::{Step, StepFunction};
