//! Finite semifinite model: block matrix algebras with weighted traces.

pub(crate) mod algebra;
pub(crate) mod dense;
mod io;
mod matop;
mod tuple;

pub use algebra::{Block, TracedAlgebra};
pub use io::{from_json, to_json, OperatorFile};
pub use matop::MatOp;
pub use tuple::{HermTuple, DEFAULT_CTOL};
