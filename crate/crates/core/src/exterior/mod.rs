//! Exterior data, boundary means A(ξ,r) and the boundary integrals of the lemma suite.

mod function;
mod lemma;
mod means;

pub use function::{ExteriorFunction, ExteriorKind};
pub use lemma::*;
pub use means::*;
