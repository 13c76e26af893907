//! Complete Bernstein functions and assumption certification.

mod certify;
mod family;
mod grid;

pub use certify::*;
pub use family::{BernsteinFunction, Family, FamilySpec};
pub use grid::{LogGrid, ScalingGrid};
