//! Subordinate Brownian motion: subordinator increments, first exits and the
//! estimators built on them.
//!
//! The driving Brownian motion has generator Δ (twice the usual speed), so running the
//! subordinator for a time s moves X by (2s)^{1/2} G with G standard Gaussian.

mod estimate;
mod exit;
mod histogram;
mod spool;
mod subordinator;

pub use estimate::*;
pub use exit::*;
pub use histogram::*;
pub use spool::{read_spool, SpoolWriter, MAGIC as SPOOL_MAGIC};
pub use subordinator::{SamplerKind, SubordinatorStepper, DEFAULT_EPS};
