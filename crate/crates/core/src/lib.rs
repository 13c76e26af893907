//! Numerical laboratory for subordinate Brownian motion: Bernstein-function
//! calculus, kernel estimates, approach-region geometry, boundary means and
//! Monte Carlo exit simulation.

pub mod bernstein;
pub mod error;
pub mod experiments;
pub mod exterior;
pub mod geometry;
pub mod kernels;
pub mod montecarlo;
pub mod point;
pub mod qmc;
pub mod quad;
pub mod rng;
pub mod special;

pub use error::{LabError, Result};
pub use point::Point;
