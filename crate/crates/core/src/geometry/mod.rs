//! Domains, distances, charts and approach regions.

mod domain;
mod profile;
mod region;

pub use domain::{Chart, Convex, Domain, Localized, Shape, GRAPH_HALF_SIDE, LOCALIZE_L};
pub use profile::Profile;
pub use region::*;
