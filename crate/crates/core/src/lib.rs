//! Open billiards in the exterior of disjoint strictly convex obstacles:
//! trajectory simulation, periodic orbit search, convex-front curvature
//! propagation, and upper/lower bounds on the Hausdorff dimension of the
//! non-wandering set of the billiard ball map.
//!
//! The pipeline runs geometry -> constants -> domain -> fixed-point extrema
//! -> dimension bounds; see the `dimension` module for the final estimates
//! and the `billiard` CLI crate for file formats and plotting.

pub mod constants;
pub mod dimension;
pub mod dynamics;
pub mod geometry;
pub mod orbits;
pub mod tol;

pub use geometry::{Billiard, Obstacle, Point};
pub use tol::Tolerances;
