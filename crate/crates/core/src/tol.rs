//! Centralized numerical tolerances.
//!
//! Every solver and geometric predicate in this crate reads its thresholds
//! from a [`Tolerances`] value, so a whole run can be tightened or relaxed
//! in one place and the values used are reportable.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Residual of the implicit surface equation for a point to count as
    /// "on the boundary".
    pub on_boundary: f64,
    /// Convergence threshold (point movement) for boundary projection and
    /// the closest-pair iteration.
    pub projection: f64,
    /// Angular residual allowed in mutual-normality and reflection-law checks.
    pub angular: f64,
    /// Signed-distance slack for convex hull membership.
    pub hull: f64,
    /// Ray-quadric discriminants closer to zero than this are treated as
    /// tangent (grazing) rays.
    pub tangency: f64,
    /// Collisions with cos(phi) below this are rejected as grazing.
    pub grazing: f64,
    /// Convergence threshold (max point movement per sweep) for the
    /// periodic-orbit minimizer.
    pub orbit_movement: f64,
    /// Iteration budget for alternating projection (closest pair).
    pub closest_pair_iters: usize,
    /// Sweep budget for the periodic-orbit minimizer.
    pub orbit_sweeps: usize,
    /// Boundary samples per obstacle when restricting curvature extrema to
    /// the hull (2D).
    pub hull_samples_2d: usize,
    /// Boundary samples per obstacle when restricting curvature extrema to
    /// the hull (3D).
    pub hull_samples_3d: usize,
    /// Direction samples for the support-function distance between an
    /// obstacle and the convex hull of two others.
    pub support_scan: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            on_boundary: 1e-9,
            projection: 1e-12,
            angular: 1e-8,
            hull: 1e-9,
            tangency: 1e-10,
            grazing: 1e-8,
            orbit_movement: 1e-12,
            closest_pair_iters: 100_000,
            orbit_sweeps: 10_000,
            hull_samples_2d: 10_000,
            hull_samples_3d: 100_000,
            support_scan: 4_096,
        }
    }
}

impl Tolerances {
    /// Named profile lookup used by the CLI. `default` is the profile every
    /// documented tolerance refers to; `strict` tightens the iterative
    /// solvers, `fast` trades sampling density for speed.
    pub fn profile(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default()),
            "strict" => Some(Self {
                projection: 1e-14,
                orbit_movement: 1e-13,
                hull_samples_2d: 40_000,
                hull_samples_3d: 400_000,
                support_scan: 16_384,
                ..Self::default()
            }),
            "fast" => Some(Self {
                hull_samples_2d: 2_000,
                hull_samples_3d: 20_000,
                support_scan: 1_024,
                ..Self::default()
            }),
            _ => None,
        }
    }
}
