//! JSON configuration: obstacle list plus solver settings, deserialized into
//! a validated billiard of the requested ambient dimension.

use billiard_core::constants::KappaReading;
use billiard_core::{Billiard, Obstacle, Tolerances};
use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObstacleConfig {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Ellipse {
        center: Vec<f64>,
        semi_axes: [f64; 2],
        #[serde(default)]
        rotation: f64,
    },
    Ellipsoid {
        center: Vec<f64>,
        semi_axes: [f64; 3],
        /// Row-major orthonormal axis frame; identity when omitted.
        #[serde(default)]
        orientation: Option<[[f64; 3]; 3]>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilliardConfig {
    pub schema_version: u32,
    pub dimension: usize,
    pub obstacles: Vec<ObstacleConfig>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    /// Upper bound assumed for the initial front curvature.
    #[serde(default = "default_k0_plus")]
    pub k0_plus: f64,
    /// Which obstacle of a pair contributes its curvature window to the
    /// pair's domain rectangle.
    #[serde(default)]
    pub kappa_reading: KappaReading,
}

fn default_k0_plus() -> f64 {
    1e6
}

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse(String),
    Invalid(String),
    /// Geometry violates a domain condition (overlap, too few obstacles).
    Domain(String),
    NonConvergence(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
            ConfigError::Domain(m) => write!(f, "domain condition failed: {m}"),
            ConfigError::NonConvergence(m) => write!(f, "numerical non-convergence: {m}"),
        }
    }
}

fn billiard_error(e: billiard_core::geometry::GeometryError) -> ConfigError {
    use billiard_core::geometry::GeometryError as G;
    match e {
        G::NoConvergence => ConfigError::NonConvergence(e.to_string()),
        _ => ConfigError::Domain(e.to_string()),
    }
}

impl BilliardConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        let cfg: BilliardConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Invalid(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        if cfg.dimension != 2 && cfg.dimension != 3 {
            return Err(ConfigError::Invalid(format!(
                "dimension must be 2 or 3, got {}",
                cfg.dimension
            )));
        }
        Ok(cfg)
    }

    pub fn tolerances(&self, profile: Option<&str>) -> Result<Tolerances, ConfigError> {
        if let Some(name) = profile {
            return Tolerances::profile(name).ok_or_else(|| {
                ConfigError::Invalid(format!("unknown tolerance profile '{name}'"))
            });
        }
        Ok(self.tolerances.unwrap_or_default())
    }

    pub fn build_2d(&self, tol: &Tolerances) -> Result<Billiard<2>, ConfigError> {
        let mut obstacles = Vec::with_capacity(self.obstacles.len());
        for (idx, o) in self.obstacles.iter().enumerate() {
            let k = match o {
                ObstacleConfig::Ball { center, radius } => {
                    Obstacle::<2>::ball(vec_to_2(center, idx)?, *radius)
                }
                ObstacleConfig::Ellipse {
                    center,
                    semi_axes,
                    rotation,
                } => Obstacle::<2>::ellipse(vec_to_2(center, idx)?, semi_axes[0], semi_axes[1], *rotation),
                ObstacleConfig::Ellipsoid { .. } => {
                    return Err(ConfigError::Invalid(format!(
                        "obstacle {idx}: ellipsoid not allowed in a 2-dimensional config"
                    )))
                }
            }
            .map_err(|e| ConfigError::Invalid(format!("obstacle {idx}: {e}")))?;
            obstacles.push(k);
        }
        Billiard::new(obstacles, tol).map_err(billiard_error)
    }

    pub fn build_3d(&self, tol: &Tolerances) -> Result<Billiard<3>, ConfigError> {
        let mut obstacles = Vec::with_capacity(self.obstacles.len());
        for (idx, o) in self.obstacles.iter().enumerate() {
            let k = match o {
                ObstacleConfig::Ball { center, radius } => {
                    Obstacle::<3>::ball(vec_to_3(center, idx)?, *radius)
                }
                ObstacleConfig::Ellipsoid {
                    center,
                    semi_axes,
                    orientation,
                } => {
                    let frame = match orientation {
                        None => Matrix3::identity(),
                        Some(rows) => Matrix3::from_fn(|r, c| rows[r][c]),
                    };
                    Obstacle::<3>::ellipsoid(vec_to_3(center, idx)?, *semi_axes, frame)
                }
                ObstacleConfig::Ellipse { .. } => {
                    return Err(ConfigError::Invalid(format!(
                        "obstacle {idx}: ellipse not allowed in a 3-dimensional config"
                    )))
                }
            }
            .map_err(|e| ConfigError::Invalid(format!("obstacle {idx}: {e}")))?;
            obstacles.push(k);
        }
        Billiard::new(obstacles, tol).map_err(billiard_error)
    }
}

fn vec_to_2(v: &[f64], idx: usize) -> Result<Vector2<f64>, ConfigError> {
    if v.len() != 2 {
        return Err(ConfigError::Invalid(format!(
            "obstacle {idx}: center needs 2 coordinates, got {}",
            v.len()
        )));
    }
    Ok(Vector2::new(v[0], v[1]))
}

fn vec_to_3(v: &[f64], idx: usize) -> Result<Vector3<f64>, ConfigError> {
    if v.len() != 3 {
        return Err(ConfigError::Invalid(format!(
            "obstacle {idx}: center needs 3 coordinates, got {}",
            v.len()
        )));
    }
    Ok(Vector3::new(v[0], v[1], v[2]))
}
