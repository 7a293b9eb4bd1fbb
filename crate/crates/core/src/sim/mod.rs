//! Deterministic parking-lot simulation: unicycle kinematics and the LiDAR, odometry,
//! GPS and compass sensors.

mod dynamics;
pub mod rng;
mod sensors;
mod world;

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;

pub use dynamics::{integrate_unicycle, step_dynamics, Obstacles, RobotProfile, SimState};
pub use sensors::{gauss, sim_compass, sim_gps, sim_lidar, sim_odometry};
pub use world::{Bounds, ParkedCar, Station, VehicleClass, Wall, WorldModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseProfile {
    /// Odometry translation noise, fraction of distance travelled.
    pub odom_trans_std: f64,
    /// Odometry rotation noise, rad per rad turned.
    pub odom_rot_std: f64,
    /// Inflation applied to rotation noise.
    pub odom_rot_multiplier: f64,
    /// Systematic heading error, rad per metre travelled.
    pub odom_yaw_bias: f64,
    pub lidar_range_std: f64,
    /// Per-axis horizontal GPS error, metres.
    pub gps_std: f64,
    pub compass_std: f64,
}

impl Default for NoiseProfile {
    fn default() -> Self {
        Self {
            odom_trans_std: 0.02,
            odom_rot_std: 0.05,
            odom_rot_multiplier: 4.0,
            odom_yaw_bias: 0.0,
            lidar_range_std: 0.01,
            gps_std: 10.0,
            compass_std: 0.02,
        }
    }
}

impl NoiseProfile {
    pub fn zero() -> Self {
        Self {
            odom_trans_std: 0.0,
            odom_rot_std: 0.0,
            odom_rot_multiplier: 1.0,
            odom_yaw_bias: 0.0,
            lidar_range_std: 0.0,
            gps_std: 0.0,
            compass_std: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fields = [
            ("noise.odom_trans_std", self.odom_trans_std),
            ("noise.odom_rot_std", self.odom_rot_std),
            ("noise.odom_rot_multiplier", self.odom_rot_multiplier),
            ("noise.lidar_range_std", self.lidar_range_std),
            ("noise.gps_std", self.gps_std),
            ("noise.compass_std", self.compass_std),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ScenarioError::invalid(
                    name,
                    format!("{v} must be a non-negative number"),
                ));
            }
        }
        if !self.odom_yaw_bias.is_finite() {
            return Err(ScenarioError::invalid(
                "noise.odom_yaw_bias",
                "must be finite",
            ));
        }
        Ok(())
    }
}

/// Scenario file: the world plus its noise profile and master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "ScenarioFile")]
pub struct Scenario {
    #[serde(flatten)]
    pub world: WorldModel,
    #[serde(default)]
    pub noise: NoiseProfile,
    #[serde(default)]
    pub seed: u64,
}

/// On-disk layout of [`Scenario`]. Spelled out rather than flattened so parse errors
/// keep the path of the offending field.
#[derive(Deserialize)]
struct ScenarioFile {
    bounds: Bounds,
    #[serde(default)]
    walls: Vec<Wall>,
    #[serde(default)]
    cars: Vec<ParkedCar>,
    station: Station,
    #[serde(default)]
    noise: NoiseProfile,
    #[serde(default)]
    seed: u64,
}

impl From<ScenarioFile> for Scenario {
    fn from(f: ScenarioFile) -> Self {
        Self {
            world: WorldModel {
                bounds: f.bounds,
                walls: f.walls,
                cars: f.cars,
                station: f.station,
            },
            noise: f.noise,
            seed: f.seed,
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let s: Scenario = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                ScenarioError::Parse(inner.to_string())
            } else {
                ScenarioError::Parse(format!("{path}: {inner}"))
            }
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.world.validate()?;
        self.noise.validate()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}
