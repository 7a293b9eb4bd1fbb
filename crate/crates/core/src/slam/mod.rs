//! Occupancy-grid mapping and particle-filter localization.

mod field;
mod mapping;
mod particles;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use field::{distance_transform, LikelihoodField};
pub use mapping::{integrate_scan, traverse, MappingParams};
pub use particles::{
    LikelihoodParams, LocalizationEstimate, MeasurementOutcome, MotionNoise, Particle, ParticleSet,
};

use crate::geometry::{GridMap, LaserScan, Pose2D};
use crate::sim::{rng, NoiseProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlamConfig {
    pub particles: usize,
    pub motion: MotionNoise,
    pub likelihood: LikelihoodParams,
    pub mapping: MappingParams,
    /// Accumulated travel that triggers a measurement update, metres.
    pub update_distance: f64,
    /// Accumulated rotation that triggers a measurement update, radians.
    pub update_angle: f64,
    /// The likelihood field is rebuilt after this many map updates.
    pub field_refresh: usize,
}

impl Default for SlamConfig {
    fn default() -> Self {
        Self {
            particles: 500,
            motion: MotionNoise::default(),
            likelihood: LikelihoodParams::default(),
            mapping: MappingParams::default(),
            update_distance: 0.05,
            update_angle: 0.05,
            field_refresh: 4,
        }
    }
}

impl SlamConfig {
    /// Filter motion model matched to a simulated odometry noise profile.
    pub fn for_noise(noise: &NoiseProfile) -> Self {
        Self {
            // 1.5x headroom over the simulated error; heading also diffuses on straights
            // at the rate of the lateral translation error
            motion: MotionNoise {
                trans_std: noise.odom_trans_std * 1.5,
                rot_std: noise.odom_rot_std * noise.odom_rot_multiplier * 1.5,
                rot_per_meter: noise.odom_trans_std + noise.odom_yaw_bias.abs() * 1.5,
            },
            ..Self::default()
        }
    }
}

/// Sequential SLAM task: a shared map built at the filter estimate.
#[derive(Debug, Clone)]
pub struct Slam {
    config: SlamConfig,
    map: GridMap,
    field: LikelihoodField,
    particles: ParticleSet,
    rng: ChaCha8Rng,
    travelled: f64,
    turned: f64,
    map_updates: usize,
    last_outcome: Option<MeasurementOutcome>,
}

impl Slam {
    /// Starts with every particle at the known `start` pose (the docking station).
    pub fn new(map: GridMap, start: Pose2D, config: SlamConfig, seed: u64) -> Self {
        let field = LikelihoodField::from_map(
            &map,
            config.mapping.occupied_log_odds(),
            config.likelihood.max_distance,
        );
        Self {
            particles: ParticleSet::at_pose(start, config.particles),
            rng: rng::stream(seed, "slam"),
            config,
            map,
            field,
            travelled: 0.0,
            turned: 0.0,
            map_updates: 0,
            last_outcome: None,
        }
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn particles(&self) -> &ParticleSet {
        &self.particles
    }

    pub fn config(&self) -> &SlamConfig {
        &self.config
    }

    pub fn last_outcome(&self) -> Option<MeasurementOutcome> {
        self.last_outcome
    }

    pub fn estimate(&self) -> LocalizationEstimate {
        self.particles.estimate()
    }

    /// Consumes one odometry delta and the scan taken at the end of it.
    pub fn process(&mut self, odom: &Pose2D, scan: &LaserScan) -> LocalizationEstimate {
        self.particles
            .motion_update(odom, &self.config.motion, &mut self.rng);
        self.travelled += odom.x.hypot(odom.y);
        self.turned += odom.theta.abs();

        let first = self.map_updates == 0;
        let moved = self.travelled >= self.config.update_distance
            || self.turned >= self.config.update_angle;
        if !first && !moved {
            return self.estimate();
        }
        if !first {
            self.last_outcome = Some(self.particles.measurement_update_phased(
                scan,
                &self.field,
                &self.config.likelihood,
                self.map_updates,
            ));
            self.particles.resample_systematic(&mut self.rng);
        }
        self.travelled = 0.0;
        self.turned = 0.0;

        let est = self.estimate();
        integrate_scan(&mut self.map, &est.pose, scan, &self.config.mapping);
        self.map_updates += 1;
        let every = self.config.field_refresh.max(1);
        if first || self.map_updates.is_multiple_of(every) {
            self.refresh_field();
        }
        est
    }

    pub fn refresh_field(&mut self) {
        self.field = LikelihoodField::from_map(
            &self.map,
            self.config.mapping.occupied_log_odds(),
            self.config.likelihood.max_distance,
        );
    }

    /// Re-seeds the filter at `pose`, keeping the map.
    pub fn reset_pose(&mut self, pose: Pose2D) {
        self.particles = ParticleSet::at_pose(pose, self.config.particles);
        self.travelled = 0.0;
        self.turned = 0.0;
    }
}
