use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geo::{GeoPoint, GeoReference};
use crate::geometry::{angle_diff, Point2D, Pose2D};
use crate::mission::ModuleGates;
use crate::sim::{Obstacles, WorldModel};

/// Side camera and recognition error model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    /// Camera pose in the robot frame; the default looks out to the left.
    pub mount: Pose2D,
    pub fov: f64,
    pub max_range: f64,
    /// `(distance, probability)` knots of the detection curve, increasing distance.
    pub p_detect: Vec<(f64, f64)>,
    pub ocr_char_error_rate: f64,
    pub light_level: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            mount: Pose2D::new(0.0, 0.0, std::f64::consts::FRAC_PI_2),
            fov: 1.2,
            max_range: 6.0,
            p_detect: vec![(0.0, 0.97), (3.0, 0.95), (6.0, 0.6)],
            ocr_char_error_rate: 0.01,
            light_level: 1.0,
        }
    }
}

impl CameraModel {
    /// Detection probability at distance `d`: linear between knots, flat beyond the
    /// ends, zero past `max_range`.
    pub fn detect_probability(&self, d: f64) -> f64 {
        if d > self.max_range || self.p_detect.is_empty() {
            return 0.0;
        }
        let k = &self.p_detect;
        let p = if d <= k[0].0 {
            k[0].1
        } else if d >= k[k.len() - 1].0 {
            k[k.len() - 1].1
        } else {
            let i = k.windows(2).position(|w| d <= w[1].0).unwrap();
            let (a, b) = (k[i], k[i + 1]);
            a.1 + (b.1 - a.1) * (d - a.0) / (b.0 - a.0)
        };
        p.clamp(0.0, 1.0)
    }

    /// Detection probability including the lighting factor.
    pub fn confidence(&self, d: f64) -> f64 {
        (self.detect_probability(d) * self.light_level.clamp(0.0, 1.0)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sighting {
    pub plate_read: String,
    /// Simulation ground truth; never used by the backend.
    pub true_plate: String,
    pub confidence: f64,
    pub robot_pose: Pose2D,
    pub car_position: GeoPoint,
    /// The same position in the local frame.
    pub car_local: Point2D,
    pub timestamp: u64,
}

/// Replaces each character, with probability `rate`, by a different digit drawn uniformly.
/// Always consumes two draws per character.
pub fn corrupt_plate<R: Rng + ?Sized>(plate: &str, rate: f64, rng: &mut R) -> String {
    plate
        .chars()
        .map(|c| {
            let hit = rng.random::<f64>() < rate;
            let pick = rng.random_range(0..9u32);
            if !hit {
                return c;
            }
            let own = c.to_digit(10);
            // the nine digits other than `c`, in order
            let d = match own {
                Some(o) if pick >= o => pick + 1,
                _ => pick,
            };
            char::from_digit(d, 10).unwrap()
        })
        .collect()
}

/// Plate sightings for one camera frame.
///
/// Visibility is decided at `true_pose`; the car position is stamped from the
/// estimated pose plus the car's offset as seen by the camera, so the stored position
/// carries the robot's localization error.
#[allow(clippy::too_many_arguments)]
pub fn observe<R: Rng + ?Sized>(
    world: &WorldModel,
    walls: &Obstacles,
    true_pose: &Pose2D,
    est_pose: &Pose2D,
    reference: &GeoReference,
    cam: &CameraModel,
    gates: &ModuleGates,
    timestamp: u64,
    rng: &mut R,
) -> Vec<Sighting> {
    if !gates.alpr_active {
        return Vec::new();
    }
    let camera = true_pose.compose(&cam.mount);
    let mut out = Vec::new();
    for car in &world.cars {
        let c = car.center();
        let (dx, dy) = (c.x - camera.x, c.y - camera.y);
        let d = dx.hypot(dy);
        if d > cam.max_range || angle_diff(dy.atan2(dx), camera.theta).abs() > cam.fov / 2.0 {
            continue;
        }
        if !walls.line_of_sight(&camera.position(), &c) {
            continue;
        }
        let confidence = cam.confidence(d);
        let detected = rng.random::<f64>() < confidence;
        let plate_read = corrupt_plate(&car.plate, cam.ocr_char_error_rate, rng);
        if !detected {
            continue;
        }
        let relative = true_pose.inverse().transform_point(&c);
        let stamped = est_pose.transform_point(&relative);
        let Ok(car_position) = reference.to_gps(&stamped) else {
            continue;
        };
        out.push(Sighting {
            plate_read,
            true_plate: car.plate.clone(),
            confidence,
            robot_pose: *est_pose,
            car_position,
            car_local: stamped,
            timestamp,
        });
    }
    out
}
