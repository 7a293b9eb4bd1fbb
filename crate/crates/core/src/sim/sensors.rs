use rand::Rng;
use rand_distr::StandardNormal;

use super::{NoiseProfile, Obstacles};
use crate::geo::{bearing_from_enu_heading, GeoPoint, GeoReference};
use crate::geometry::{normalize_angle, LaserScan, Point2D, Pose2D, ScanSpec};

/// Zero-mean gaussian sample. Always consumes one draw so stream positions do not
/// depend on the noise magnitude.
pub fn gauss<R: Rng + ?Sized>(rng: &mut R, std: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    std * z
}

/// Ray-cast range scan from `pose`. Beams that hit nothing within `range_max`, or whose
/// noisy range exceeds it, carry the no-return value.
pub fn sim_lidar<R: Rng + ?Sized>(
    obstacles: &Obstacles,
    pose: &Pose2D,
    spec: &ScanSpec,
    noise: &NoiseProfile,
    rng: &mut R,
) -> LaserScan {
    let origin = pose.position();
    let ranges = (0..spec.beam_count())
        .map(|i| {
            let e = gauss(rng, noise.lidar_range_std);
            match obstacles.raycast(&origin, pose.theta + spec.beam_angle(i), spec.range_max) {
                Some(t) => {
                    let r = (t + e).max(0.0);
                    if r > spec.range_max {
                        spec.no_return()
                    } else {
                        r
                    }
                }
                None => spec.no_return(),
            }
        })
        .collect();
    LaserScan::new(spec, ranges)
}

/// Relative motion `prev → curr` in `prev`'s frame, corrupted by the odometry model.
///
/// Translation noise scales with distance travelled (along and across the direction of
/// motion); rotation noise scales with the rotation, inflated by `odom_rot_multiplier`.
/// `odom_yaw_bias` adds a deterministic heading error per metre.
pub fn sim_odometry<R: Rng + ?Sized>(
    prev: &Pose2D,
    curr: &Pose2D,
    noise: &NoiseProfile,
    rng: &mut R,
) -> Pose2D {
    let delta = prev.between(curr);
    let dist = delta.x.hypot(delta.y);
    let (ux, uy) = if dist > 0.0 {
        (delta.x / dist, delta.y / dist)
    } else {
        (1.0, 0.0)
    };
    let along = gauss(rng, noise.odom_trans_std * dist);
    let across = gauss(rng, noise.odom_trans_std * dist);
    let rot = gauss(
        rng,
        noise.odom_rot_std * noise.odom_rot_multiplier * delta.theta.abs(),
    );
    Pose2D::new(
        delta.x + along * ux - across * uy,
        delta.y + along * uy + across * ux,
        delta.theta + rot + noise.odom_yaw_bias * dist,
    )
}

/// GPS fix of the true position with isotropic horizontal error of `gps_std` per axis.
pub fn sim_gps<R: Rng + ?Sized>(
    true_pose: &Pose2D,
    reference: &GeoReference,
    noise: &NoiseProfile,
    rng: &mut R,
) -> GeoPoint {
    let ex = gauss(rng, noise.gps_std);
    let ey = gauss(rng, noise.gps_std);
    let p = Point2D::new(true_pose.x + ex, true_pose.y + ey);
    reference
        .to_gps(&p)
        .expect("simulated position within projection range")
}

/// Compass bearing (clockwise from north) of the true heading, with noise.
pub fn sim_compass<R: Rng + ?Sized>(
    true_pose: &Pose2D,
    reference: &GeoReference,
    noise: &NoiseProfile,
    rng: &mut R,
) -> f64 {
    let e = gauss(rng, noise.compass_std);
    normalize_angle(bearing_from_enu_heading(reference.enu_heading(true_pose.theta)) + e)
}
