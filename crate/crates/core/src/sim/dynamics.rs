use serde::{Deserialize, Serialize};

use crate::geometry::{Point2D, Pose2D, Segment, Twist};

/// Kinematic limits and footprint of the differential-drive base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotProfile {
    pub v_max: f64,
    pub omega_max: f64,
    /// Footprint radius, metres.
    pub radius: f64,
}

impl Default for RobotProfile {
    fn default() -> Self {
        Self {
            v_max: 1.0,
            omega_max: 1.5,
            radius: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub true_pose: Pose2D,
    pub commanded: Twist,
    pub clock: f64,
    pub rng_seed: u64,
    /// Set when the last step ended against an obstacle.
    pub contact: bool,
}

impl SimState {
    pub fn new(pose: Pose2D, seed: u64) -> Self {
        Self {
            true_pose: pose,
            commanded: Twist::STOP,
            clock: 0.0,
            rng_seed: seed,
            contact: false,
        }
    }
}

/// Closed-form unicycle motion over `dt`.
pub fn integrate_unicycle(pose: &Pose2D, cmd: &Twist, dt: f64) -> Pose2D {
    let Twist { v, omega } = *cmd;
    let th = pose.theta;
    if omega.abs() < 1e-9 {
        Pose2D::new(
            pose.x + v * dt * th.cos(),
            pose.y + v * dt * th.sin(),
            th + omega * dt,
        )
    } else {
        let r = v / omega;
        let th1 = th + omega * dt;
        Pose2D::new(
            pose.x + r * (th1.sin() - th.sin()),
            pose.y - r * (th1.cos() - th.cos()),
            th1,
        )
    }
}

/// Static geometry the robot can bump into.
#[derive(Debug, Clone, Default)]
pub struct Obstacles {
    pub segments: Vec<Segment>,
}

impl Obstacles {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    pub fn clearance(&self, p: &Point2D) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    fn free(&self, p: &Point2D, radius: f64) -> bool {
        self.segments
            .iter()
            .all(|s| s.distance_to_point(p) >= radius)
    }

    /// Nearest hit along a ray, if any, within `max_range`.
    pub fn raycast(&self, origin: &Point2D, angle: f64, max_range: f64) -> Option<f64> {
        let dir = (angle.cos(), angle.sin());
        self.segments
            .iter()
            .filter_map(|s| s.ray_intersection(origin, dir))
            .filter(|&t| t <= max_range)
            .fold(None, |best: Option<f64>, t| {
                Some(best.map_or(t, |b| b.min(t)))
            })
    }

    /// True when the straight sight line between the points is unobstructed.
    pub fn line_of_sight(&self, a: &Point2D, b: &Point2D) -> bool {
        let sight = Segment::new(*a, *b);
        !self.segments.iter().any(|s| s.intersects(&sight))
    }
}

/// Advances the simulation by `dt` under `cmd` (clamped to the profile). A footprint
/// collision stops the robot at the contact point and sets `contact`.
pub fn step_dynamics(
    state: &SimState,
    cmd: Twist,
    dt: f64,
    obstacles: &Obstacles,
    profile: &RobotProfile,
) -> SimState {
    assert!(dt > 0.0, "dt must be positive");
    let cmd = cmd.clamped(profile.v_max, profile.omega_max);
    let start = state.true_pose;
    let travel = cmd.v.abs() * dt;
    let turn = cmd.omega.abs() * dt;
    let samples = ((travel / 0.01).max(turn / 0.02).ceil() as usize).max(1);

    let mut end = integrate_unicycle(&start, &cmd, dt);
    let mut contact = false;
    if travel > 0.0 {
        let mut last_free = 0.0;
        for k in 1..=samples {
            let t = dt * k as f64 / samples as f64;
            let p = integrate_unicycle(&start, &cmd, t);
            if !obstacles.free(&p.position(), profile.radius) {
                // bisect the contact time between the last free sample and this one
                let (mut lo, mut hi) = (last_free, t);
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    if obstacles.free(
                        &integrate_unicycle(&start, &cmd, mid).position(),
                        profile.radius,
                    ) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                end = integrate_unicycle(&start, &cmd, lo);
                contact = true;
                break;
            }
            last_free = t;
        }
    }
    SimState {
        true_pose: end,
        commanded: cmd,
        clock: state.clock + dt,
        rng_seed: state.rng_seed,
        contact,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn free_step(v: f64, w: f64, dt: f64) -> Pose2D {
        let s = SimState::new(Pose2D::IDENTITY, 0);
        let profile = RobotProfile {
            v_max: 10.0,
            omega_max: 10.0,
            radius: 0.3,
        };
        step_dynamics(&s, Twist::new(v, w), dt, &Obstacles::default(), &profile).true_pose
    }

    #[test]
    fn straight_line() {
        assert!(free_step(1.0, 0.0, 1.0).approx_eq(&Pose2D::new(1.0, 0.0, 0.0), 1e-12));
    }

    #[test]
    fn rotate_in_place() {
        assert!(free_step(0.0, FRAC_PI_2, 1.0).approx_eq(&Pose2D::new(0.0, 0.0, FRAC_PI_2), 1e-12));
    }

    #[test]
    fn half_circle() {
        // unit-radius circle centred at (0,1): after half a turn the robot is at (0,2) facing -x
        assert!(free_step(1.0, 1.0, PI).approx_eq(&Pose2D::new(0.0, 2.0, PI), 1e-12));
    }

    #[test]
    fn command_is_clamped_to_profile() {
        let s = SimState::new(Pose2D::IDENTITY, 0);
        let out = step_dynamics(
            &s,
            Twist::new(5.0, 0.0),
            1.0,
            &Obstacles::default(),
            &RobotProfile::default(),
        );
        assert!((out.true_pose.x - 1.0).abs() < 1e-12);
        assert_eq!(out.commanded.v, 1.0);
        assert_eq!(out.clock, 1.0);
    }

    #[test]
    fn wall_stops_robot_at_contact() {
        let wall = Segment::new(Point2D::new(2.0, -5.0), Point2D::new(2.0, 5.0));
        let obs = Obstacles::new(vec![wall]);
        let mut s = SimState::new(Pose2D::IDENTITY, 0);
        let profile = RobotProfile::default();
        for _ in 0..60 {
            s = step_dynamics(&s, Twist::new(1.0, 0.0), 0.05, &obs, &profile);
        }
        assert!(s.contact);
        assert!(
            s.true_pose.x <= 1.7 + 1e-9 && s.true_pose.x > 1.69,
            "{:?}",
            s.true_pose
        );
        assert!(obs.clearance(&s.true_pose.position()) >= profile.radius);
    }

    #[test]
    fn raycast_and_sight() {
        let wall = Segment::new(Point2D::new(5.0, -1.0), Point2D::new(5.0, 1.0));
        let obs = Obstacles::new(vec![wall]);
        assert_eq!(obs.raycast(&Point2D::new(0.0, 0.0), 0.0, 12.0), Some(5.0));
        assert_eq!(obs.raycast(&Point2D::new(0.0, 0.0), 0.0, 4.0), None);
        assert!(!obs.line_of_sight(&Point2D::new(0.0, 0.0), &Point2D::new(6.0, 0.0)));
        assert!(obs.line_of_sight(&Point2D::new(0.0, 0.0), &Point2D::new(4.0, 0.0)));
    }
}
