use std::f64::consts::FRAC_PI_2;

use haris_core::geometry::{ScanSpec, Segment};
use haris_core::sim::{
    rng::stream, sim_lidar, sim_odometry, step_dynamics, NoiseProfile, Obstacles, RobotProfile,
    SimState,
};
use haris_core::slam::{Slam, SlamConfig};
use haris_core::{GridMap, Point2D, Pose2D, Twist};

const RES: f64 = 0.05;

fn room() -> Vec<Segment> {
    let p = Point2D::new;
    vec![
        Segment::new(p(0.0, 0.0), p(10.0, 0.0)),
        Segment::new(p(10.0, 0.0), p(10.0, 10.0)),
        Segment::new(p(10.0, 10.0), p(0.0, 10.0)),
        Segment::new(p(0.0, 10.0), p(0.0, 0.0)),
    ]
}

/// Rounded-square loop: 5 s straight, 2.5 s quarter turn, four times.
fn teleop(t: f64) -> Twist {
    if t % 7.5 < 5.0 {
        Twist::new(0.5, 0.0)
    } else {
        Twist::new(0.5, FRAC_PI_2 / 2.5)
    }
}

pub struct Outcome {
    pub wall_hit: f64,
    pub interior_false: f64,
    pub final_error: f64,
}

pub fn run(seed: u64) -> Outcome {
    let walls = room();
    let obstacles = Obstacles::new(walls.clone());
    let noise = NoiseProfile::default();
    let profile = RobotProfile::default();
    let spec = ScanSpec::default();
    let start = Pose2D::new(2.5, 2.0, 0.0);
    // half-cell offset puts the wall lines on cell centres
    let map = GridMap::new(
        RES,
        220,
        220,
        Point2D::new(-0.5 - RES / 2.0, -0.5 - RES / 2.0),
    );
    let mut slam = Slam::new(map, start, SlamConfig::for_noise(&noise), seed);
    let (mut lidar_rng, mut odom_rng) = (stream(seed, "lidar"), stream(seed, "odometry"));
    let mut state = SimState::new(start, seed);
    let dt = 0.05;
    let scan = sim_lidar(&obstacles, &start, &spec, &noise, &mut lidar_rng);
    slam.process(&Pose2D::IDENTITY, &scan);
    for k in 0..600 {
        let t = k as f64 * dt;
        let prev = state.true_pose;
        state = step_dynamics(&state, teleop(t), dt, &obstacles, &profile);
        let odom = sim_odometry(&prev, &state.true_pose, &noise, &mut odom_rng);
        let scan = sim_lidar(&obstacles, &state.true_pose, &spec, &noise, &mut lidar_rng);
        slam.process(&odom, &scan);
    }
    let est = slam.estimate();
    let map = slam.map();
    let thr = slam.config().mapping.occupied_log_odds();
    let (mut wall, mut wall_hit, mut interior, mut interior_false) = (0, 0, 0, 0);
    for c in map.cell_iter() {
        let centre = map.grid_to_world(c);
        let d = walls
            .iter()
            .map(|s| s.distance_to_point(&centre))
            .fold(f64::INFINITY, f64::min);
        let inside = (0.0..=10.0).contains(&centre.x) && (0.0..=10.0).contains(&centre.y);
        let occupied = map.get(c) > thr;
        if d < 1e-6 {
            wall += 1;
            wall_hit += occupied as usize;
        } else if inside && d > 0.1 {
            interior += 1;
            interior_false += occupied as usize;
        }
    }
    Outcome {
        wall_hit: wall_hit as f64 / wall as f64,
        interior_false: interior_false as f64 / interior as f64,
        final_error: est.pose.position().distance(&state.true_pose.position()),
    }
}
