use std::fs;

use haris_core::bus::Bus;
use haris_core::mission::Phase;
use haris_core::runner::{
    corridor, cross_track_rms, mission_through, read_trajectory, run, topics, trajectory_csv,
    write_artifacts, RunConfig, SimRunner,
};
use haris_core::Point2D;

fn corridor_points() -> Vec<Point2D> {
    vec![
        Point2D::new(10.0, 6.0),
        Point2D::new(16.0, 8.0),
        Point2D::new(22.0, 6.0),
    ]
}

#[test]
fn identical_runs_write_identical_artifacts() {
    let scenario = corridor();
    let config = RunConfig {
        seed: 9,
        duration: 30.0,
        ..RunConfig::default()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let mission = mission_through(&scenario.world.reference(), "det", &corridor_points());
        let outcome = run(&scenario, Some(mission), &config).unwrap();
        write_artifacts(d.path(), &outcome).unwrap();
    }
    for name in ["trajectory.csv", "map.pgm", "sightings.csv", "metrics.json"] {
        let a = fs::read(dirs[0].path().join(name)).unwrap();
        let b = fs::read(dirs[1].path().join(name)).unwrap();
        assert!(!a.is_empty(), "{name} is empty");
        assert!(a == b, "{name} differs between runs");
    }
}

#[test]
fn three_waypoints_in_order_then_dock() {
    let scenario = corridor();
    let points = corridor_points();
    let config = RunConfig {
        seed: 4,
        duration: 200.0,
        ..RunConfig::default()
    };
    let mut runner = SimRunner::new(scenario.clone(), config.clone()).unwrap();
    let goals = runner
        .load_mission(mission_through(
            &scenario.world.reference(),
            "three",
            &points,
        ))
        .unwrap();
    let mut phases = vec![runner.phase().clone()];
    for _ in 0..config.ticks() {
        runner.step();
        if phases.last() != Some(runner.phase()) {
            phases.push(runner.phase().clone());
        }
        if runner.phase().is_terminal() {
            break;
        }
    }
    assert_eq!(
        phases,
        vec![
            Phase::Navigating(0),
            Phase::Navigating(1),
            Phase::Navigating(2),
            Phase::Docking,
            Phase::Completed
        ]
    );

    // the logged estimate at each arrival lies inside the arrival circle
    let arrivals = runner.executor().arrivals().to_vec();
    assert_eq!(
        arrivals.iter().map(|a| a.waypoint).collect::<Vec<_>>(),
        vec![0, 1, 2]
    );
    let log = read_trajectory(&trajectory_csv(runner.trajectory())).unwrap();
    let mut last = 0.0;
    for a in &arrivals {
        assert!(a.time > last);
        last = a.time;
        let row = log
            .iter()
            .find(|r| (r.t - a.time).abs() < 1e-6)
            .expect("row at arrival time");
        let d = row.est_pose.position().distance(&goals[a.waypoint]);
        assert!(d <= 0.3 + 1e-6, "waypoint {}: {d}", a.waypoint);
        assert!((d - a.distance).abs() < 1e-5);
    }
}

#[test]
fn one_reference_message_per_docking() {
    let scenario = corridor();
    let bus = Bus::new();
    let sub = bus.subscribe(topics::REFERENCE).unwrap();
    let config = RunConfig {
        seed: 2,
        ..RunConfig::default()
    };
    let mut runner = SimRunner::new(scenario.clone(), config).unwrap();
    runner.attach_bus(bus);
    // the initial reference goes out on attach
    assert_eq!(sub.drain().len(), 1);

    for (k, target) in [Point2D::new(9.0, 6.0), Point2D::new(12.0, 7.0)]
        .into_iter()
        .enumerate()
    {
        let mission = mission_through(runner.reference(), &format!("m{k}"), &[target]);
        runner.load_mission(mission).unwrap();
        let mut docked = 0;
        for _ in 0..4000 {
            runner.step();
            docked += sub.drain().len();
            if runner.phase().is_terminal() {
                break;
            }
        }
        assert_eq!(
            *runner.phase(),
            Phase::Completed,
            "mission {k} at {:?} est {:?}",
            runner.true_pose(),
            runner.estimate()
        );
        assert_eq!(docked, 1, "mission {k}");
        assert_eq!(runner.resyncs(), k + 1);
    }
    for _ in 0..40 {
        runner.step();
    }
    assert!(sub.drain().is_empty());
}

#[test]
fn fused_straight_mission_stays_on_the_line() {
    let scenario = corridor();
    let start = scenario.world.station.pose();
    let goal = start.transform_point(&Point2D::new(20.0, 0.0));
    let config = RunConfig {
        seed: 3,
        speed: 0.5,
        ..RunConfig::default()
    };
    let mission = mission_through(&scenario.world.reference(), "straight", &[goal]);
    let outcome = run(&scenario, Some(mission), &config).unwrap();
    assert_eq!(outcome.final_phase(), &Phase::Completed);
    let arrived = outcome.metrics.arrivals[0].time;
    let leg: Vec<_> = outcome
        .trajectory
        .iter()
        .filter(|r| r.t <= arrived)
        .cloned()
        .collect();
    let rms = cross_track_rms(&leg, start.position(), goal);
    assert!(rms <= 0.05, "cross-track rms {rms}");
}

#[test]
fn docking_cancels_accumulated_drift() {
    use haris_core::geo::{haversine, EARTH_RADIUS_M};
    use haris_core::runner::{genworld, lane_mission, LocalizationMode};
    use haris_core::sim::NoiseProfile;

    let mut scenario = genworld(2, 10, 3.0, 42);
    scenario.noise = NoiseProfile {
        odom_yaw_bias: 0.00045,
        ..NoiseProfile::zero()
    };
    let config = RunConfig {
        seed: 1,
        mode: LocalizationMode::Odometry,
        ..RunConfig::default()
    };
    let mission = lane_mission(&scenario.world, &scenario.world.reference(), "loop");
    let mut runner = SimRunner::new(scenario.clone(), config.clone()).unwrap();
    runner.load_mission(mission.clone()).unwrap();
    let mut drift = 0.0;
    for _ in 0..config.ticks() {
        drift = haversine(
            &runner.reported_position(),
            &runner.true_position(),
            EARTH_RADIUS_M,
        );
        runner.step();
        if runner.phase().is_terminal() {
            break;
        }
    }
    assert_eq!(*runner.phase(), Phase::Completed);
    assert!(drift > 0.4, "drift before docking {drift}");
    let station = scenario.world.station.geo();
    let reported = runner.reported_position();
    assert!(
        (reported.lat - station.lat).abs() <= 1e-12 && (reported.lon - station.lon).abs() <= 1e-12
    );

    let mut next = mission;
    next.id = "next".into();
    runner.load_mission(next).unwrap();
    let start_error = haversine(
        &runner.reported_position(),
        &runner.true_position(),
        EARTH_RADIUS_M,
    );
    assert!(start_error < 0.05, "{start_error}");
}
