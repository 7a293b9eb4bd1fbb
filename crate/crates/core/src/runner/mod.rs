//! Closed-loop simulation of the whole robot: sensors, localization, the mission
//! executor, global and local planning and the plate camera, stepped at a fixed tick.

mod artifacts;
mod command;
mod experiment;
mod lot;

use std::str::FromStr;

use base64::Engine;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use artifacts::{
    read_trajectory, sightings_csv, trajectory_csv, write_artifacts, RunMetrics, SIGHTINGS_HEADER,
    TRAJECTORY_HEADER,
};
pub use command::{Command, CommandReply, ReplyStatus};
pub use experiment::{
    cross_track_rms, experiment_path_error, path_error_csv, PathErrorRow, PathErrorSetup,
};
pub use lot::{corridor, genworld, lane_mission, mission_through};

use crate::alpr::{observe, CameraModel, Sighting};
use crate::bus::Bus;
use crate::error::{MissionError, RunError};
use crate::geo::{enu_heading_from_bearing, GeoPoint, GeoReference};
use crate::geometry::{normalize_angle, GridMap, LaserScan, Point2D, Pose2D, ScanSpec, Twist};
use crate::mission::{ExecutorConfig, Mission, MissionExecutor, NavStatus, Phase};
use crate::navigation::{
    arc, dwa_step, inflate, plan_global, rasterize_world, smooth_path, Costmap, DwaParams, Path,
    PurePursuit,
};
use crate::sim::{
    rng, sim_compass, sim_gps, sim_lidar, sim_odometry, step_dynamics, Obstacles, RobotProfile,
    Scenario, SimState,
};
use crate::slam::{integrate_scan, LocalizationEstimate, MappingParams, Slam, SlamConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalizationMode {
    /// Raw GPS fixes, held between 1 Hz updates, plus the compass.
    GpsOnly,
    /// Particle filter against the map built so far.
    #[default]
    Fused,
    /// Integrated wheel odometry only.
    Odometry,
}

impl LocalizationMode {
    pub const ALL: [LocalizationMode; 3] = [Self::GpsOnly, Self::Fused, Self::Odometry];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::GpsOnly => "gps_only",
            Self::Fused => "fused",
            Self::Odometry => "odometry",
        }
    }
}

impl FromStr for LocalizationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                format!("unknown localization mode {s:?} (expected gps_only, fused or odometry)")
            })
    }
}

impl std::fmt::Display for LocalizationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which local controller turns the current goal into velocity commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Controller {
    /// A* on the prior costmap, replanned periodically, tracked by the dynamic window.
    #[default]
    Dwa,
    /// Straight leg from where the goal was issued, tracked at constant speed.
    PurePursuit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    /// Simulated time limit, seconds.
    pub duration: f64,
    pub dt: f64,
    pub mode: LocalizationMode,
    pub controller: Controller,
    /// Cruise speed, m/s.
    pub speed: f64,
    pub particles: usize,
    /// Filter settings; derived from the scenario noise when absent.
    pub slam: Option<SlamConfig>,
    pub scan: ScanSpec,
    pub camera: CameraModel,
    pub camera_period: f64,
    pub gps_period: f64,
    pub replan_period: f64,
    pub map_resolution: f64,
    pub inflation_radius: f64,
    /// A docking robot whose true position is this close to the station is pulled onto it.
    pub dock_capture: f64,
    /// Offset added to simulated time for message and sighting timestamps, ms.
    pub epoch_ms: u64,
    /// Period of map snapshots on the bus, seconds.
    pub map_publish_period: f64,
    /// End the run once the mission reaches a terminal phase.
    pub stop_when_done: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            duration: 600.0,
            dt: 0.05,
            mode: LocalizationMode::Fused,
            controller: Controller::Dwa,
            speed: 0.5,
            particles: 500,
            slam: None,
            scan: ScanSpec::default(),
            camera: CameraModel::default(),
            camera_period: 0.5,
            gps_period: 1.0,
            replan_period: 1.0,
            map_resolution: 0.05,
            inflation_radius: 0.6,
            dock_capture: 1.0,
            epoch_ms: 0,
            map_publish_period: 5.0,
            stop_when_done: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        let positive = [
            ("dt", self.dt),
            ("duration", self.duration),
            ("speed", self.speed),
            ("camera_period", self.camera_period),
            ("gps_period", self.gps_period),
            ("replan_period", self.replan_period),
            ("map_resolution", self.map_resolution),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(RunError::config(field, format!("{v} must be positive")));
            }
        }
        if self.particles == 0 {
            return Err(RunError::config("particles", "at least one particle"));
        }
        Ok(())
    }

    /// Number of ticks covering `duration`.
    pub fn ticks(&self) -> usize {
        ((self.duration / self.dt - 1e-9).ceil() as usize).max(1)
    }
}

/// One row of the trajectory log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub true_pose: Pose2D,
    pub est_pose: Pose2D,
}

/// Everything a finished run leaves behind.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectory: Vec<TrajectoryRow>,
    pub sightings: Vec<Sighting>,
    pub map: GridMap,
    pub metrics: RunMetrics,
}

impl RunOutcome {
    pub fn final_phase(&self) -> &Phase {
        &self.metrics.final_phase
    }
}

/// Estimated pose as published on `robot/pose`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseReport {
    pub t: f64,
    pub pose: Pose2D,
    pub position: GeoPoint,
    /// Heading counter-clockwise from east.
    pub heading: f64,
    pub position_rms: f64,
    pub twist: Twist,
    /// Simulation ground truth, for display only.
    pub true_pose: Pose2D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionReport {
    #[serde(flatten)]
    pub phase: Phase,
    pub mission_id: Option<String>,
    pub goal: Option<Point2D>,
    pub goals: Vec<Point2D>,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub goal: Point2D,
    pub waypoints: Vec<Point2D>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalPlanReport {
    pub arc: Vec<Pose2D>,
    pub twist: Twist,
    pub blocked: bool,
}

/// Map snapshot: the PGM image, base64-encoded, with its placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    pub origin: Point2D,
    pub pgm: String,
}

struct DeadReckoning {
    gps: bool,
    pose: Pose2D,
    map: GridMap,
    params: MappingParams,
    travelled: f64,
    turned: f64,
}

impl DeadReckoning {
    fn integrate(&mut self, scan: &LaserScan, odom: &Pose2D, force: bool) {
        self.travelled += odom.x.hypot(odom.y);
        self.turned += odom.theta.abs();
        if force || self.travelled >= 0.05 || self.turned >= 0.05 {
            integrate_scan(&mut self.map, &self.pose, scan, &self.params);
            self.travelled = 0.0;
            self.turned = 0.0;
        }
    }
}

enum Localizer {
    Fused(Box<Slam>),
    Dead(DeadReckoning),
}

struct Streams {
    lidar: ChaCha8Rng,
    odometry: ChaCha8Rng,
    gps: ChaCha8Rng,
    compass: ChaCha8Rng,
    camera: ChaCha8Rng,
}

/// Topics the runner publishes.
pub mod topics {
    pub const POSE: &str = "robot/pose";
    pub const MISSION_STATE: &str = "mission/state";
    pub const SIGHTING: &str = "alpr/sighting";
    pub const REFERENCE: &str = "geo/reference";
    pub const GLOBAL_PATH: &str = "nav/global_path";
    pub const LOCAL_PLAN: &str = "nav/local_plan";
    pub const MAP: &str = "map/snapshot";
    pub const MISSION_COMMAND: &str = "mission/command";
}

pub struct SimRunner {
    scenario: Scenario,
    config: RunConfig,
    obstacles: Obstacles,
    walls: Obstacles,
    profile: RobotProfile,
    state: SimState,
    truth: GeoReference,
    belief: GeoReference,
    localizer: Localizer,
    est: LocalizationEstimate,
    executor: MissionExecutor,
    costmap: Costmap,
    dwa: DwaParams,
    pursuit: PurePursuit,
    path: Option<Path>,
    planned_goal: Option<Point2D>,
    last_plan: f64,
    nav: NavStatus,
    twist: Twist,
    streams: Streams,
    tick: u64,
    next_gps: f64,
    next_frame: f64,
    next_map: f64,
    resyncs: usize,
    trajectory: Vec<TrajectoryRow>,
    sightings: Vec<Sighting>,
    bus: Option<Bus>,
}

impl SimRunner {
    pub fn new(scenario: Scenario, config: RunConfig) -> Result<Self, RunError> {
        scenario.validate()?;
        config.validate()?;
        let world = &scenario.world;
        let noise = scenario.noise;
        let seed = config.seed;
        let start = world.station.pose();
        let obstacles = Obstacles::new(world.segments());
        let walls = Obstacles::new(world.walls.iter().map(|w| w.segment()).collect());
        let profile = RobotProfile {
            v_max: config.speed.max(RobotProfile::default().v_max),
            ..RobotProfile::default()
        };
        let mut streams = Streams {
            lidar: rng::stream(seed, "lidar"),
            odometry: rng::stream(seed, "odometry"),
            gps: rng::stream(seed, "gps"),
            compass: rng::stream(seed, "compass"),
            camera: rng::stream(seed, "camera"),
        };

        let mapping = MappingParams::default();
        let grid = GridMap::covering(
            world.bounds.min(),
            world.bounds.max(),
            config.map_resolution,
            1.0,
        );
        let scan = sim_lidar(&obstacles, &start, &config.scan, &noise, &mut streams.lidar);
        let localizer = match config.mode {
            LocalizationMode::Fused => {
                let slam_config = SlamConfig {
                    particles: config.particles,
                    mapping,
                    ..config.slam.unwrap_or_else(|| SlamConfig::for_noise(&noise))
                };
                let mut slam = Slam::new(grid, start, slam_config, rng::derive_seed(seed, "slam"));
                slam.process(&Pose2D::IDENTITY, &scan);
                Localizer::Fused(Box::new(slam))
            }
            mode => {
                let mut dead = DeadReckoning {
                    gps: mode == LocalizationMode::GpsOnly,
                    pose: start,
                    map: grid,
                    params: mapping,
                    travelled: 0.0,
                    turned: 0.0,
                };
                dead.integrate(&scan, &Pose2D::IDENTITY, true);
                Localizer::Dead(dead)
            }
        };

        let prior = rasterize_world(world, config.map_resolution, 1.0, &mapping);
        let costmap = inflate(&prior, config.inflation_radius, &mapping);
        let dwa = DwaParams {
            v_max: config.speed,
            w_max: profile.omega_max,
            robot_radius: profile.radius,
            control_period: config.dt,
            ..DwaParams::default()
        };
        let pursuit = PurePursuit {
            speed: config.speed,
            lookahead: 0.6,
            w_max: profile.omega_max,
        };
        let truth = world.reference();
        Ok(Self {
            obstacles,
            walls,
            profile,
            state: SimState::new(start, seed),
            truth,
            belief: truth,
            localizer,
            est: LocalizationEstimate {
                pose: start,
                position_rms: 0.0,
            },
            executor: MissionExecutor::new(start.position(), ExecutorConfig::default()),
            costmap,
            dwa,
            pursuit,
            path: None,
            planned_goal: None,
            last_plan: 0.0,
            nav: NavStatus::Ok,
            twist: Twist::STOP,
            streams,
            tick: 0,
            next_gps: 0.0,
            next_frame: 0.0,
            next_map: 0.0,
            resyncs: 0,
            trajectory: Vec::new(),
            sightings: Vec::new(),
            bus: None,
            scenario,
            config,
        })
    }

    /// Publishes state, sightings and plans on `bus` from now on.
    pub fn attach_bus(&mut self, bus: Bus) {
        self.bus = Some(bus);
        self.publish_state();
        self.publish(topics::REFERENCE, &self.belief);
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.config.dt
    }

    pub fn true_pose(&self) -> Pose2D {
        self.state.true_pose
    }

    pub fn estimate(&self) -> LocalizationEstimate {
        self.est
    }

    /// Reference the robot currently believes in.
    pub fn reference(&self) -> &GeoReference {
        &self.belief
    }

    /// Ground-truth anchoring of the world.
    pub fn true_reference(&self) -> &GeoReference {
        &self.truth
    }

    pub fn phase(&self) -> &Phase {
        self.executor.phase()
    }

    pub fn executor(&self) -> &MissionExecutor {
        &self.executor
    }

    pub fn costmap(&self) -> &Costmap {
        &self.costmap
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_ref()
    }

    pub fn resyncs(&self) -> usize {
        self.resyncs
    }

    pub fn trajectory(&self) -> &[TrajectoryRow] {
        &self.trajectory
    }

    pub fn sightings(&self) -> &[Sighting] {
        &self.sightings
    }

    pub fn map(&self) -> &GridMap {
        match &self.localizer {
            Localizer::Fused(slam) => slam.map(),
            Localizer::Dead(d) => &d.map,
        }
    }

    /// Reported position of the robot: the estimate through the believed reference.
    pub fn reported_position(&self) -> GeoPoint {
        self.belief
            .to_gps(&self.est.pose.position())
            .expect("estimate within projection range")
    }

    /// Where the robot really is.
    pub fn true_position(&self) -> GeoPoint {
        self.truth
            .to_gps(&self.state.true_pose.position())
            .expect("true pose within projection range")
    }

    pub fn load_mission(&mut self, mission: Mission) -> Result<Vec<Point2D>, MissionError> {
        let result = self.executor.load_mission(mission, &self.belief);
        self.path = None;
        self.planned_goal = None;
        self.nav = NavStatus::Ok;
        self.publish_state();
        result
    }

    pub fn abort_mission(&mut self, reason: &str) {
        self.executor.abort(reason);
        self.publish_state();
    }

    /// Operator correction of the believed pose, given in GPS terms.
    pub fn set_initial_pose(
        &mut self,
        position: GeoPoint,
        enu_heading: f64,
    ) -> Result<(), crate::GeoError> {
        let p = self.belief.to_local(&position)?;
        let pose = Pose2D::new(
            p.x,
            p.y,
            normalize_angle(enu_heading - self.belief.heading_offset),
        );
        match &mut self.localizer {
            Localizer::Fused(slam) => slam.reset_pose(pose),
            Localizer::Dead(d) => d.pose = pose,
        }
        self.est = LocalizationEstimate {
            pose,
            position_rms: 0.0,
        };
        Ok(())
    }

    fn timestamp(&self) -> u64 {
        self.config.epoch_ms + (self.time() * 1000.0).round() as u64
    }

    fn publish<T: Serialize>(&self, topic: &str, payload: &T) {
        if let Some(bus) = &self.bus {
            if let Err(e) = bus.publish_at(topic, payload, self.timestamp()) {
                log::warn!("publish on {topic}: {e}");
            }
        }
    }

    fn publish_state(&self) {
        if self.bus.is_none() {
            return;
        }
        let state = self.executor.state();
        self.publish(
            topics::MISSION_STATE,
            &MissionReport {
                phase: state.phase.clone(),
                mission_id: state.active_mission.as_ref().map(|m| m.id.clone()),
                goal: self.executor.current_goal(),
                goals: self.executor.goals().to_vec(),
                t: self.time(),
            },
        );
    }

    fn publish_map(&self) {
        let map = self.map();
        let p = MappingParams::default();
        let pgm = map.pgm_bytes(p.occupied_threshold, p.free_threshold);
        self.publish(
            topics::MAP,
            &MapReport {
                width: map.width,
                height: map.height,
                resolution: map.resolution,
                origin: map.origin,
                pgm: base64::engine::general_purpose::STANDARD.encode(pgm),
            },
        );
    }

    /// Advances the whole system by one tick.
    pub fn step(&mut self) -> TrajectoryRow {
        let dt = self.config.dt;
        let now = self.time();
        let out = self.executor.tick(&self.est, self.twist.v, self.nav, now);
        if out.changed {
            self.publish_state();
        }
        // the docking pull is real motion: odometry sees it along with this tick's
        let prev = self.state.true_pose;
        let docked = out.dock_arrived && self.capture_dock();
        self.twist = if docked {
            Twist::STOP
        } else {
            self.control(now)
        };

        let noise = self.scenario.noise;
        self.state = step_dynamics(&self.state, self.twist, dt, &self.obstacles, &self.profile);
        self.tick += 1;
        let t = self.time();
        let odom = sim_odometry(
            &prev,
            &self.state.true_pose,
            &noise,
            &mut self.streams.odometry,
        );
        let scan = sim_lidar(
            &self.obstacles,
            &self.state.true_pose,
            &self.config.scan,
            &noise,
            &mut self.streams.lidar,
        );
        self.localize(&odom, &scan, t);
        if docked {
            self.resync();
        }

        if t + 1e-9 >= self.next_frame {
            self.next_frame += self.config.camera_period;
            self.camera();
        }
        let row = TrajectoryRow {
            t,
            true_pose: self.state.true_pose,
            est_pose: self.est.pose,
        };
        self.trajectory.push(row);
        if self.bus.is_some() {
            self.publish(
                topics::POSE,
                &PoseReport {
                    t,
                    pose: self.est.pose,
                    position: self.reported_position(),
                    heading: self.belief.enu_heading(self.est.pose.theta),
                    position_rms: self.est.position_rms,
                    twist: self.twist,
                    true_pose: self.state.true_pose,
                },
            );
            if t + 1e-9 >= self.next_map {
                self.next_map += self.config.map_publish_period;
                self.publish_map();
            }
        }
        row
    }

    /// Snaps the robot onto the station pose, or aborts when it is too far off to latch.
    fn capture_dock(&mut self) -> bool {
        let station = self.scenario.world.station;
        let off = self
            .state
            .true_pose
            .position()
            .distance(&station.pose().position());
        if off > self.config.dock_capture {
            self.executor.abort("dock not captured");
            self.publish_state();
            return false;
        }
        self.state.true_pose = station.pose();
        true
    }

    fn resync(&mut self) {
        let station = self.scenario.world.station;
        match self.executor.on_docked(
            &self.belief,
            station.geo(),
            station.enu_heading(),
            &self.est,
        ) {
            Ok(reference) => {
                self.belief = reference;
                self.resyncs += 1;
                self.publish(topics::REFERENCE, &self.belief);
            }
            Err(e) => log::warn!("docking: {e}"),
        }
        self.publish_state();
    }

    fn plan(&mut self, goal: Point2D, now: f64) {
        self.planned_goal = Some(goal);
        self.last_plan = now;
        match plan_global(&self.costmap, self.est.pose.position(), goal) {
            Ok(path) => {
                let path = smooth_path(&self.costmap, &path);
                self.publish(
                    topics::GLOBAL_PATH,
                    &PathReport {
                        goal,
                        waypoints: path.waypoints.iter().map(|w| w.position()).collect(),
                        cost: path.total_cost,
                    },
                );
                self.path = Some(path);
                self.nav = NavStatus::Ok;
            }
            Err(e) => {
                log::debug!("planning to ({:.2}, {:.2}): {e}", goal.x, goal.y);
                self.path = None;
                self.nav = NavStatus::NoPath;
            }
        }
    }

    fn control(&mut self, now: f64) -> Twist {
        let Some(goal) = self.executor.current_goal() else {
            self.path = None;
            self.planned_goal = None;
            self.nav = NavStatus::Ok;
            return Twist::STOP;
        };
        let fresh = self.planned_goal != Some(goal);
        match self.config.controller {
            Controller::Dwa => {
                if fresh || now - self.last_plan >= self.config.replan_period - 1e-9 {
                    self.plan(goal, now);
                }
                let Some(path) = &self.path else {
                    return Twist::STOP;
                };
                let out = dwa_step(&self.costmap, &self.est.pose, &self.twist, path, &self.dwa);
                self.nav = if out.blocked {
                    NavStatus::Blocked
                } else {
                    NavStatus::Ok
                };
                if self.bus.is_some() {
                    self.publish(
                        topics::LOCAL_PLAN,
                        &LocalPlanReport {
                            arc: arc(&self.est.pose, &out.twist, &self.dwa),
                            twist: out.twist,
                            blocked: out.blocked,
                        },
                    );
                }
                out.twist
            }
            Controller::PurePursuit => {
                if fresh {
                    self.planned_goal = Some(goal);
                    self.last_plan = now;
                    self.path = Some(Path::straight(self.est.pose.position(), goal));
                    self.nav = NavStatus::Ok;
                }
                let path = self.path.as_ref().expect("leg set with the goal");
                self.pursuit.command(&self.est.pose, path)
            }
        }
    }

    fn localize(&mut self, odom: &Pose2D, scan: &LaserScan, t: f64) {
        match &mut self.localizer {
            Localizer::Fused(slam) => self.est = slam.process(odom, scan),
            Localizer::Dead(d) => {
                let noise = self.scenario.noise;
                if d.gps {
                    let bearing = sim_compass(
                        &self.state.true_pose,
                        &self.truth,
                        &noise,
                        &mut self.streams.compass,
                    );
                    let theta = normalize_angle(
                        enu_heading_from_bearing(bearing) - self.belief.heading_offset,
                    );
                    let mut position = d.pose.position();
                    if t + 1e-9 >= self.next_gps {
                        self.next_gps += self.config.gps_period;
                        let fix = sim_gps(
                            &self.state.true_pose,
                            &self.truth,
                            &noise,
                            &mut self.streams.gps,
                        );
                        if let Ok(p) = self.belief.to_local(&fix) {
                            position = p;
                        }
                    }
                    d.pose = Pose2D::new(position.x, position.y, theta);
                } else {
                    d.pose = d.pose.compose(odom);
                }
                d.integrate(scan, odom, false);
                self.est = LocalizationEstimate {
                    pose: d.pose,
                    position_rms: if d.gps { noise.gps_std } else { 0.0 },
                };
            }
        }
    }

    fn camera(&mut self) {
        let gates = self.executor.gates(self.twist.v);
        if !gates.alpr_active {
            return;
        }
        let found = observe(
            &self.scenario.world,
            &self.walls,
            &self.state.true_pose,
            &self.est.pose,
            &self.belief,
            &self.config.camera,
            &gates,
            self.timestamp(),
            &mut self.streams.camera,
        );
        for s in found {
            self.publish(topics::SIGHTING, &s);
            self.sightings.push(s);
        }
    }

    /// Final metrics and artifacts.
    pub fn finish(self) -> RunOutcome {
        let metrics = RunMetrics::collect(&self);
        let map = self.map().clone();
        RunOutcome {
            trajectory: self.trajectory,
            sightings: self.sightings,
            map,
            metrics,
        }
    }
}

/// Runs `scenario` under `config`, optionally with a mission, until the mission ends or
/// the time limit. An unfinished mission is aborted at the limit.
pub fn run(
    scenario: &Scenario,
    mission: Option<Mission>,
    config: &RunConfig,
) -> Result<RunOutcome, RunError> {
    let mut runner = SimRunner::new(scenario.clone(), config.clone())?;
    let has_mission = mission.is_some();
    if let Some(m) = mission {
        runner.load_mission(m)?;
    }
    for _ in 0..config.ticks() {
        runner.step();
        if has_mission && config.stop_when_done && runner.phase().is_terminal() {
            break;
        }
    }
    if runner.phase().is_active() {
        runner.abort_mission("time limit");
    }
    Ok(runner.finish())
}
