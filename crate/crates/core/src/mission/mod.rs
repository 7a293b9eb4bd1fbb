//! Waypoint mission executor: GPS waypoints to local goals, sequencing, ALPR gating,
//! return to the station and reference resync on docking.

use serde::{Deserialize, Serialize};

use crate::error::MissionError;
use crate::geo::{GeoPoint, GeoReference};
use crate::geometry::Point2D;
use crate::slam::LocalizationEstimate;

pub const DEFAULT_TOLERANCE: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mission {
    pub id: String,
    pub waypoints: Vec<GeoPoint>,
    #[serde(default = "default_tolerance")]
    pub arrival_tolerance: f64,
    #[serde(default)]
    pub created_at: u64,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

impl Mission {
    pub fn new(id: impl Into<String>, waypoints: Vec<GeoPoint>) -> Self {
        Self {
            id: id.into(),
            waypoints,
            arrival_tolerance: DEFAULT_TOLERANCE,
            created_at: 0,
        }
    }

    /// Parses and validates a mission document; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self, MissionError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let m: Mission = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            MissionError::Malformed(if path == "." {
                inner.to_string()
            } else {
                format!("{path}: {inner}")
            })
        })?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), MissionError> {
        if self.waypoints.is_empty() {
            return Err(MissionError::EmptyMission);
        }
        if !(self.arrival_tolerance > 0.0 && self.arrival_tolerance.is_finite()) {
            return Err(MissionError::BadTolerance);
        }
        for (index, w) in self.waypoints.iter().enumerate() {
            w.validate()
                .map_err(|source| MissionError::Waypoint { index, source })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", content = "detail", rename_all = "snake_case")]
pub enum Phase {
    Idle,
    Navigating(usize),
    Docking,
    Completed,
    Aborted(String),
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Idle => "idle",
            Phase::Navigating(_) => "navigating",
            Phase::Docking => "docking",
            Phase::Completed => "completed",
            Phase::Aborted(_) => "aborted",
        }
    }

    pub fn is_active(&self) -> bool {
        matches!(self, Phase::Navigating(_) | Phase::Docking)
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Phase::Completed | Phase::Aborted(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionState {
    pub phase: Phase,
    pub active_mission: Option<Mission>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModuleGates {
    pub alpr_active: bool,
}

/// What the navigation stack reported for the current goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NavStatus {
    #[default]
    Ok,
    Blocked,
    NoPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecutorConfig {
    /// ALPR runs only above this speed, m/s.
    pub v_gate: f64,
    /// Continuous blocked/no-path time before aborting, seconds.
    pub abort_after: f64,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        Self {
            v_gate: 0.05,
            abort_after: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub waypoint: usize,
    pub time: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickOutput {
    pub phase: Phase,
    pub goal: Option<Point2D>,
    pub gates: ModuleGates,
    /// Set on the tick the estimate first comes within tolerance of the station.
    pub dock_arrived: bool,
    pub changed: bool,
}

#[derive(Debug, Clone)]
pub struct MissionExecutor {
    config: ExecutorConfig,
    state: MissionState,
    goals: Vec<Point2D>,
    station: Point2D,
    stuck_since: Option<f64>,
    arrivals: Vec<Arrival>,
    /// The estimate reached the station during this mission's Docking phase.
    dock_reached: bool,
}

impl MissionExecutor {
    /// `station` is the charging station's local position, the docking goal.
    pub fn new(station: Point2D, config: ExecutorConfig) -> Self {
        Self {
            config,
            state: MissionState {
                phase: Phase::Idle,
                active_mission: None,
            },
            goals: Vec::new(),
            station,
            stuck_since: None,
            arrivals: Vec::new(),
            dock_reached: false,
        }
    }

    pub fn state(&self) -> &MissionState {
        &self.state
    }

    pub fn phase(&self) -> &Phase {
        &self.state.phase
    }

    pub fn goals(&self) -> &[Point2D] {
        &self.goals
    }

    pub fn arrivals(&self) -> &[Arrival] {
        &self.arrivals
    }

    pub fn station(&self) -> Point2D {
        self.station
    }

    /// Converts the waypoints to local goals and starts navigating to the first.
    /// Allowed when idle or after the previous mission finished.
    pub fn load_mission(
        &mut self,
        mission: Mission,
        reference: &GeoReference,
    ) -> Result<Vec<Point2D>, MissionError> {
        if self.state.phase.is_active() {
            return Err(MissionError::MissionInProgress);
        }
        mission.validate()?;
        let mut goals = Vec::with_capacity(mission.waypoints.len());
        for (index, w) in mission.waypoints.iter().enumerate() {
            match reference.to_local(w) {
                Ok(p) => goals.push(p),
                Err(source) => {
                    let err = MissionError::Waypoint { index, source };
                    self.state = MissionState {
                        phase: Phase::Aborted(err.to_string()),
                        active_mission: Some(mission),
                    };
                    self.goals.clear();
                    return Err(err);
                }
            }
        }
        self.goals = goals.clone();
        self.arrivals.clear();
        self.dock_reached = false;
        self.stuck_since = None;
        self.state = MissionState {
            phase: Phase::Navigating(0),
            active_mission: Some(mission),
        };
        Ok(goals)
    }

    fn tolerance(&self) -> f64 {
        self.state
            .active_mission
            .as_ref()
            .map_or(DEFAULT_TOLERANCE, |m| m.arrival_tolerance)
    }

    pub fn current_goal(&self) -> Option<Point2D> {
        match self.state.phase {
            Phase::Navigating(i) => Some(self.goals[i]),
            Phase::Docking => Some(self.station),
            _ => None,
        }
    }

    /// Advances the state machine for one control tick at time `now` (seconds).
    pub fn tick(
        &mut self,
        est: &LocalizationEstimate,
        speed: f64,
        nav: NavStatus,
        now: f64,
    ) -> TickOutput {
        let before = self.state.phase.clone();
        let tol = self.tolerance();
        let here = est.pose.position();
        let mut dock_arrived = false;
        match self.state.phase {
            Phase::Navigating(i) => {
                let d = here.distance(&self.goals[i]);
                if d <= tol {
                    self.arrivals.push(Arrival {
                        waypoint: i,
                        time: now,
                        distance: d,
                    });
                    self.stuck_since = None;
                    self.state.phase = if i + 1 < self.goals.len() {
                        Phase::Navigating(i + 1)
                    } else {
                        Phase::Docking
                    };
                }
            }
            Phase::Docking => {
                dock_arrived = here.distance(&self.station) <= tol;
                self.dock_reached |= dock_arrived;
            }
            _ => {}
        }
        if self.state.phase.is_active() && self.state.phase == before && !dock_arrived {
            if nav == NavStatus::Ok {
                self.stuck_since = None;
            } else {
                let since = *self.stuck_since.get_or_insert(now);
                if now - since > self.config.abort_after {
                    self.state.phase = Phase::Aborted("unreachable".into());
                    self.stuck_since = None;
                }
            }
        }
        let phase = self.state.phase.clone();
        TickOutput {
            changed: phase != before,
            goal: self.current_goal(),
            gates: self.gates(speed),
            dock_arrived,
            phase,
        }
    }

    pub fn gates(&self, speed: f64) -> ModuleGates {
        ModuleGates {
            alpr_active: matches!(self.state.phase, Phase::Navigating(_))
                && speed.abs() > self.config.v_gate,
        }
    }

    /// Confirms docking: re-anchors the GPS reference at the station and completes the mission.
    /// The estimate must be within tolerance of the station, or have been on a tick since
    /// Docking began: the pull onto the contacts may move it after arrival.
    pub fn on_docked(
        &mut self,
        reference: &GeoReference,
        station: GeoPoint,
        station_heading: f64,
        est: &LocalizationEstimate,
    ) -> Result<GeoReference, MissionError> {
        if self.state.phase != Phase::Docking {
            return Err(MissionError::NotDocking);
        }
        let d = est.pose.position().distance(&self.station);
        if d > self.tolerance() && !self.dock_reached {
            return Err(MissionError::NotAtStation { distance_m: d });
        }
        self.state.phase = Phase::Completed;
        Ok(reference.resync(station, station_heading, &est.pose))
    }

    /// Aborts an active mission, e.g. on operator request.
    pub fn abort(&mut self, reason: &str) {
        if self.state.phase.is_active() {
            self.state.phase = Phase::Aborted(reason.to_string());
        }
    }
}
