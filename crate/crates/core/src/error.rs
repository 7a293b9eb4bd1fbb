use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("frame not found: {0}")]
    FrameNotFound(String),
    #[error("frame already exists: {0}")]
    DuplicateFrame(String),
    #[error("the root frame has no parent transform")]
    RootHasNoParent,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error(
        "out of projection range: {distance_m:.1} m from the reference (limit {limit_m:.0} m)"
    )]
    OutOfProjectionRange { distance_m: f64, limit_m: f64 },
    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("unreachable endpoint")]
    UnreachableEndpoint,
    #[error("no path")]
    NoPath,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MissionError {
    #[error("mission in progress")]
    MissionInProgress,
    #[error("mission has no waypoints")]
    EmptyMission,
    #[error("arrival tolerance must be positive")]
    BadTolerance,
    #[error("docking confirmation outside the docking phase")]
    NotDocking,
    #[error("robot is not at the station ({distance_m:.3} m away)")]
    NotAtStation { distance_m: f64 },
    #[error("waypoints[{index}]: {source}")]
    Waypoint { index: usize, source: GeoError },
    #[error("malformed mission: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BusError {
    #[error("invalid topic {0:?}")]
    InvalidTopic(String),
    #[error("invalid subscription pattern {0:?}")]
    InvalidPattern(String),
    #[error("request timed out after {0} ms")]
    Timeout(u64),
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("empty plate string")]
    EmptyPlate,
    #[error("confidence {0} outside [0, 1]")]
    InvalidConfidence(f64),
    #[error("journal i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("line {line}: unknown class label {label:?}")]
    UnknownClass { line: usize, label: String },
    #[error("bad header: expected {expected:?}, found {found:?}")]
    Header { expected: String, found: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("invalid field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ScenarioError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid run configuration: {field}: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Mission(#[from] MissionError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
