//! Operator commands carried on the mission command topic.

use serde::{Deserialize, Serialize};

use super::SimRunner;
use crate::error::MissionError;
use crate::geo::{enu_heading_from_bearing, GeoPoint};
use crate::mission::Mission;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Load {
        mission: Mission,
    },
    Abort {
        #[serde(default)]
        reason: Option<String>,
    },
    /// Believed position and compass heading (degrees clockwise from north).
    InitialPose {
        lat: f64,
        lon: f64,
        heading: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplyStatus {
    Accepted,
    /// A mission is already running.
    Busy,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandReply {
    pub status: ReplyStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl CommandReply {
    pub fn accepted() -> Self {
        Self {
            status: ReplyStatus::Accepted,
            reason: None,
        }
    }

    pub fn rejected(status: ReplyStatus, reason: impl Into<String>) -> Self {
        Self {
            status,
            reason: Some(reason.into()),
        }
    }
}

impl SimRunner {
    /// Applies an operator command between ticks.
    pub fn apply(&mut self, command: Command) -> CommandReply {
        match command {
            Command::Load { mission } => match self.load_mission(mission) {
                Ok(_) => CommandReply::accepted(),
                Err(MissionError::MissionInProgress) => CommandReply::rejected(
                    ReplyStatus::Busy,
                    MissionError::MissionInProgress.to_string(),
                ),
                Err(e) => CommandReply::rejected(ReplyStatus::Invalid, e.to_string()),
            },
            Command::Abort { reason } => {
                if !self.phase().is_active() {
                    return CommandReply::rejected(ReplyStatus::Invalid, "no active mission");
                }
                self.abort_mission(reason.as_deref().unwrap_or("operator abort"));
                CommandReply::accepted()
            }
            Command::InitialPose { lat, lon, heading } => {
                if !heading.is_finite() {
                    return CommandReply::rejected(ReplyStatus::Invalid, "heading must be finite");
                }
                let applied = GeoPoint::new(lat, lon).and_then(|p| {
                    self.set_initial_pose(p, enu_heading_from_bearing(heading.to_radians()))
                });
                match applied {
                    Ok(()) => CommandReply::accepted(),
                    Err(e) => CommandReply::rejected(ReplyStatus::Invalid, e.to_string()),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2D;
    use crate::mission::Phase;
    use crate::runner::{corridor, mission_through, RunConfig};

    fn runner() -> SimRunner {
        let config = RunConfig {
            particles: 50,
            ..RunConfig::default()
        };
        SimRunner::new(corridor(), config).unwrap()
    }

    #[test]
    fn commands_round_trip_as_json() {
        let c: Command = serde_json::from_str(
            r#"{"command":"initial_pose","lat":25.0,"lon":51.0,"heading":90}"#,
        )
        .unwrap();
        assert_eq!(
            c,
            Command::InitialPose {
                lat: 25.0,
                lon: 51.0,
                heading: 90.0
            }
        );
        let abort: Command = serde_json::from_str(r#"{"command":"abort"}"#).unwrap();
        assert_eq!(abort, Command::Abort { reason: None });
    }

    #[test]
    fn second_load_is_busy_then_abort_frees() {
        let mut r = runner();
        let m = mission_through(r.reference(), "a", &[Point2D::new(10.0, 6.0)]);
        assert_eq!(
            r.apply(Command::Load { mission: m.clone() }).status,
            ReplyStatus::Accepted
        );
        assert_eq!(
            r.apply(Command::Load { mission: m.clone() }).status,
            ReplyStatus::Busy
        );
        assert_eq!(
            r.apply(Command::Abort { reason: None }).status,
            ReplyStatus::Accepted
        );
        assert_eq!(r.phase(), &Phase::Aborted("operator abort".into()));
        assert_eq!(
            r.apply(Command::Abort { reason: None }).status,
            ReplyStatus::Invalid
        );
        assert_eq!(
            r.apply(Command::Load { mission: m }).status,
            ReplyStatus::Accepted
        );
    }

    #[test]
    fn initial_pose_moves_the_estimate() {
        let mut r = runner();
        let target = r.reference().to_gps(&Point2D::new(6.0, 7.0)).unwrap();
        let reply = r.apply(Command::InitialPose {
            lat: target.lat,
            lon: target.lon,
            heading: 0.0,
        });
        assert_eq!(reply, CommandReply::accepted());
        let p = r.estimate().pose;
        assert!(p.position().distance(&Point2D::new(6.0, 7.0)) < 1e-6);
        // due north is +y with no heading offset
        assert!((p.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        let bad = r.apply(Command::InitialPose {
            lat: 95.0,
            lon: 0.0,
            heading: 0.0,
        });
        assert_eq!(bad.status, ReplyStatus::Invalid);
    }
}
