use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LocalizationMode, RunOutcome, SimRunner, TrajectoryRow};
use crate::alpr::Sighting;
use crate::geo::format_degrees;
use crate::geometry::Pose2D;
use crate::mission::{Arrival, Phase};
use crate::slam::MappingParams;

pub const TRAJECTORY_HEADER: &str = "t,true_x,true_y,true_theta,est_x,est_y,est_theta";
pub const SIGHTINGS_HEADER: &str =
    "timestamp,plate_read,true_plate,confidence,lat,lon,x,y,robot_x,robot_y,robot_theta";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub mode: LocalizationMode,
    pub seed: u64,
    pub ticks: usize,
    pub sim_time: f64,
    pub final_phase: Phase,
    pub arrivals: Vec<Arrival>,
    pub resyncs: usize,
    pub sightings: usize,
    pub distinct_plates: usize,
    /// RMS distance between estimated and true positions over the run.
    pub localization_rms: f64,
    pub final_position_error: f64,
    pub distance_travelled: f64,
}

impl RunMetrics {
    pub(super) fn collect(r: &SimRunner) -> Self {
        let rows = &r.trajectory;
        let err = |row: &TrajectoryRow| row.true_pose.position().distance(&row.est_pose.position());
        let localization_rms = if rows.is_empty() {
            0.0
        } else {
            (rows.iter().map(|row| err(row).powi(2)).sum::<f64>() / rows.len() as f64).sqrt()
        };
        let start = r.scenario.world.station.pose().position();
        let distance_travelled = rows
            .iter()
            .scan(start, |prev, row| {
                let p = row.true_pose.position();
                let d = prev.distance(&p);
                *prev = p;
                Some(d)
            })
            .sum();
        Self {
            mode: r.config.mode,
            seed: r.config.seed,
            ticks: rows.len(),
            sim_time: r.time(),
            final_phase: r.executor.phase().clone(),
            arrivals: r.executor.arrivals().to_vec(),
            resyncs: r.resyncs,
            sightings: r.sightings.len(),
            distinct_plates: r
                .sightings
                .iter()
                .map(|s| s.plate_read.as_str())
                .collect::<BTreeSet<_>>()
                .len(),
            localization_rms,
            final_position_error: rows.last().map_or(0.0, err),
            distance_travelled,
        }
    }
}

fn pose_fields(out: &mut String, p: &Pose2D) {
    let _ = write!(out, "{:.6},{:.6},{:.6}", p.x, p.y, p.theta);
}

pub fn trajectory_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{:.3},", r.t);
        pose_fields(&mut out, &r.true_pose);
        out.push(',');
        pose_fields(&mut out, &r.est_pose);
        out.push('\n');
    }
    out
}

/// Parses a trajectory log written by [`trajectory_csv`].
pub fn read_trajectory(text: &str) -> io::Result<Vec<TrajectoryRow>> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != TRAJECTORY_HEADER {
        return Err(bad(format!("unexpected trajectory header {header:?}")));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let v = rec
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad(format!("row {}: {e}", i + 2)))?;
            if v.len() != 7 {
                return Err(bad(format!("row {}: expected 7 fields", i + 2)));
            }
            Ok(TrajectoryRow {
                t: v[0],
                true_pose: Pose2D::new(v[1], v[2], v[3]),
                est_pose: Pose2D::new(v[4], v[5], v[6]),
            })
        })
        .collect()
}

pub fn sightings_csv(sightings: &[Sighting]) -> String {
    let mut out = String::from(SIGHTINGS_HEADER);
    out.push('\n');
    for s in sightings {
        let _ = write!(
            out,
            "{},{},{},{:.4},{},{},{:.4},{:.4},",
            s.timestamp,
            s.plate_read,
            s.true_plate,
            s.confidence,
            format_degrees(s.car_position.lat),
            format_degrees(s.car_position.lon),
            s.car_local.x,
            s.car_local.y,
        );
        pose_fields(&mut out, &s.robot_pose);
        out.push('\n');
    }
    out
}

/// Writes trajectory.csv, map.pgm, map.yaml, sightings.csv and metrics.json into `dir`.
pub fn write_artifacts(dir: &Path, outcome: &RunOutcome) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let p = MappingParams::default();
    fs::write(
        dir.join("trajectory.csv"),
        trajectory_csv(&outcome.trajectory),
    )?;
    fs::write(
        dir.join("map.pgm"),
        outcome
            .map
            .pgm_bytes(p.occupied_threshold, p.free_threshold),
    )?;
    fs::write(
        dir.join("map.yaml"),
        outcome
            .map
            .sidecar_text("map.pgm", p.occupied_threshold, p.free_threshold),
    )?;
    fs::write(dir.join("sightings.csv"), sightings_csv(&outcome.sightings))?;
    let metrics = serde_json::to_string_pretty(&outcome.metrics).map_err(io::Error::other)?;
    fs::write(dir.join("metrics.json"), metrics + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_round_trips_through_csv() {
        let rows = vec![
            TrajectoryRow {
                t: 0.05,
                true_pose: Pose2D::new(1.0, 2.0, 0.5),
                est_pose: Pose2D::new(1.01, 2.0, 0.49),
            },
            TrajectoryRow {
                t: 0.1,
                true_pose: Pose2D::new(-3.25, 0.125, -1.0),
                est_pose: Pose2D::new(-3.0, 0.0, -1.25),
            },
        ];
        let text = trajectory_csv(&rows);
        assert!(text.starts_with(TRAJECTORY_HEADER));
        assert_eq!(read_trajectory(&text).unwrap(), rows);
    }

    #[test]
    fn foreign_header_is_rejected() {
        assert!(read_trajectory("a,b\n1,2\n").is_err());
    }
}
