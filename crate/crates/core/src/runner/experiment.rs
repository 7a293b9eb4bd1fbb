//! Path-error experiment: cross-track error of the true trajectory while following a
//! straight reference path, per localization mode and speed.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{mission_through, Controller, LocalizationMode, RunConfig, SimRunner, TrajectoryRow};
use crate::error::RunError;
use crate::geometry::{Point2D, Segment};
use crate::mission::Phase;
use crate::sim::Scenario;

/// RMS perpendicular distance of the true positions from the segment `from → to`.
pub fn cross_track_rms(rows: &[TrajectoryRow], from: Point2D, to: Point2D) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let path = Segment::new(from, to);
    let sum: f64 = rows
        .iter()
        .map(|r| path.distance_to_point(&r.true_pose.position()).powi(2))
        .sum();
    (sum / rows.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathErrorSetup {
    /// Length of the straight reference path ahead of the station, metres.
    pub length: f64,
    pub speeds: Vec<f64>,
    pub seeds: Vec<u64>,
    pub modes: Vec<LocalizationMode>,
    pub base: RunConfig,
}

impl Default for PathErrorSetup {
    fn default() -> Self {
        Self {
            length: 20.0,
            speeds: vec![0.25, 0.5, 1.0],
            seeds: (1..=5).collect(),
            modes: vec![LocalizationMode::GpsOnly, LocalizationMode::Fused],
            base: RunConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathErrorRow {
    pub mode: LocalizationMode,
    pub speed: f64,
    /// One RMS value per seed, in seed order.
    pub rms: Vec<f64>,
}

impl PathErrorRow {
    pub fn mean(&self) -> f64 {
        self.rms.iter().sum::<f64>() / self.rms.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.rms.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.rms.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Drives the reference leg once and returns the cross-track RMS over the leg.
fn one_run(
    scenario: &Scenario,
    setup: &PathErrorSetup,
    mode: LocalizationMode,
    speed: f64,
    seed: u64,
) -> Result<f64, RunError> {
    let start = scenario.world.station.pose();
    let goal = start.transform_point(&Point2D::new(setup.length, 0.0));
    let config = RunConfig {
        seed,
        mode,
        speed,
        controller: Controller::PurePursuit,
        duration: 1.5 * setup.length / speed + 5.0,
        ..setup.base.clone()
    };
    let ticks = config.ticks();
    let mut runner = SimRunner::new(scenario.clone(), config)?;
    runner.load_mission(mission_through(runner.reference(), "path-error", &[goal]))?;
    for _ in 0..ticks {
        let row = runner.step();
        // the leg ends at arrival, or once the robot has really covered it: held GPS
        // fixes can jump over the arrival circle
        let progress = start.inverse().transform_point(&row.true_pose.position()).x;
        if *runner.phase() != Phase::Navigating(0) || progress >= setup.length {
            break;
        }
    }
    Ok(cross_track_rms(runner.trajectory(), start.position(), goal))
}

/// Runs every (mode, speed, seed) combination, spread over the available cores. Rows come
/// back mode-major in the order of `setup.modes` and `setup.speeds`.
pub fn experiment_path_error(
    scenario: &Scenario,
    setup: &PathErrorSetup,
) -> Result<Vec<PathErrorRow>, RunError> {
    let jobs: Vec<(usize, usize, usize)> = (0..setup.modes.len())
        .flat_map(|m| {
            (0..setup.speeds.len())
                .flat_map(move |s| (0..setup.seeds.len()).map(move |k| (m, s, k)))
        })
        .collect();
    let results: Mutex<Vec<Option<Result<f64, RunError>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(m, s, k)) = jobs.get(i) else { break };
                let r = one_run(
                    scenario,
                    setup,
                    setup.modes[m],
                    setup.speeds[s],
                    setup.seeds[k],
                );
                results.lock().expect("results lock")[i] = Some(r);
            });
        }
    });
    let mut results = results.into_inner().expect("results lock").into_iter();
    let mut rows = Vec::with_capacity(setup.modes.len() * setup.speeds.len());
    for &mode in &setup.modes {
        for &speed in &setup.speeds {
            let rms = (0..setup.seeds.len())
                .map(|_| results.next().flatten().expect("every job ran"))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(PathErrorRow { mode, speed, rms });
        }
    }
    Ok(rows)
}

pub fn path_error_csv(rows: &[PathErrorRow]) -> String {
    let mut out = String::from("mode,speed,seeds,rms_mean,rms_min,rms_max\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.2},{},{:.4},{:.4},{:.4}",
            r.mode,
            r.speed,
            r.rms.len(),
            r.mean(),
            r.min(),
            r.max()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose2D;
    use crate::runner::corridor;
    use crate::sim::NoiseProfile;

    #[test]
    fn rms_of_parallel_offset() {
        let rows: Vec<_> = (0..10)
            .map(|i| TrajectoryRow {
                t: i as f64,
                true_pose: Pose2D::new(i as f64, 0.3, 0.0),
                est_pose: Pose2D::IDENTITY,
            })
            .collect();
        let rms = cross_track_rms(&rows, Point2D::new(0.0, 0.0), Point2D::new(20.0, 0.0));
        assert!((rms - 0.3).abs() < 1e-12);
    }

    #[test]
    fn noiseless_runs_track_exactly() {
        let mut scenario = corridor();
        scenario.noise = NoiseProfile::zero();
        let setup = PathErrorSetup {
            length: 5.0,
            speeds: vec![1.0],
            seeds: vec![1],
            ..PathErrorSetup::default()
        };
        let rows = experiment_path_error(&scenario, &setup).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert!(r.rms[0] < 1e-9, "{:?}", r);
        }
        let csv = path_error_csv(&rows);
        assert_eq!(
            csv.lines().count(),
            1 + setup.modes.len() * setup.speeds.len()
        );
    }
}
