use std::fs::{self, File};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use haris_core::alpr::{evaluate, export_pr_curve, read_detections, read_ground_truth, report_csv};
use haris_core::mission::{Mission, Phase};
use haris_core::runner::{
    corridor, experiment_path_error, genworld as generate, lane_mission, path_error_csv,
    run as simulate, write_artifacts, PathErrorSetup, RunConfig,
};
use haris_core::sim::Scenario;

use crate::{EvalArgs, ExperimentArgs, GenworldArgs, RunArgs, SimArgs};

/// Exit status of a run whose mission was aborted.
pub const EXIT_ABORTED: u8 = 3;

pub fn load_world(path: Option<&Path>) -> Result<Scenario> {
    match path {
        Some(p) => Scenario::load(p).with_context(|| format!("world file {}", p.display())),
        None => Ok(corridor()),
    }
}

pub fn load_mission(path: &Path) -> Result<Mission> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Mission::from_json(&text).with_context(|| format!("mission file {}", path.display()))
}

impl SimArgs {
    pub fn config(&self) -> RunConfig {
        RunConfig {
            seed: self.seed,
            mode: self.mode,
            controller: self.controller.into(),
            speed: self.speed,
            particles: self.particles,
            ..RunConfig::default()
        }
    }
}

pub fn run(args: &RunArgs) -> Result<ExitCode> {
    let scenario = load_world(args.sim.world.as_deref())?;
    let mission = match (&args.mission, args.sweep) {
        (Some(p), _) => Some(load_mission(p)?),
        (None, true) => Some(lane_mission(
            &scenario.world,
            &scenario.world.reference(),
            "sweep",
        )),
        (None, false) => None,
    };
    let config = RunConfig {
        duration: args.duration,
        dt: args.dt,
        ..args.sim.config()
    };
    let outcome = simulate(&scenario, mission, &config)?;
    write_artifacts(&args.out, &outcome)
        .with_context(|| format!("writing artifacts to {}", args.out.display()))?;
    let m = &outcome.metrics;
    println!(
        "{} after {:.2} s: {} arrivals, {} sightings of {} plates, localization rms {:.3} m",
        m.final_phase.name(),
        m.sim_time,
        m.arrivals.len(),
        m.sightings,
        m.distinct_plates,
        m.localization_rms
    );
    println!("artifacts in {}", args.out.display());
    Ok(match &m.final_phase {
        Phase::Aborted(reason) => {
            eprintln!("mission aborted: {reason}");
            ExitCode::from(EXIT_ABORTED)
        }
        _ => ExitCode::SUCCESS,
    })
}

pub fn experiment(args: &ExperimentArgs) -> Result<ExitCode> {
    if args.speeds.is_empty() || args.seeds == 0 {
        bail!("need at least one speed and one seed");
    }
    if let Some(&v) = args.speeds.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        bail!("speeds: {v} is not a positive speed");
    }
    let mut scenario = load_world(args.world.as_deref())?;
    if let Some(g) = args.gps_std {
        scenario.noise.gps_std = g;
        scenario.validate().context("--gps-std")?;
    }
    let setup = PathErrorSetup {
        length: args.length,
        speeds: args.speeds.clone(),
        seeds: (1..=args.seeds).collect(),
        base: RunConfig {
            particles: args.particles,
            ..RunConfig::default()
        },
        ..PathErrorSetup::default()
    };
    let rows = experiment_path_error(&scenario, &setup)?;
    let csv = path_error_csv(&rows);
    fs::create_dir_all(&args.out)?;
    let path = args.out.join("path_error.csv");
    fs::write(&path, &csv)?;
    println!(
        "{:<9} {:>6} {:>10} {:>10} {:>10}",
        "mode", "speed", "rms mean", "rms min", "rms max"
    );
    for r in &rows {
        println!(
            "{:<9} {:>6.2} {:>10.4} {:>10.4} {:>10.4}",
            r.mode.as_str(),
            r.speed,
            r.mean(),
            r.min(),
            r.max()
        );
    }
    println!("table in {}", path.display());
    Ok(ExitCode::SUCCESS)
}

pub fn eval(args: &EvalArgs) -> Result<ExitCode> {
    let open = |p: &Path| File::open(p).with_context(|| format!("cannot open {}", p.display()));
    let dets = read_detections(open(&args.detections)?)
        .with_context(|| args.detections.display().to_string())?;
    let gts = read_ground_truth(open(&args.groundtruth)?)
        .with_context(|| args.groundtruth.display().to_string())?;
    let report = evaluate(&dets, &gts, args.iou);
    let table = report_csv(&report);
    print!("{table}");
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.csv"), &table)?;
        fs::write(dir.join("pr_curve.csv"), export_pr_curve(&report))?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn genworld(args: &GenworldArgs) -> Result<ExitCode> {
    if args.rows == 0 || args.cols == 0 {
        bail!("rows and cols must be at least 1");
    }
    if !(args.spacing > 0.0 && args.spacing.is_finite()) {
        bail!("spacing must be positive");
    }
    let json = generate(args.rows, args.cols, args.spacing, args.seed).to_json() + "\n";
    match &args.out {
        Some(p) => fs::write(p, json).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}
