//! Fixtures shared by the benchmarks: the generated parking lot, a scan taken in it,
//! and a synthetic detection set.

use haris_core::alpr::{BBox, DetectionRecord, GroundTruthRecord};
use haris_core::geometry::ScanSpec;
use haris_core::navigation::{inflate, rasterize_world, Costmap};
use haris_core::runner::genworld;
use haris_core::sim::{rng::stream, sim_lidar, NoiseProfile, Obstacles, Scenario, VehicleClass};
use haris_core::slam::MappingParams;
use haris_core::{GridMap, LaserScan, Point2D, Pose2D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const RESOLUTION: f64 = 0.05;

pub struct Lot {
    pub scenario: Scenario,
    pub map: GridMap,
    pub costmap: Costmap,
    pub pose: Pose2D,
    pub scan: LaserScan,
}

/// A 2×10 lot rasterized at 5 cm, with one nominal-noise scan from the lane centre.
pub fn lot() -> Lot {
    let scenario = genworld(2, 10, 3.0, 7);
    let params = MappingParams::default();
    let map = rasterize_world(&scenario.world, RESOLUTION, 1.0, &params);
    let costmap = inflate(&map, 0.35, &params);
    let b = &scenario.world.bounds;
    let pose = Pose2D::new(
        (b.min().x + b.max().x) / 2.0,
        (b.min().y + b.max().y) / 2.0,
        0.3,
    );
    let obstacles = Obstacles::new(scenario.world.segments());
    let scan = sim_lidar(
        &obstacles,
        &pose,
        &ScanSpec::default(),
        &NoiseProfile::default(),
        &mut stream(1, "bench"),
    );
    Lot {
        scenario,
        map,
        costmap,
        pose,
        scan,
    }
}

/// Opposite corners of the drivable area, inside the free margin.
pub fn corners(lot: &Lot) -> (Point2D, Point2D) {
    let b = &lot.scenario.world.bounds;
    (
        Point2D::new(b.min().x + 0.8, b.min().y + 0.8),
        Point2D::new(b.max().x - 0.8, b.max().y - 0.8),
    )
}

/// `frames` frames of about 5 labels each; every label has a jittered detection and
/// one frame in four gets a spurious one.
pub fn detections(frames: usize, seed: u64) -> (Vec<DetectionRecord>, Vec<GroundTruthRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut dets, mut gts) = (Vec::new(), Vec::new());
    for f in 0..frames {
        let frame_id = format!("f{f:05}");
        for _ in 0..rng.random_range(3..8) {
            let class = VehicleClass::ALL[rng.random_range(0..VehicleClass::ALL.len())];
            let bbox = BBox {
                x: rng.random_range(0.0..600.0),
                y: rng.random_range(0.0..400.0),
                w: rng.random_range(20.0..120.0),
                h: rng.random_range(20.0..80.0),
            };
            let jitter = |v: f64, rng: &mut ChaCha8Rng| v + rng.random_range(-6.0..6.0);
            dets.push(DetectionRecord {
                frame_id: frame_id.clone(),
                class,
                bbox: BBox {
                    x: jitter(bbox.x, &mut rng),
                    y: jitter(bbox.y, &mut rng),
                    ..bbox
                },
                confidence: rng.random(),
            });
            gts.push(GroundTruthRecord {
                frame_id: frame_id.clone(),
                class,
                bbox,
            });
        }
        if f % 4 == 0 {
            dets.push(DetectionRecord {
                frame_id: frame_id.clone(),
                class: VehicleClass::Car,
                bbox: BBox {
                    x: rng.random_range(0.0..600.0),
                    y: rng.random_range(0.0..400.0),
                    w: 50.0,
                    h: 40.0,
                },
                confidence: rng.random(),
            });
        }
    }
    (dets, gts)
}
