//! Built-in worlds, the parking-lot generator and lane-following missions.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::FRAC_PI_2;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::geo::GeoReference;
use crate::geometry::Point2D;
use crate::mission::Mission;
use crate::sim::{
    rng, Bounds, NoiseProfile, ParkedCar, Scenario, Station, VehicleClass, Wall, WorldModel,
};

/// Label proportions of the generated lots, in `VehicleClass::ALL` order.
pub const CLASS_WEIGHTS: [f64; 4] = [0.80, 0.12, 0.06, 0.02];

const STATION_LAT: f64 = 25.3752;
const STATION_LON: f64 = 51.4897;
const SLOT_DEPTH: f64 = 5.2;
const AISLE: f64 = 6.0;
const LOT_START_X: f64 = 5.0;
/// Lateral gap between a lane and the car fronts it passes.
const LANE_GAP: f64 = 2.0;

fn perimeter(b: &Bounds) -> Vec<Wall> {
    let c = [
        (b.min_x, b.min_y),
        (b.max_x, b.min_y),
        (b.max_x, b.max_y),
        (b.min_x, b.max_y),
    ];
    (0..4)
        .map(|i| {
            let (a, z) = (c[i], c[(i + 1) % 4]);
            Wall {
                x1: a.0,
                y1: a.1,
                x2: z.0,
                y2: z.1,
            }
        })
        .collect()
}

fn pillar(x: f64, y: f64, half: f64) -> Vec<Wall> {
    let b = Bounds {
        min_x: x - half,
        min_y: y - half,
        max_x: x + half,
        max_y: y + half,
    };
    perimeter(&b)
}

fn footprint(class: VehicleClass) -> (f64, f64) {
    match class {
        VehicleClass::Car => (4.5, 1.8),
        VehicleClass::Truck => (5.0, 2.2),
        VehicleClass::Bus => (5.0, 2.4),
        VehicleClass::Motorbike => (2.2, 0.8),
    }
}

/// 32 × 14 m hall with pillars along one side and a row of parked cars along the other;
/// the station faces down the hall with 20 m of clear floor ahead.
pub fn corridor() -> Scenario {
    let bounds = Bounds {
        min_x: 0.0,
        min_y: 0.0,
        max_x: 32.0,
        max_y: 14.0,
    };
    let mut walls = perimeter(&bounds);
    for k in 0..5 {
        walls.extend(pillar(4.0 + 6.0 * k as f64, 2.0, 0.2));
    }
    let cars = (0..9)
        .map(|j| ParkedCar {
            plate: format!("{}", 40100 + 111 * j),
            x: 5.0 + 3.0 * j as f64,
            y: 11.4,
            theta: -FRAC_PI_2,
            length: 4.5,
            width: 1.8,
            class: VehicleClass::Car,
        })
        .collect();
    Scenario {
        world: WorldModel {
            bounds,
            walls,
            cars,
            station: Station {
                x: 4.0,
                y: 6.0,
                theta: 0.0,
                lat: STATION_LAT,
                lon: STATION_LON,
                heading_offset: 0.0,
            },
        },
        noise: NoiseProfile::default(),
        seed: 0,
    }
}

/// Class labels for `n` bays in the configured proportions (largest-remainder rounding).
fn class_quota(n: usize) -> Vec<VehicleClass> {
    let exact: Vec<f64> = CLASS_WEIGHTS.iter().map(|w| w * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..exact.len()).collect();
    order.sort_by(|&a, &b| {
        (exact[b] - exact[b].floor())
            .total_cmp(&(exact[a] - exact[a].floor()))
            .then(a.cmp(&b))
    });
    let short = n - counts.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        counts[i] += 1;
    }
    VehicleClass::ALL
        .iter()
        .zip(counts)
        .flat_map(|(&c, k)| std::iter::repeat_n(c, k))
        .collect()
}

fn plate<R: Rng>(rng: &mut R, taken: &mut HashSet<String>) -> String {
    loop {
        let len = rng.random_range(5..=6);
        let mut s = String::with_capacity(len);
        s.push(char::from(b'1' + rng.random_range(0..9u8)));
        for _ in 1..len {
            s.push(char::from(b'0' + rng.random_range(0..10u8)));
        }
        if taken.insert(s.clone()) {
            return s;
        }
    }
}

/// Grid parking lot: `rows` rows of `cols` bays `spacing` metres apart, rows paired
/// nose to nose across 6 m aisles, inside a walled perimeter. Class labels are dealt
/// in the configured proportions and shuffled; plates and the shuffle come from `seed`.
pub fn genworld(rows: usize, cols: usize, spacing: f64, seed: u64) -> Scenario {
    assert!(rows >= 1 && cols >= 1, "rows and cols must be at least 1");
    assert!(spacing > 0.0, "spacing must be positive");
    let mut rng = rng::stream(seed, "genworld");
    let mut taken = HashSet::new();

    let mut cars = Vec::with_capacity(rows * cols);
    let mut y = 1.0;
    let mut first_aisle = None;
    let mut labels = class_quota(rows * cols);
    labels.shuffle(&mut rng);
    let mut labels = labels.into_iter();
    for r in 0..rows {
        // even rows face up into the aisle above them, odd rows face down into it
        let facing_up = r % 2 == 0;
        let centre = y + SLOT_DEPTH / 2.0;
        if facing_up {
            first_aisle.get_or_insert(y + SLOT_DEPTH + AISLE / 2.0);
        }
        for c in 0..cols {
            let class = labels.next().expect("one label per bay");
            let (length, width) = footprint(class);
            cars.push(ParkedCar {
                plate: plate(&mut rng, &mut taken),
                x: LOT_START_X + spacing * (c as f64 + 0.5),
                y: centre,
                theta: if facing_up { FRAC_PI_2 } else { -FRAC_PI_2 },
                length,
                width: width.min(spacing * 0.8),
                class,
            });
        }
        y += SLOT_DEPTH;
        y += if facing_up { AISLE } else { 0.4 };
    }
    // a lone last row still gets its aisle
    let max_y = if rows % 2 == 1 { y + 1.0 } else { y + 0.6 };
    let bounds = Bounds {
        min_x: 0.0,
        min_y: 0.0,
        max_x: LOT_START_X + spacing * cols as f64 + 4.0,
        max_y,
    };
    Scenario {
        world: WorldModel {
            walls: perimeter(&bounds),
            bounds,
            cars,
            station: Station {
                x: 2.0,
                y: first_aisle.expect("at least one row"),
                theta: 0.0,
                lat: STATION_LAT,
                lon: STATION_LON,
                heading_offset: 0.0,
            },
        },
        noise: NoiseProfile::default(),
        seed,
    }
}

/// Mission through local points, expressed in GPS through `reference`.
pub fn mission_through(reference: &GeoReference, id: &str, points: &[Point2D]) -> Mission {
    let waypoints = points
        .iter()
        .map(|p| {
            reference
                .to_gps(p)
                .expect("waypoint within projection range")
        })
        .collect();
    Mission::new(id, waypoints)
}

/// Boustrophedon sweep of every row of parked cars: one lane per row, driven in the
/// direction that keeps the row on the robot's left where the camera looks.
pub fn lane_mission(world: &WorldModel, reference: &GeoReference, id: &str) -> Mission {
    // rows keyed by centre line (decimetres) and facing
    let mut rows: BTreeMap<(i64, bool), Vec<&ParkedCar>> = BTreeMap::new();
    for car in &world.cars {
        rows.entry(((car.y * 10.0).round() as i64, car.theta.sin() > 0.0))
            .or_default()
            .push(car);
    }
    let mut lanes: Vec<(f64, bool, f64, f64)> = rows
        .into_iter()
        .map(|((_, up), cars)| {
            let y = cars[0].y;
            let half = cars.iter().map(|c| c.length / 2.0).fold(0.0, f64::max);
            let lo = cars.iter().map(|c| c.x).fold(f64::INFINITY, f64::min) - 1.0;
            let hi = cars.iter().map(|c| c.x).fold(f64::NEG_INFINITY, f64::max) + 1.0;
            // a row facing up has its lane above it and is passed heading -x
            let lane_y = if up {
                y + half + LANE_GAP
            } else {
                y - half - LANE_GAP
            };
            (lane_y, !up, lo, hi)
        })
        .collect();
    lanes.sort_by(|a, b| a.0.total_cmp(&b.0));
    // the two lanes of one aisle: outbound (+x) first
    let mut i = 0;
    while i + 1 < lanes.len() {
        if (lanes[i + 1].0 - lanes[i].0).abs() < AISLE && !lanes[i].1 && lanes[i + 1].1 {
            lanes.swap(i, i + 1);
            i += 2;
        } else {
            i += 1;
        }
    }
    let points: Vec<Point2D> = lanes
        .iter()
        .flat_map(|&(y, forward, lo, hi)| {
            let (a, b) = if forward { (lo, hi) } else { (hi, lo) };
            [Point2D::new(a, y), Point2D::new(b, y)]
        })
        .collect();
    mission_through(reference, id, &points)
}
