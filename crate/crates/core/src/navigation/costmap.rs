use serde::{Deserialize, Serialize};

use crate::geometry::{CellIndex, GridMap, Point2D, Segment};
use crate::sim::WorldModel;
use crate::slam::{distance_transform, MappingParams};

pub const FREE: u8 = 0;
pub const MAX_INFLATED: u8 = 253;
pub const LETHAL: u8 = 254;
pub const UNKNOWN: u8 = 255;

/// Planning costs derived from an occupancy grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Costmap {
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    pub origin: Point2D,
    pub inflation_radius: f64,
    pub cost: Vec<u8>,
    /// Metres from each cell centre to the nearest lethal cell centre.
    clearance: Vec<f32>,
}

/// Marks occupied cells lethal and surrounds them with an exponentially decaying cost
/// that reaches 1 at `radius`. Never-observed cells become unknown.
pub fn inflate(map: &GridMap, radius: f64, params: &MappingParams) -> Costmap {
    assert!(radius >= 0.0, "inflation radius must be non-negative");
    let occupied_l = params.occupied_log_odds();
    let lethal: Vec<bool> = map.cells.iter().map(|&l| l > occupied_l).collect();
    let any_lethal = lethal.iter().any(|&b| b);
    let dist: Vec<f64> = if any_lethal {
        distance_transform(&lethal, map.width, map.height)
            .into_iter()
            .map(|d| d * map.resolution)
            .collect()
    } else {
        vec![f64::INFINITY; lethal.len()]
    };
    // decay chosen so cost falls from 253 at contact to 1 at the radius
    let decay = if radius > 0.0 {
        (f64::from(MAX_INFLATED)).ln() / radius
    } else {
        0.0
    };
    let cost = map
        .cells
        .iter()
        .zip(&dist)
        .map(|(&l, &d)| {
            if l > occupied_l {
                LETHAL
            } else if l == 0.0 {
                UNKNOWN
            } else if radius > 0.0 && d <= radius + 1e-9 {
                (f64::from(MAX_INFLATED) * (-decay * d).exp())
                    .round()
                    .clamp(1.0, f64::from(MAX_INFLATED)) as u8
            } else {
                FREE
            }
        })
        .collect();
    Costmap {
        resolution: map.resolution,
        width: map.width,
        height: map.height,
        origin: map.origin,
        inflation_radius: radius,
        cost,
        clearance: dist.into_iter().map(|d| d.min(1e6) as f32).collect(),
    }
}

impl Costmap {
    pub fn index(&self, c: CellIndex) -> usize {
        c.row * self.width + c.col
    }

    pub fn get(&self, c: CellIndex) -> u8 {
        self.cost[self.index(c)]
    }

    pub fn cell_of(&self, p: &Point2D) -> Option<CellIndex> {
        let c = ((p.x - self.origin.x) / self.resolution).floor();
        let r = ((p.y - self.origin.y) / self.resolution).floor();
        (c >= 0.0 && r >= 0.0 && c < self.width as f64 && r < self.height as f64)
            .then(|| CellIndex::new(c as usize, r as usize))
    }

    pub fn center(&self, c: CellIndex) -> Point2D {
        Point2D::new(
            self.origin.x + (c.col as f64 + 0.5) * self.resolution,
            self.origin.y + (c.row as f64 + 0.5) * self.resolution,
        )
    }

    pub fn is_passable(&self, c: CellIndex) -> bool {
        self.get(c) < LETHAL
    }

    /// Cost at a world point; off-map points count as unknown.
    pub fn cost_at(&self, p: &Point2D) -> u8 {
        self.cell_of(p).map_or(UNKNOWN, |c| self.get(c))
    }

    /// Distance to the nearest lethal cell; zero off the map.
    pub fn clearance_at(&self, p: &Point2D) -> f64 {
        self.cell_of(p)
            .map_or(0.0, |c| f64::from(self.clearance[self.index(c)]))
    }
}

/// Occupancy grid of the known static world: walls and car footprints occupied,
/// the rest of the bounds free, the margin outside the bounds unknown.
pub fn rasterize_world(
    world: &WorldModel,
    resolution: f64,
    margin: f64,
    params: &MappingParams,
) -> GridMap {
    let mut map = GridMap::covering(world.bounds.min(), world.bounds.max(), resolution, margin);
    for c in map.cell_iter().collect::<Vec<_>>() {
        if world.bounds.contains(&map.grid_to_world(c)) {
            map.set(c, -params.clamp);
        }
    }
    let mark = |map: &mut GridMap, s: &Segment| {
        let (lo_x, hi_x) = (s.a.x.min(s.b.x) - resolution, s.a.x.max(s.b.x) + resolution);
        let (lo_y, hi_y) = (s.a.y.min(s.b.y) - resolution, s.a.y.max(s.b.y) + resolution);
        let (c0, r0) = map.world_to_cell_unchecked(&Point2D::new(lo_x, lo_y));
        let (c1, r1) = map.world_to_cell_unchecked(&Point2D::new(hi_x, hi_y));
        for row in r0.max(0)..=r1.min(map.height as i64 - 1) {
            for col in c0.max(0)..=c1.min(map.width as i64 - 1) {
                let cell = CellIndex::new(col as usize, row as usize);
                if s.distance_to_point(&map.grid_to_world(cell)) <= resolution * 0.5 {
                    map.set(cell, params.clamp);
                }
            }
        }
    };
    for s in world.segments() {
        mark(&mut map, &s);
    }
    for car in &world.cars {
        let corners = car.corners();
        let lo = Point2D::new(
            corners.iter().map(|p| p.x).fold(f64::INFINITY, f64::min),
            corners.iter().map(|p| p.y).fold(f64::INFINITY, f64::min),
        );
        let hi = Point2D::new(
            corners
                .iter()
                .map(|p| p.x)
                .fold(f64::NEG_INFINITY, f64::max),
            corners
                .iter()
                .map(|p| p.y)
                .fold(f64::NEG_INFINITY, f64::max),
        );
        let (c0, r0) = map.world_to_cell_unchecked(&lo);
        let (c1, r1) = map.world_to_cell_unchecked(&hi);
        for row in r0.max(0)..=r1.min(map.height as i64 - 1) {
            for col in c0.max(0)..=c1.min(map.width as i64 - 1) {
                let cell = CellIndex::new(col as usize, row as usize);
                if car.contains(&map.grid_to_world(cell)) {
                    map.set(cell, params.clamp);
                }
            }
        }
    }
    map
}
