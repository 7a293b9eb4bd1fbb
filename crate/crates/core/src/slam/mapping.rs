use serde::{Deserialize, Serialize};

use crate::geometry::{log_odds, CellIndex, GridMap, LaserScan, Point2D, Pose2D};

/// Inverse sensor model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingParams {
    pub l_occ: f64,
    pub l_free: f64,
    pub clamp: f64,
    pub occupied_threshold: f64,
    pub free_threshold: f64,
}

impl Default for MappingParams {
    fn default() -> Self {
        Self {
            l_occ: 0.85,
            l_free: -0.4,
            clamp: 4.0,
            occupied_threshold: 0.65,
            free_threshold: 0.25,
        }
    }
}

impl MappingParams {
    pub fn occupied_log_odds(&self) -> f64 {
        log_odds(self.occupied_threshold)
    }

    pub fn free_log_odds(&self) -> f64 {
        log_odds(self.free_threshold)
    }
}

/// Cells crossed by the segment `from → to`, in order, excluding the cell containing
/// `from` and including the cell containing `to`. Cells outside the map end the walk.
pub fn traverse(map: &GridMap, from: &Point2D, to: &Point2D) -> Vec<CellIndex> {
    let (mut col, mut row) = map.world_to_cell_unchecked(from);
    let (end_col, end_row) = map.world_to_cell_unchecked(to);
    let res = map.resolution;
    let sx = (from.x - map.origin.x) / res;
    let sy = (from.y - map.origin.y) / res;
    let dx = (to.x - from.x) / res;
    let dy = (to.y - from.y) / res;

    let step_x: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_y: i64 = if dy > 0.0 { 1 } else { -1 };
    let t_delta_x = if dx != 0.0 {
        1.0 / dx.abs()
    } else {
        f64::INFINITY
    };
    let t_delta_y = if dy != 0.0 {
        1.0 / dy.abs()
    } else {
        f64::INFINITY
    };
    let next_boundary = |s: f64, cell: i64, step: i64| {
        if step > 0 {
            cell as f64 + 1.0 - s
        } else {
            s - cell as f64
        }
    };
    let mut t_max_x = if dx != 0.0 {
        next_boundary(sx, col, step_x) * t_delta_x
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dy != 0.0 {
        next_boundary(sy, row, step_y) * t_delta_y
    } else {
        f64::INFINITY
    };

    let budget = (end_col - col).unsigned_abs() + (end_row - row).unsigned_abs();
    let mut out = Vec::with_capacity(budget as usize + 1);
    for _ in 0..budget {
        if (col, row) == (end_col, end_row) {
            break;
        }
        if t_max_x < t_max_y {
            col += step_x;
            t_max_x += t_delta_x;
        } else {
            row += step_y;
            t_max_y += t_delta_y;
        }
        if !map.contains(col, row) {
            return out;
        }
        out.push(CellIndex::new(col as usize, row as usize));
    }
    if (col, row) != (end_col, end_row) && map.contains(end_col, end_row) {
        // rounding left the walk one step short; the endpoint still gets its update
        out.push(CellIndex::new(end_col as usize, end_row as usize));
    }
    out
}

fn add(map: &mut GridMap, c: CellIndex, delta: f64, clamp: f64) {
    let i = map.index(c);
    map.cells[i] = (map.cells[i] + delta).clamp(-clamp, clamp);
}

/// Updates `map` with one scan taken at `pose`.
///
/// Cells along each beam receive `l_free`; the endpoint cell of a beam with a return
/// receives `l_occ`. Beams without a return carve free space out to `range_max`.
pub fn integrate_scan(map: &mut GridMap, pose: &Pose2D, scan: &LaserScan, params: &MappingParams) {
    let origin = pose.position();
    for (i, &range) in scan.ranges.iter().enumerate() {
        let hit = scan.is_return(range);
        let r = if hit { range } else { scan.range_max };
        let a = pose.theta + scan.beam_angle(i);
        let end = Point2D::new(origin.x + r * a.cos(), origin.y + r * a.sin());
        let cells = traverse(map, &origin, &end);
        let end_cell = map.world_to_grid(&end);
        for c in cells {
            if hit && Some(c) == end_cell {
                add(map, c, params.l_occ, params.clamp);
            } else {
                add(map, c, params.l_free, params.clamp);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ScanSpec;

    fn single_beam(range: f64) -> LaserScan {
        let spec = ScanSpec {
            angle_min: 0.0,
            angle_max: 0.0,
            angle_increment: 0.1,
            range_max: 5.0,
        };
        LaserScan::new(&spec, vec![range])
    }

    #[test]
    fn single_hit_hand_traced() {
        let p = MappingParams::default();
        for pose in [Pose2D::new(0.05, 0.05, 0.0), Pose2D::new(0.0, 0.0, 0.0)] {
            let mut m = GridMap::new(0.1, 10, 10, Point2D::new(0.0, 0.0));
            integrate_scan(&mut m, &pose, &single_beam(0.3), &p);
            assert_eq!(m.get(CellIndex::new(0, 0)), 0.0, "sensor cell untouched");
            assert_eq!(m.get(CellIndex::new(1, 0)), p.l_free);
            assert_eq!(m.get(CellIndex::new(2, 0)), p.l_free);
            assert_eq!(m.get(CellIndex::new(3, 0)), p.l_occ);
            let touched = m.cells.iter().filter(|&&v| v != 0.0).count();
            assert_eq!(touched, 3);
        }
    }

    #[test]
    fn no_return_only_carves() {
        let p = MappingParams::default();
        let mut m = GridMap::new(0.1, 100, 100, Point2D::new(-5.0, -5.0));
        let spec = ScanSpec::full_circle(36, 3.0);
        let scan = LaserScan::new(&spec, vec![spec.no_return(); 36]);
        integrate_scan(&mut m, &Pose2D::IDENTITY, &scan, &p);
        assert!(m.cells.iter().all(|&v| v <= 0.0));
        assert!(m.cells.iter().any(|&v| v < 0.0));
    }

    #[test]
    fn repeated_hits_saturate_at_clamp() {
        let p = MappingParams::default();
        let mut m = GridMap::new(0.1, 10, 10, Point2D::new(0.0, 0.0));
        for _ in 0..50 {
            integrate_scan(&mut m, &Pose2D::new(0.05, 0.05, 0.0), &single_beam(0.3), &p);
        }
        assert_eq!(m.get(CellIndex::new(3, 0)), p.clamp);
        assert_eq!(m.get(CellIndex::new(1, 0)), -p.clamp);
        assert!(m.cells.iter().all(|v| v.abs() <= p.clamp));
    }

    #[test]
    fn diagonal_traversal_is_connected() {
        let m = GridMap::new(0.1, 50, 50, Point2D::new(0.0, 0.0));
        let from = Point2D::new(0.23, 0.41);
        let to = Point2D::new(3.77, 2.05);
        let cells = traverse(&m, &from, &to);
        assert_eq!(cells.last().copied(), m.world_to_grid(&to));
        let mut prev = m.world_to_grid(&from).unwrap();
        for c in cells {
            let d = (c.col as i64 - prev.col as i64).abs() + (c.row as i64 - prev.row as i64).abs();
            assert_eq!(d, 1, "4-connected steps");
            prev = c;
        }
    }

    #[test]
    fn leaving_the_map_stops_the_walk() {
        let m = GridMap::new(0.1, 10, 10, Point2D::new(0.0, 0.0));
        let cells = traverse(&m, &Point2D::new(0.55, 0.55), &Point2D::new(3.0, 0.55));
        assert_eq!(cells.len(), 4);
    }
}
