use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::Costmap;
use crate::error::PlanError;
use crate::geometry::{CellIndex, Point2D, Pose2D};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<Pose2D>,
    /// Sum of edge costs in cell units.
    pub total_cost: f64,
}

impl Path {
    pub fn length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| w[0].position().distance(&w[1].position()))
            .sum()
    }

    pub fn goal(&self) -> Option<Point2D> {
        self.waypoints.last().map(|p| p.position())
    }

    /// Straight path between two points, headed along the segment.
    pub fn straight(from: Point2D, to: Point2D) -> Self {
        let theta = (to.y - from.y).atan2(to.x - from.x);
        Self {
            waypoints: vec![
                Pose2D::new(from.x, from.y, theta),
                Pose2D::new(to.x, to.y, theta),
            ],
            total_cost: 0.0,
        }
    }
}

/// Exact path cost `(lin + diag·√2) / 128`. Ordering is exact, so equal-cost paths
/// compare equal regardless of summation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ExactCost {
    pub lin: i64,
    pub diag: i64,
}

impl ExactCost {
    pub const ZERO: ExactCost = ExactCost { lin: 0, diag: 0 };

    fn step(diagonal: bool, cell_cost: u8) -> Self {
        let w = 128 + i64::from(cell_cost);
        if diagonal {
            Self { lin: 0, diag: w }
        } else {
            Self { lin: w, diag: 0 }
        }
    }

    fn octile(a: CellIndex, b: CellIndex) -> Self {
        let dx = (a.col as i64 - b.col as i64).abs();
        let dy = (a.row as i64 - b.row as i64).abs();
        let (lo, hi) = (dx.min(dy), dx.max(dy));
        Self {
            lin: 128 * (hi - lo),
            diag: 128 * lo,
        }
    }

    pub fn value(&self) -> f64 {
        (self.lin as f64 + self.diag as f64 * SQRT_2) / 128.0
    }
}

impl std::ops::Add for ExactCost {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            lin: self.lin + o.lin,
            diag: self.diag + o.diag,
        }
    }
}

impl Ord for ExactCost {
    fn cmp(&self, other: &Self) -> Ordering {
        // sign of (a - c) + (b - d)·√2
        let p = i128::from(self.lin - other.lin);
        let q = i128::from(self.diag - other.diag);
        match (p.signum(), q.signum()) {
            (0, s) | (s, 0) => s.cmp(&0),
            (1, 1) => Ordering::Greater,
            (-1, -1) => Ordering::Less,
            (1, _) => (p * p).cmp(&(2 * q * q)),
            _ => (2 * q * q).cmp(&(p * p)),
        }
    }
}

impl PartialOrd for ExactCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(PartialEq, Eq)]
struct Open {
    f: ExactCost,
    g: ExactCost,
    index: usize,
}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f, then prefer deeper nodes, then lower index
        other
            .f
            .cmp(&self.f)
            .then_with(|| self.g.cmp(&other.g))
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NEIGHBORS: [(i64, i64); 8] = [
    (1, 0),
    (0, 1),
    (-1, 0),
    (0, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
    (1, -1),
];

/// Successors of `c` with their exact edge costs. A diagonal move needs both
/// orthogonal neighbours passable, so paths never squeeze between touching corners.
pub fn neighbors(cm: &Costmap, c: CellIndex) -> impl Iterator<Item = (CellIndex, ExactCost)> + '_ {
    NEIGHBORS.iter().filter_map(move |&(dx, dy)| {
        let (col, row) = (c.col as i64 + dx, c.row as i64 + dy);
        let inside = |col: i64, row: i64| {
            col >= 0 && row >= 0 && (col as usize) < cm.width && (row as usize) < cm.height
        };
        if !inside(col, row) {
            return None;
        }
        let n = CellIndex::new(col as usize, row as usize);
        if !cm.is_passable(n) {
            return None;
        }
        let diagonal = dx != 0 && dy != 0;
        if diagonal {
            let a = CellIndex::new(col as usize, c.row);
            let b = CellIndex::new(c.col, row as usize);
            if !cm.is_passable(a) || !cm.is_passable(b) {
                return None;
            }
        }
        Some((n, ExactCost::step(diagonal, cm.get(n))))
    })
}

/// A* over the 8-connected grid. The first and last waypoints are the exact endpoints,
/// the rest are cell centres.
pub fn plan_global(cm: &Costmap, start: Point2D, goal: Point2D) -> Result<Path, PlanError> {
    let (s, g) = match (cm.cell_of(&start), cm.cell_of(&goal)) {
        (Some(s), Some(g)) if cm.is_passable(s) && cm.is_passable(g) => (s, g),
        _ => return Err(PlanError::UnreachableEndpoint),
    };
    let n = cm.width * cm.height;
    let mut best = vec![None::<ExactCost>; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let si = cm.index(s);
    let gi = cm.index(g);
    best[si] = Some(ExactCost::ZERO);
    open.push(Open {
        f: ExactCost::octile(s, g),
        g: ExactCost::ZERO,
        index: si,
    });
    while let Some(Open { g: cost, index, .. }) = open.pop() {
        if closed[index] {
            continue;
        }
        closed[index] = true;
        if index == gi {
            return Ok(build_path(cm, &parent, si, gi, start, goal, cost));
        }
        let c = CellIndex::new(index % cm.width, index / cm.width);
        for (nb, step) in neighbors(cm, c) {
            let ni = cm.index(nb);
            if closed[ni] {
                continue;
            }
            let cand = cost + step;
            if best[ni].is_none_or(|b| cand < b) {
                best[ni] = Some(cand);
                parent[ni] = index;
                open.push(Open {
                    f: cand + ExactCost::octile(nb, g),
                    g: cand,
                    index: ni,
                });
            }
        }
    }
    Err(PlanError::NoPath)
}

fn build_path(
    cm: &Costmap,
    parent: &[usize],
    si: usize,
    gi: usize,
    start: Point2D,
    goal: Point2D,
    cost: ExactCost,
) -> Path {
    let mut cells = vec![gi];
    let mut i = gi;
    while i != si {
        i = parent[i];
        cells.push(i);
    }
    cells.reverse();
    let mut pts: Vec<Point2D> = cells
        .iter()
        .map(|&i| cm.center(CellIndex::new(i % cm.width, i / cm.width)))
        .collect();
    pts[0] = start;
    let last = pts.len() - 1;
    pts[last] = goal;
    let mut waypoints = Vec::with_capacity(pts.len());
    for (k, p) in pts.iter().enumerate() {
        let theta = if pts.len() == 1 {
            0.0
        } else if k + 1 < pts.len() {
            (pts[k + 1].y - p.y).atan2(pts[k + 1].x - p.x)
        } else {
            (p.y - pts[k - 1].y).atan2(p.x - pts[k - 1].x)
        };
        waypoints.push(Pose2D::new(p.x, p.y, theta));
    }
    Path {
        waypoints,
        total_cost: cost.value(),
    }
}

/// Whether every cell under the segment `a → b` is passable and costs at most `ceiling`.
fn segment_within(cm: &Costmap, a: &Point2D, b: &Point2D, ceiling: u8) -> bool {
    let steps = ((a.distance(b) / (cm.resolution * 0.25)).ceil() as usize).max(1);
    (0..=steps).all(|k| {
        let t = k as f64 / steps as f64;
        let p = Point2D::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t);
        cm.cell_of(&p)
            .is_some_and(|c| cm.is_passable(c) && cm.get(c) <= ceiling)
    })
}

/// Line-of-sight shortcutting of a grid path. A run of waypoints is replaced by the
/// straight segment across it when that segment crosses no cell costlier than the
/// costliest cell of the run. Endpoints and `total_cost` are kept.
pub fn smooth_path(cm: &Costmap, path: &Path) -> Path {
    let pts: Vec<Point2D> = path.waypoints.iter().map(|w| w.position()).collect();
    if pts.len() <= 2 {
        return path.clone();
    }
    let cost = |p: &Point2D| cm.cost_at(p);
    let mut kept = vec![pts[0]];
    let mut i = 0;
    while i + 1 < pts.len() {
        let mut reach = i + 1;
        let mut ceiling = cost(&pts[i]).max(cost(&pts[i + 1]));
        for j in i + 2..pts.len() {
            ceiling = ceiling.max(cost(&pts[j]));
            if !segment_within(cm, &pts[i], &pts[j], ceiling) {
                break;
            }
            reach = j;
        }
        kept.push(pts[reach]);
        i = reach;
    }
    let waypoints = kept
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let (a, b) = if k + 1 < kept.len() {
                (p, &kept[k + 1])
            } else {
                (&kept[k - 1], p)
            };
            Pose2D::new(p.x, p.y, (b.y - a.y).atan2(b.x - a.x))
        })
        .collect();
    Path {
        waypoints,
        total_cost: path.total_cost,
    }
}
