use std::f64::consts::SQRT_2;

use haris_core::geometry::CellIndex;
use haris_core::navigation::{inflate, Costmap, LETHAL};
use haris_core::slam::MappingParams;
use haris_core::{GridMap, Point2D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random 20×20 map: scattered obstacles plus a few wall runs, inflated by 2 cells.
pub fn random_costmap(seed: u64) -> Costmap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = GridMap::new(1.0, 20, 20, Point2D::new(0.0, 0.0));
    m.cells.iter_mut().for_each(|l| *l = -2.0);
    for c in m.cell_iter().collect::<Vec<_>>() {
        if rng.random_bool(0.12) {
            m.set(c, 3.0);
        }
    }
    for _ in 0..3 {
        let (col, row) = (rng.random_range(0..20), rng.random_range(0..20));
        let len = rng.random_range(3..12);
        for k in 0..len {
            let (c, r) = if rng.random_bool(0.5) {
                (col + k, row)
            } else {
                (col, row + k)
            };
            if c < 20 && r < 20 {
                m.set(CellIndex::new(c, r), 3.0);
            }
        }
    }
    inflate(&m, 2.0, &MappingParams::default())
}

/// Plain O(V²) Dijkstra with the planner's move rules. Ordering is by the floating-point
/// sum; alongside it each node carries its cost as whole multiples of 1/128 and √2/128,
/// so the returned value does not depend on which of several equal-cost paths won.
pub fn dijkstra(cm: &Costmap, s: CellIndex, g: CellIndex) -> Option<f64> {
    let n = cm.width * cm.height;
    let idx = |c: CellIndex| c.row * cm.width + c.col;
    let passable = |col: i64, row: i64| {
        col >= 0
            && row >= 0
            && col < cm.width as i64
            && row < cm.height as i64
            && cm.cost[row as usize * cm.width + col as usize] < LETHAL
    };
    let mut dist = vec![f64::INFINITY; n];
    let mut units = vec![(0i64, 0i64); n];
    let mut done = vec![false; n];
    dist[idx(s)] = 0.0;
    loop {
        let u = (0..n)
            .filter(|&i| !done[i] && dist[i].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))?;
        if u == idx(g) {
            let (lin, diag) = units[u];
            return Some((lin as f64 + diag as f64 * SQRT_2) / 128.0);
        }
        done[u] = true;
        let (uc, ur) = ((u % cm.width) as i64, (u / cm.width) as i64);
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                if (dx, dy) == (0, 0) || !passable(uc + dx, ur + dy) {
                    continue;
                }
                let diagonal = dx != 0 && dy != 0;
                if diagonal && !(passable(uc + dx, ur) && passable(uc, ur + dy)) {
                    continue;
                }
                let v = (ur + dy) as usize * cm.width + (uc + dx) as usize;
                let step = if diagonal { SQRT_2 } else { 1.0 };
                let w = 128 + i64::from(cm.cost[v]);
                let alt = dist[u] + step * (1.0 + f64::from(cm.cost[v]) / 128.0);
                if alt < dist[v] {
                    dist[v] = alt;
                    let (lin, diag) = units[u];
                    units[v] = if diagonal {
                        (lin, diag + w)
                    } else {
                        (lin + w, diag)
                    };
                }
            }
        }
    }
}
