use crate::geometry::{GridMap, Point2D};

/// Squared 1-D distance transform of a sampled function (lower envelope of parabolas).
fn dt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        if f[q].is_infinite() && f[v[k]].is_infinite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = if f[p].is_infinite() {
                f64::NEG_INFINITY
            } else {
                ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64))
            };
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            if s <= z[k] {
                // k == 0 and the new parabola dominates everywhere
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                break;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Exact Euclidean distance transform of a boolean raster, in cells.
pub fn distance_transform(occupied: &[bool], width: usize, height: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = occupied
        .iter()
        .map(|&o| if o { 0.0 } else { f64::INFINITY })
        .collect();
    let n = width.max(height);
    let (mut f, mut out, mut v, mut z) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0usize; n],
        vec![0.0; n + 1],
    );
    for row in 0..height {
        f[..width].copy_from_slice(&grid[row * width..(row + 1) * width]);
        dt_1d(&f[..width], &mut out[..width], &mut v, &mut z);
        grid[row * width..(row + 1) * width].copy_from_slice(&out[..width]);
    }
    for col in 0..width {
        for row in 0..height {
            f[row] = grid[row * width + col];
        }
        dt_1d(&f[..height], &mut out[..height], &mut v, &mut z);
        for row in 0..height {
            grid[row * width + col] = out[row].sqrt();
        }
    }
    grid
}

/// Distance from every cell to the nearest occupied cell, capped at `max_distance` metres.
#[derive(Debug, Clone)]
pub struct LikelihoodField {
    resolution: f64,
    width: usize,
    height: usize,
    origin: Point2D,
    max_distance: f64,
    distance: Vec<f32>,
    /// Cells the map had observed when the field was built.
    known: Vec<bool>,
    has_obstacles: bool,
}

impl LikelihoodField {
    pub fn from_map(map: &GridMap, occupied_log_odds: f64, max_distance: f64) -> Self {
        let occupied: Vec<bool> = map.cells.iter().map(|&l| l > occupied_log_odds).collect();
        let has_obstacles = occupied.iter().any(|&o| o);
        let distance = if has_obstacles {
            distance_transform(&occupied, map.width, map.height)
                .into_iter()
                .map(|d| (d * map.resolution).min(max_distance) as f32)
                .collect()
        } else {
            vec![max_distance as f32; occupied.len()]
        };
        Self {
            resolution: map.resolution,
            width: map.width,
            height: map.height,
            origin: map.origin,
            max_distance,
            distance,
            known: map.cells.iter().map(|&l| l != 0.0).collect(),
            has_obstacles,
        }
    }

    pub fn has_obstacles(&self) -> bool {
        self.has_obstacles
    }

    pub fn max_distance(&self) -> f64 {
        self.max_distance
    }

    /// Whether the cell containing `(x, y)` had been observed; false off the map.
    pub fn is_known(&self, x: f64, y: f64) -> bool {
        let gx = ((x - self.origin.x) / self.resolution).floor();
        let gy = ((y - self.origin.y) / self.resolution).floor();
        if gx < 0.0 || gy < 0.0 || gx >= self.width as f64 || gy >= self.height as f64 {
            return false;
        }
        self.known[gy as usize * self.width + gx as usize]
    }

    fn cell(&self, col: i64, row: i64) -> f64 {
        let c = col.clamp(0, self.width as i64 - 1) as usize;
        let r = row.clamp(0, self.height as i64 - 1) as usize;
        f64::from(self.distance[r * self.width + c])
    }

    /// Distance at `(x, y)`, bilinearly interpolated between cell centres;
    /// `max_distance` off the map.
    #[inline]
    pub fn distance_at(&self, x: f64, y: f64) -> f64 {
        let gx = (x - self.origin.x) / self.resolution;
        let gy = (y - self.origin.y) / self.resolution;
        if gx < 0.0 || gy < 0.0 || gx >= self.width as f64 || gy >= self.height as f64 {
            return self.max_distance;
        }
        let (fx, fy) = (gx - 0.5, gy - 0.5);
        let (c0, r0) = (fx.floor(), fy.floor());
        let (tx, ty) = (fx - c0, fy - r0);
        let (c0, r0) = (c0 as i64, r0 as i64);
        let top = self.cell(c0, r0) * (1.0 - tx) + self.cell(c0 + 1, r0) * tx;
        let bottom = self.cell(c0, r0 + 1) * (1.0 - tx) + self.cell(c0 + 1, r0 + 1) * tx;
        top * (1.0 - ty) + bottom * ty
    }
}
