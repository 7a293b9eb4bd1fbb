use std::fmt::Write as _;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::Point2D;

/// PGM pixel values used by the occupancy-map interchange format.
pub const PGM_OCCUPIED: u8 = 0;
pub const PGM_FREE: u8 = 254;
pub const PGM_UNKNOWN: u8 = 205;

pub fn log_odds(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn probability(l: f64) -> f64 {
    1.0 - 1.0 / (1.0 + l.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub col: usize,
    pub row: usize,
}

impl CellIndex {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }
}

/// Log-odds occupancy raster. Cell `(0, 0)` has its lower-left corner at `origin`;
/// rows grow along +y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMap {
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    pub origin: Point2D,
    pub cells: Vec<f64>,
}

/// Floor of `v`, except that values within rounding noise of an integer snap to it,
/// so a point on a cell boundary always lands in the higher cell.
fn boundary_floor(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-9 {
        r
    } else {
        v.floor()
    }
}

impl GridMap {
    pub fn new(resolution: f64, width: usize, height: usize, origin: Point2D) -> Self {
        assert!(resolution > 0.0, "grid resolution must be positive");
        Self {
            resolution,
            width,
            height,
            origin,
            cells: vec![0.0; width * height],
        }
    }

    /// Grid covering the rectangle `[min, max]` with `margin` metres of padding on every side.
    pub fn covering(min: Point2D, max: Point2D, resolution: f64, margin: f64) -> Self {
        let origin = Point2D::new(min.x - margin, min.y - margin);
        let width = ((max.x - min.x + 2.0 * margin) / resolution).ceil() as usize;
        let height = ((max.y - min.y + 2.0 * margin) / resolution).ceil() as usize;
        Self::new(resolution, width.max(1), height.max(1), origin)
    }

    pub fn index(&self, c: CellIndex) -> usize {
        c.row * self.width + c.col
    }

    pub fn contains(&self, col: i64, row: i64) -> bool {
        col >= 0 && row >= 0 && (col as usize) < self.width && (row as usize) < self.height
    }

    /// Unbounded cell coordinates of a world point.
    pub fn world_to_cell_unchecked(&self, p: &Point2D) -> (i64, i64) {
        (
            boundary_floor((p.x - self.origin.x) / self.resolution) as i64,
            boundary_floor((p.y - self.origin.y) / self.resolution) as i64,
        )
    }

    /// Cell containing `p`, or `None` when outside the grid. Never clamps.
    pub fn world_to_grid(&self, p: &Point2D) -> Option<CellIndex> {
        if !p.is_finite() {
            return None;
        }
        let (c, r) = self.world_to_cell_unchecked(p);
        self.contains(c, r)
            .then(|| CellIndex::new(c as usize, r as usize))
    }

    /// World position of the cell center.
    pub fn grid_to_world(&self, c: CellIndex) -> Point2D {
        Point2D::new(
            self.origin.x + (c.col as f64 + 0.5) * self.resolution,
            self.origin.y + (c.row as f64 + 0.5) * self.resolution,
        )
    }

    pub fn get(&self, c: CellIndex) -> f64 {
        self.cells[self.index(c)]
    }

    pub fn set(&mut self, c: CellIndex, value: f64) {
        let i = self.index(c);
        self.cells[i] = value;
    }

    pub fn occupancy(&self, c: CellIndex) -> f64 {
        probability(self.get(c))
    }

    pub fn cell_iter(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (0..self.height)
            .flat_map(move |row| (0..self.width).map(move |col| CellIndex::new(col, row)))
    }

    pub fn max_corner(&self) -> Point2D {
        Point2D::new(
            self.origin.x + self.width as f64 * self.resolution,
            self.origin.y + self.height as f64 * self.resolution,
        )
    }

    pub fn has_known_cells(&self) -> bool {
        self.cells.iter().any(|&l| l != 0.0)
    }

    /// 8-bit PGM (P5). Top image row is the highest grid row.
    pub fn pgm_bytes(&self, occupied_threshold: f64, free_threshold: f64) -> Vec<u8> {
        let header = format!("P5\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + self.cells.len());
        out.extend_from_slice(header.as_bytes());
        for row in (0..self.height).rev() {
            for col in 0..self.width {
                let p = self.occupancy(CellIndex::new(col, row));
                out.push(if p > occupied_threshold {
                    PGM_OCCUPIED
                } else if p < free_threshold {
                    PGM_FREE
                } else {
                    PGM_UNKNOWN
                });
            }
        }
        out
    }

    /// Sidecar metadata in the usual `map.yaml` layout.
    pub fn sidecar_text(
        &self,
        image_name: &str,
        occupied_threshold: f64,
        free_threshold: f64,
    ) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "image: {image_name}");
        let _ = writeln!(s, "resolution: {:.6}", self.resolution);
        let _ = writeln!(
            s,
            "origin: [{:.6}, {:.6}, 0.000000]",
            self.origin.x, self.origin.y
        );
        let _ = writeln!(s, "negate: 0");
        let _ = writeln!(s, "occupied_thresh: {occupied_threshold:.2}");
        let _ = writeln!(s, "free_thresh: {free_threshold:.2}");
        s
    }

    pub fn write_pgm<W: Write>(
        &self,
        w: &mut W,
        occupied_threshold: f64,
        free_threshold: f64,
    ) -> io::Result<()> {
        w.write_all(&self.pgm_bytes(occupied_threshold, free_threshold))
    }

    /// Parses a P5 image back into a grid. Occupied pixels get `occupied_value`,
    /// free pixels `free_value`, everything else stays unknown.
    pub fn from_pgm(
        bytes: &[u8],
        resolution: f64,
        origin: Point2D,
        occupied_value: f64,
        free_value: f64,
    ) -> Result<GridMap, String> {
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err("truncated PGM header".into());
            }
            fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
        if fields[0] != "P5" {
            return Err(format!("unsupported PGM magic {:?}", fields[0]));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| format!("bad PGM header field {s:?}: {e}"))
        };
        let (width, height, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
        if maxval != 255 {
            return Err(format!("unsupported PGM maxval {maxval}"));
        }
        let data = &bytes[pos + 1..];
        if data.len() < width * height {
            return Err(format!(
                "PGM pixel data short: {} < {}",
                data.len(),
                width * height
            ));
        }
        let mut map = GridMap::new(resolution, width, height, origin);
        for (i, &px) in data[..width * height].iter().enumerate() {
            let row = height - 1 - i / width;
            let col = i % width;
            let v = match px {
                PGM_OCCUPIED => occupied_value,
                PGM_FREE => free_value,
                _ => 0.0,
            };
            map.set(CellIndex::new(col, row), v);
        }
        Ok(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map() -> GridMap {
        GridMap::new(0.1, 10, 10, Point2D::new(0.0, 0.0))
    }

    #[test]
    fn world_to_grid_examples() {
        let m = map();
        assert_eq!(
            m.world_to_grid(&Point2D::new(0.05, 0.05)),
            Some(CellIndex::new(0, 0))
        );
        assert_eq!(
            m.world_to_grid(&Point2D::new(0.1, 0.0)),
            Some(CellIndex::new(1, 0))
        );
        assert_eq!(m.world_to_grid(&Point2D::new(-0.01, 0.0)), None);
        assert_eq!(m.world_to_grid(&Point2D::new(1.0, 0.5)), None);
    }

    #[test]
    fn boundaries_go_to_higher_cell_despite_rounding() {
        let m = map();
        // 0.3 / 0.1 evaluates to 2.9999999999999996
        assert_eq!(
            m.world_to_grid(&Point2D::new(0.3, 0.7)),
            Some(CellIndex::new(3, 7))
        );
    }

    #[test]
    fn center_round_trip() {
        let m = GridMap::new(0.05, 37, 23, Point2D::new(-1.3, 2.7));
        for c in m.cell_iter() {
            assert_eq!(m.world_to_grid(&m.grid_to_world(c)), Some(c));
        }
    }

    #[test]
    fn pgm_encoding_and_back() {
        let mut m = GridMap::new(0.05, 3, 2, Point2D::new(1.0, 2.0));
        m.set(CellIndex::new(0, 0), 2.0);
        m.set(CellIndex::new(1, 0), -2.0);
        m.set(CellIndex::new(2, 1), 0.2);
        let bytes = m.pgm_bytes(0.65, 0.25);
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        // top row first
        assert_eq!(&bytes[header.len()..], &[205, 205, 205, 0, 254, 205]);
        let back = GridMap::from_pgm(&bytes, 0.05, m.origin, 2.0, -2.0).unwrap();
        assert_eq!(back.get(CellIndex::new(0, 0)), 2.0);
        assert_eq!(back.get(CellIndex::new(1, 0)), -2.0);
        assert_eq!(back.get(CellIndex::new(2, 1)), 0.0);
    }

    #[test]
    fn sidecar_lists_resolution_and_origin() {
        let m = GridMap::new(0.05, 3, 2, Point2D::new(1.0, -2.0));
        let s = m.sidecar_text("map.pgm", 0.65, 0.25);
        assert!(s.contains("resolution: 0.050000"));
        assert!(s.contains("origin: [1.000000, -2.000000, 0.000000]"));
    }

    #[test]
    fn log_odds_inverse() {
        for p in [0.1, 0.25, 0.5, 0.65, 0.9] {
            assert!((probability(log_odds(p)) - p).abs() < 1e-12);
        }
    }
}
