use serde::{Deserialize, Serialize};

use super::Point2D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point2D,
    pub b: Point2D,
}

impl Segment {
    pub const fn new(a: Point2D, b: Point2D) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(&self.b)
    }

    /// Distance along the ray `origin + t·(cos angle, sin angle)` to the segment, if hit.
    pub fn ray_intersection(&self, origin: &Point2D, dir: (f64, f64)) -> Option<f64> {
        let (dx, dy) = dir;
        let ex = self.b.x - self.a.x;
        let ey = self.b.y - self.a.y;
        let denom = dx * ey - dy * ex;
        if denom.abs() < 1e-12 {
            return None;
        }
        let wx = self.a.x - origin.x;
        let wy = self.a.y - origin.y;
        let t = (wx * ey - wy * ex) / denom;
        let s = (wx * dy - wy * dx) / denom;
        (t >= 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
    }

    pub fn distance_to_point(&self, p: &Point2D) -> f64 {
        let ex = self.b.x - self.a.x;
        let ey = self.b.y - self.a.y;
        let len2 = ex * ex + ey * ey;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((p.x - self.a.x) * ex + (p.y - self.a.y) * ey) / len2).clamp(0.0, 1.0)
        };
        (self.a.x + t * ex - p.x).hypot(self.a.y + t * ey - p.y)
    }

    /// True when the two closed segments share a point.
    pub fn intersects(&self, other: &Segment) -> bool {
        fn orient(p: &Point2D, q: &Point2D, r: &Point2D) -> f64 {
            (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
        }
        let d1 = orient(&other.a, &other.b, &self.a);
        let d2 = orient(&other.a, &other.b, &self.b);
        let d3 = orient(&self.a, &self.b, &other.a);
        let d4 = orient(&self.a, &self.b, &other.b);
        if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
            && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
        {
            return true;
        }
        let on = |p: &Point2D, s: &Segment| {
            p.x >= s.a.x.min(s.b.x) - 1e-12
                && p.x <= s.a.x.max(s.b.x) + 1e-12
                && p.y >= s.a.y.min(s.b.y) - 1e-12
                && p.y <= s.a.y.max(s.b.y) + 1e-12
        };
        (d1 == 0.0 && on(&self.a, other))
            || (d2 == 0.0 && on(&self.b, other))
            || (d3 == 0.0 && on(&other.a, self))
            || (d4 == 0.0 && on(&other.b, self))
    }
}
