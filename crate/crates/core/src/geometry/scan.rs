use serde::{Deserialize, Serialize};

/// Beam layout of a planar range sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub angle_min: f64,
    pub angle_max: f64,
    pub angle_increment: f64,
    pub range_max: f64,
}

impl ScanSpec {
    /// Full 360° sweep with `beams` evenly spaced rays.
    pub fn full_circle(beams: usize, range_max: f64) -> Self {
        let inc = std::f64::consts::TAU / beams as f64;
        Self {
            angle_min: -std::f64::consts::PI,
            angle_max: std::f64::consts::PI - inc,
            angle_increment: inc,
            range_max,
        }
    }

    pub fn beam_count(&self) -> usize {
        ((self.angle_max - self.angle_min) / self.angle_increment + 1e-9).floor() as usize + 1
    }

    pub fn beam_angle(&self, i: usize) -> f64 {
        self.angle_min + i as f64 * self.angle_increment
    }

    /// Value written for beams without a return.
    pub fn no_return(&self) -> f64 {
        self.range_max + 1.0
    }
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self::full_circle(360, 12.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserScan {
    pub angle_min: f64,
    pub angle_max: f64,
    pub angle_increment: f64,
    pub range_max: f64,
    pub ranges: Vec<f64>,
}

impl LaserScan {
    pub fn new(spec: &ScanSpec, ranges: Vec<f64>) -> Self {
        debug_assert_eq!(ranges.len(), spec.beam_count());
        Self {
            angle_min: spec.angle_min,
            angle_max: spec.angle_max,
            angle_increment: spec.angle_increment,
            range_max: spec.range_max,
            ranges,
        }
    }

    pub fn spec(&self) -> ScanSpec {
        ScanSpec {
            angle_min: self.angle_min,
            angle_max: self.angle_max,
            angle_increment: self.angle_increment,
            range_max: self.range_max,
        }
    }

    pub fn beam_angle(&self, i: usize) -> f64 {
        self.angle_min + i as f64 * self.angle_increment
    }

    pub fn is_return(&self, range: f64) -> bool {
        range <= self.range_max
    }

    /// `(angle, range)` of beams that produced a return.
    pub fn returns(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.ranges
            .iter()
            .enumerate()
            .filter(|(_, r)| self.is_return(**r))
            .map(|(i, r)| (i, self.beam_angle(i), *r))
    }
}
