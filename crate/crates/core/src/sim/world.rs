use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::geo::{GeoPoint, GeoReference};
use crate::geometry::{Point2D, Pose2D, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bounds {
    pub fn contains(&self, p: &Point2D) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn min(&self) -> Point2D {
        Point2D::new(self.min_x, self.min_y)
    }

    pub fn max(&self) -> Point2D {
        Point2D::new(self.max_x, self.max_y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Wall {
    pub fn segment(&self) -> Segment {
        Segment::new(
            Point2D::new(self.x1, self.y1),
            Point2D::new(self.x2, self.y2),
        )
    }
}

/// Vehicle categories of the detection label set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleClass {
    Car,
    Truck,
    Bus,
    Motorbike,
}

impl VehicleClass {
    pub const ALL: [VehicleClass; 4] = [Self::Car, Self::Truck, Self::Bus, Self::Motorbike];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Car => "car",
            Self::Truck => "truck",
            Self::Bus => "bus",
            Self::Motorbike => "motorbike",
        }
    }

    /// Capitalized row label.
    pub fn title(&self) -> &'static str {
        match self {
            Self::Car => "Car",
            Self::Truck => "Truck",
            Self::Bus => "Bus",
            Self::Motorbike => "Motorbike",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParkedCar {
    pub plate: String,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub length: f64,
    pub width: f64,
    pub class: VehicleClass,
}

impl ParkedCar {
    pub fn center(&self) -> Point2D {
        Point2D::new(self.x, self.y)
    }

    pub fn corners(&self) -> [Point2D; 4] {
        let pose = Pose2D::new(self.x, self.y, self.theta);
        let (hl, hw) = (self.length / 2.0, self.width / 2.0);
        [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
            .map(|(x, y)| pose.transform_point(&Point2D::new(x, y)))
    }

    pub fn edges(&self) -> [Segment; 4] {
        let c = self.corners();
        [
            Segment::new(c[0], c[1]),
            Segment::new(c[1], c[2]),
            Segment::new(c[2], c[3]),
            Segment::new(c[3], c[0]),
        ]
    }

    pub fn contains(&self, p: &Point2D) -> bool {
        let local = Pose2D::new(self.x, self.y, self.theta)
            .inverse()
            .transform_point(p);
        local.x.abs() <= self.length / 2.0 && local.y.abs() <= self.width / 2.0
    }

    fn overlaps(&self, other: &ParkedCar) -> bool {
        let (a, b) = (self.corners(), other.corners());
        let axes = [
            self.theta,
            self.theta + std::f64::consts::FRAC_PI_2,
            other.theta,
            other.theta + std::f64::consts::FRAC_PI_2,
        ];
        axes.iter().all(|&ang| {
            let (s, c) = ang.sin_cos();
            let proj = |pts: &[Point2D; 4]| {
                pts.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        let d = p.x * c + p.y * s;
                        (lo.min(d), hi.max(d))
                    })
            };
            let ((alo, ahi), (blo, bhi)) = (proj(&a), proj(&b));
            ahi.min(bhi) - alo.max(blo) > 1e-9
        })
    }
}

/// Charging station: local pose plus its GPS anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    #[serde(serialize_with = "crate::geo::ser_degrees")]
    pub lat: f64,
    #[serde(serialize_with = "crate::geo::ser_degrees")]
    pub lon: f64,
    /// Direction of the local x-axis, counter-clockwise from east.
    #[serde(default)]
    pub heading_offset: f64,
}

impl Station {
    pub fn pose(&self) -> Pose2D {
        Pose2D::new(self.x, self.y, self.theta)
    }

    pub fn geo(&self) -> GeoPoint {
        GeoPoint {
            lat: self.lat,
            lon: self.lon,
        }
    }

    /// Heading of a docked robot, counter-clockwise from east.
    pub fn enu_heading(&self) -> f64 {
        crate::geometry::normalize_angle(self.heading_offset + self.theta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldModel {
    pub bounds: Bounds,
    #[serde(default)]
    pub walls: Vec<Wall>,
    #[serde(default)]
    pub cars: Vec<ParkedCar>,
    pub station: Station,
}

impl WorldModel {
    /// Ground-truth anchoring of the local frame.
    pub fn reference(&self) -> GeoReference {
        GeoReference::anchored(
            self.station.geo(),
            self.station.enu_heading(),
            &self.station.pose(),
        )
    }

    pub fn segments(&self) -> Vec<Segment> {
        self.walls
            .iter()
            .map(Wall::segment)
            .chain(self.cars.iter().flat_map(|c| c.edges()))
            .collect()
    }

    pub fn car(&self, plate: &str) -> Option<&ParkedCar> {
        self.cars.iter().find(|c| c.plate == plate)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let b = &self.bounds;
        if !(b.max_x > b.min_x && b.max_y > b.min_y) {
            return Err(ScenarioError::invalid(
                "bounds",
                "max must exceed min on both axes",
            ));
        }
        for (i, w) in self.walls.iter().enumerate() {
            if ![w.x1, w.y1, w.x2, w.y2].iter().all(|v| v.is_finite()) {
                return Err(ScenarioError::invalid(
                    format!("walls[{i}]"),
                    "non-finite coordinate",
                ));
            }
        }
        for (i, car) in self.cars.iter().enumerate() {
            let field = |f: &str| format!("cars[{i}].{f}");
            if car.plate.is_empty() {
                return Err(ScenarioError::invalid(field("plate"), "empty plate"));
            }
            if !(5..=6).contains(&car.plate.len()) || !car.plate.bytes().all(|c| c.is_ascii_digit())
            {
                return Err(ScenarioError::invalid(
                    field("plate"),
                    format!("{:?} is not 5-6 digits", car.plate),
                ));
            }
            if !(car.length > 0.0 && car.width > 0.0) {
                return Err(ScenarioError::invalid(
                    field("length"),
                    "footprint dimensions must be positive",
                ));
            }
            if !car.corners().iter().all(|p| b.contains(p)) {
                return Err(ScenarioError::invalid(
                    field("x"),
                    "footprint leaves the bounds",
                ));
            }
            for (j, other) in self.cars.iter().enumerate().skip(i + 1) {
                if car.overlaps(other) {
                    return Err(ScenarioError::invalid(
                        field("x"),
                        format!("footprint overlaps cars[{j}]"),
                    ));
                }
            }
        }
        let s = &self.station;
        if !b.contains(&Point2D::new(s.x, s.y)) {
            return Err(ScenarioError::invalid(
                "station.x",
                "station outside bounds",
            ));
        }
        GeoPoint::new(s.lat, s.lon)
            .map_err(|e| ScenarioError::invalid("station.lat", e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn car(plate: &str, x: f64, y: f64) -> ParkedCar {
        ParkedCar {
            plate: plate.into(),
            x,
            y,
            theta: 0.0,
            length: 4.5,
            width: 1.8,
            class: VehicleClass::Car,
        }
    }

    fn world() -> WorldModel {
        WorldModel {
            bounds: Bounds {
                min_x: 0.0,
                min_y: 0.0,
                max_x: 20.0,
                max_y: 20.0,
            },
            walls: vec![],
            cars: vec![car("12345", 5.0, 5.0), car("67890", 5.0, 8.0)],
            station: Station {
                x: 1.0,
                y: 1.0,
                theta: 0.0,
                lat: 25.0,
                lon: 51.0,
                heading_offset: 0.0,
            },
        }
    }

    #[test]
    fn valid_world_passes() {
        world().validate().unwrap();
    }

    #[test]
    fn overlapping_cars_rejected() {
        let mut w = world();
        w.cars[1].y = 6.0;
        let err = w.validate().unwrap_err().to_string();
        assert!(err.contains("cars[0]"), "{err}");
    }

    #[test]
    fn rotated_cars_overlap_check() {
        let a = car("11111", 0.0, 0.0);
        let mut b = car("22222", 3.2, 0.0);
        assert!(a.overlaps(&b));
        b.theta = std::f64::consts::FRAC_PI_2;
        assert!(!a.overlaps(&b));
        b.x = 3.0;
        assert!(a.overlaps(&b));
        b.x = 5.0;
        b.theta = 0.0;
        assert!(!a.overlaps(&b));
    }

    #[test]
    fn bad_plate_named() {
        let mut w = world();
        w.cars[1].plate = "12a45".into();
        assert!(w
            .validate()
            .unwrap_err()
            .to_string()
            .contains("cars[1].plate"));
    }

    #[test]
    fn station_maps_to_its_anchor() {
        let w = world();
        let g = w.reference().to_gps(&w.station.pose().position()).unwrap();
        assert!((g.lat - 25.0).abs() < 1e-12 && (g.lon - 51.0).abs() < 1e-12);
    }

    #[test]
    fn class_parsing() {
        assert_eq!(VehicleClass::parse("Truck"), Some(VehicleClass::Truck));
        assert_eq!(VehicleClass::parse("tank"), None);
    }
}
