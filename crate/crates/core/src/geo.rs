//! Bidirectional mapping between GPS coordinates and the robot's local metric frame.
//!
//! The local frame is an equirectangular tangent plane anchored at
//! [`GeoReference::origin`] and rotated so that its x-axis points along
//! `heading_offset` (counter-clockwise from east). Compass bearings (clockwise
//! from north) are converted at the edges with [`enu_heading_from_bearing`].

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::GeoError;
use crate::geometry::{normalize_angle, Point2D, Pose2D};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
/// Flat-earth validity bound of the projection.
pub const PROJECTION_LIMIT_M: f64 = 50_000.0;

/// Decimal degrees with at least nine fractional digits, lossless for `f64`.
pub fn format_degrees(v: f64) -> String {
    let short = format!("{v:.9}");
    if short.parse::<f64>().ok() == Some(v) {
        short
    } else {
        format!("{v:.17}")
    }
}

pub(crate) fn ser_degrees<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::Error;
    let raw =
        serde_json::value::RawValue::from_string(format_degrees(*v)).map_err(S::Error::custom)?;
    raw.serialize(s)
}

fn de_degrees<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    f64::deserialize(d)
}

/// Wraps a longitude difference or value into `(-180, 180]`.
pub fn normalize_lon(lon: f64) -> f64 {
    let r = lon.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    #[serde(serialize_with = "ser_degrees", deserialize_with = "de_degrees")]
    pub lat: f64,
    #[serde(serialize_with = "ser_degrees", deserialize_with = "de_degrees")]
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        let p = Self { lat, lon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        if !(self.lat.is_finite() && (-90.0..=90.0).contains(&self.lat)) {
            return Err(GeoError::InvalidCoordinate(format!(
                "latitude {} outside [-90, 90]",
                self.lat
            )));
        }
        if !(self.lon.is_finite() && self.lon > -180.0 && self.lon <= 180.0) {
            return Err(GeoError::InvalidCoordinate(format!(
                "longitude {} outside (-180, 180]",
                self.lon
            )));
        }
        Ok(())
    }
}

/// Great-circle distance on the sphere of radius `radius`.
pub fn haversine(a: &GeoPoint, b: &GeoPoint, radius: f64) -> f64 {
    let (la, lb) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lb - la;
    let dlon = normalize_lon(b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + la.cos() * lb.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * radius * h.sqrt().min(1.0).asin()
}

/// Converts a compass bearing (clockwise from north) to a counter-clockwise angle from east.
pub fn enu_heading_from_bearing(bearing: f64) -> f64 {
    normalize_angle(FRAC_PI_2 - bearing)
}

pub fn bearing_from_enu_heading(heading: f64) -> f64 {
    normalize_angle(FRAC_PI_2 - heading)
}

/// Anchor of the local frame on the globe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoReference {
    pub origin: GeoPoint,
    /// Direction of the local x-axis, counter-clockwise from east, radians.
    pub heading_offset: f64,
    pub earth_radius: f64,
}

impl GeoReference {
    pub fn new(origin: GeoPoint, heading_offset: f64) -> Self {
        Self {
            origin,
            heading_offset: normalize_angle(heading_offset),
            earth_radius: EARTH_RADIUS_M,
        }
    }

    /// Reference under which the local pose `local` sits at `station` facing `station_heading`
    /// (counter-clockwise from east).
    pub fn anchored(station: GeoPoint, station_heading: f64, local: &Pose2D) -> Self {
        Self::anchored_with_radius(station, station_heading, local, EARTH_RADIUS_M)
    }

    fn anchored_with_radius(
        station: GeoPoint,
        station_heading: f64,
        local: &Pose2D,
        radius: f64,
    ) -> Self {
        let heading_offset = normalize_angle(station_heading - local.theta);
        let (e, n) = rotate(local.x, local.y, heading_offset);
        let m_lat = meters_per_degree(radius);
        let lat = station.lat - n / m_lat;
        let lon = normalize_lon(station.lon - e / (m_lat * lat.to_radians().cos()));
        Self {
            origin: GeoPoint { lat, lon },
            heading_offset,
            earth_radius: radius,
        }
    }

    fn meters_per_degree(&self) -> (f64, f64) {
        let m_lat = meters_per_degree(self.earth_radius);
        (m_lat * self.origin.lat.to_radians().cos(), m_lat)
    }

    pub fn to_local(&self, g: &GeoPoint) -> Result<Point2D, GeoError> {
        let (m_lon, m_lat) = self.meters_per_degree();
        let east = normalize_lon(g.lon - self.origin.lon) * m_lon;
        let north = (g.lat - self.origin.lat) * m_lat;
        let d = east.hypot(north);
        if d.is_nan() || d > PROJECTION_LIMIT_M {
            return Err(GeoError::OutOfProjectionRange {
                distance_m: d,
                limit_m: PROJECTION_LIMIT_M,
            });
        }
        let (x, y) = rotate(east, north, -self.heading_offset);
        Ok(Point2D::new(x, y))
    }

    pub fn to_gps(&self, p: &Point2D) -> Result<GeoPoint, GeoError> {
        let d = p.norm();
        if d.is_nan() || d > PROJECTION_LIMIT_M {
            return Err(GeoError::OutOfProjectionRange {
                distance_m: d,
                limit_m: PROJECTION_LIMIT_M,
            });
        }
        let (east, north) = rotate(p.x, p.y, self.heading_offset);
        let (m_lon, m_lat) = self.meters_per_degree();
        let lat = self.origin.lat + north / m_lat;
        let lon = normalize_lon(self.origin.lon + east / m_lon);
        GeoPoint::new(lat, lon)
    }

    /// Local heading converted to a counter-clockwise-from-east angle.
    pub fn enu_heading(&self, local_theta: f64) -> f64 {
        normalize_angle(self.heading_offset + local_theta)
    }

    /// Re-anchors the frame so that `measured` maps exactly onto `station` with heading
    /// `station_heading`; cancels drift accumulated since the previous anchoring.
    pub fn resync(
        &self,
        station: GeoPoint,
        station_heading: f64,
        measured: &Pose2D,
    ) -> GeoReference {
        Self::anchored_with_radius(station, station_heading, measured, self.earth_radius)
    }
}

fn meters_per_degree(radius: f64) -> f64 {
    radius * std::f64::consts::PI / 180.0
}

fn rotate(x: f64, y: f64, angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    (c * x - s * y, s * x + c * y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn doha() -> GeoReference {
        GeoReference::new(GeoPoint::new(25.0, 51.0).unwrap(), 0.0)
    }

    #[test]
    fn origin_maps_to_zero() {
        let r = doha();
        assert_eq!(r.to_local(&r.origin).unwrap(), Point2D::new(0.0, 0.0));
        assert_eq!(r.to_gps(&Point2D::new(0.0, 0.0)).unwrap(), r.origin);
    }

    #[test]
    fn hundred_metres_north() {
        let r = doha();
        let g = GeoPoint::new(25.0 + 100.0 / 111_194.9, 51.0).unwrap();
        // the oracle: the two points are 100 m apart on the sphere
        assert!((haversine(&r.origin, &g, EARTH_RADIUS_M) - 100.0).abs() < 1e-3);
        let p = r.to_local(&g).unwrap();
        assert!(p.x.abs() < 0.1 && (p.y - 100.0).abs() < 0.1, "{p:?}");

        let rotated = GeoReference::new(r.origin, PI / 2.0);
        let q = rotated.to_local(&g).unwrap();
        assert!((q.x - 100.0).abs() < 0.1 && q.y.abs() < 0.1, "{q:?}");
    }

    #[test]
    fn forward_projection_of_one_millidegree() {
        let g = doha().to_gps(&Point2D::new(0.0, 111.1949)).unwrap();
        assert!((g.lat - 25.001).abs() < 1e-6);
        assert!((g.lon - 51.0).abs() < 1e-6);
    }

    #[test]
    fn projection_limit() {
        let r = doha();
        assert!(matches!(
            r.to_local(&GeoPoint::new(26.0, 51.0).unwrap()),
            Err(GeoError::OutOfProjectionRange { .. })
        ));
        assert!(r.to_gps(&Point2D::new(0.0, 60_000.0)).is_err());
    }

    #[test]
    fn longitude_wraps_across_antimeridian() {
        let r = GeoReference::new(GeoPoint::new(-17.0, 180.0).unwrap(), 0.3);
        let p = Point2D::new(500.0, -20.0);
        let g = r.to_gps(&p).unwrap();
        assert!(g.lon < 0.0);
        let back = r.to_local(&g).unwrap();
        assert!(back.distance(&p) < 1e-6);
    }

    #[test]
    fn bearing_conversion() {
        assert!((enu_heading_from_bearing(0.0) - FRAC_PI_2).abs() < 1e-15);
        assert!(enu_heading_from_bearing(FRAC_PI_2).abs() < 1e-15);
        for b in [-3.0, -1.0, 0.2, 2.5] {
            assert!((bearing_from_enu_heading(enu_heading_from_bearing(b)) - b).abs() < 1e-12);
        }
    }

    #[test]
    fn resync_with_matching_inputs_is_noop() {
        let r = GeoReference::new(GeoPoint::new(25.3, 51.2).unwrap(), 0.4);
        let s = r.resync(r.origin, r.heading_offset, &Pose2D::IDENTITY);
        assert_eq!(s, r);
    }

    #[test]
    fn resync_pins_measured_pose_to_station() {
        let r = doha();
        let station = GeoPoint::new(25.0003, 51.0002).unwrap();
        let station_heading = 1.1;
        let measured = Pose2D::new(12.5, -3.0, 0.9);
        let s = r.resync(station, station_heading, &measured);
        let g = s.to_gps(&measured.position()).unwrap();
        assert!((g.lat - station.lat).abs() < 1e-12);
        assert!((g.lon - station.lon).abs() < 1e-12);
        assert!((s.enu_heading(measured.theta) - station_heading).abs() < 1e-12);
        // idempotent
        assert_eq!(s, r.resync(station, station_heading, &measured));
        assert_eq!(s.resync(station, station_heading, &measured), s);
    }

    #[test]
    fn resync_corrects_rigid_drift() {
        // Robot really sits at local pose `truth` under `r`; its estimate drifted by a
        // rigid offset of 0.5 m east and 0.1 rad.
        let r = doha();
        let truth = Pose2D::new(3.0, 4.0, 0.2);
        let drift = Pose2D::new(0.5, 0.0, 0.1);
        let measured = drift.compose(&truth);
        let station = r.to_gps(&truth.position()).unwrap();
        let s = r.resync(station, r.enu_heading(truth.theta), &measured);
        // Oracle: new reference equals old reference composed with inverse drift, so
        // any point q reported in the drifted frame maps to drift⁻¹·q under the old one.
        let q = Point2D::new(10.0, -2.0);
        let expected = r.to_gps(&drift.inverse().transform_point(&q)).unwrap();
        let got = s.to_gps(&q).unwrap();
        assert!(haversine(&expected, &got, EARTH_RADIUS_M) < 1e-6);
        // and the shift is not trivial
        assert!(haversine(&r.to_gps(&q).unwrap(), &got, EARTH_RADIUS_M) > 0.4);
    }

    #[test]
    fn serialized_degrees_have_nine_decimals_and_round_trip() {
        let g = GeoPoint::new(25.0, 51.123456789123).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert!(
            s.starts_with(r#"{"lat":25.000000000,"lon":51.123456789"#),
            "{s}"
        );
        let back: GeoPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let r = GeoReference::new(
                GeoPoint::new(
                    rng.random_range(-60.0..60.0),
                    rng.random_range(-179.0..180.0),
                )
                .unwrap(),
                rng.random_range(-PI..PI),
            );
            for _ in 0..100 {
                let p = Point2D::new(
                    rng.random_range(-1400.0..1400.0),
                    rng.random_range(-1400.0..1400.0),
                );
                let g = r.to_gps(&p).unwrap();
                let back = r.to_gps(&r.to_local(&g).unwrap()).unwrap();
                assert!((back.lat - g.lat).abs() < 1e-9 && (back.lon - g.lon).abs() < 1e-9);
            }
        }
    }
}
