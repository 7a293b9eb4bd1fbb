//! Core of the parking-assistant robot: geometry, the GPS/local transformation,
//! simulation, SLAM, navigation, mission execution, plate sighting and detection
//! evaluation, the message bus and the plate-location store.

pub mod alpr;
pub mod bus;
pub mod error;
pub mod geo;
pub mod geometry;
pub mod mission;
pub mod navigation;
pub mod runner;
pub mod sim;
pub mod slam;
pub mod store;

pub use error::*;
pub use geo::{GeoPoint, GeoReference};
pub use geometry::{GridMap, LaserScan, Point2D, Pose2D, Twist};
