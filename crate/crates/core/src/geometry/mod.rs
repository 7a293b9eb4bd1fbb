//! Planar poses, occupancy rasters, range scans and the coordinate-frame tree.

mod frames;
mod grid;
mod pose;
mod scan;
mod segment;

pub use frames::FrameTree;
pub use grid::{log_odds, probability, CellIndex, GridMap, PGM_FREE, PGM_OCCUPIED, PGM_UNKNOWN};
pub use pose::{angle_diff, compose, normalize_angle, Point2D, Pose2D, Twist};
pub use scan::{LaserScan, ScanSpec};
pub use segment::Segment;
