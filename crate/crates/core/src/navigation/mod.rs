//! Costmap inflation, A* global planning and the dynamic-window local planner.

mod astar;
mod costmap;
mod dwa;

pub use astar::{neighbors, plan_global, smooth_path, ExactCost, Path};
pub use costmap::{inflate, rasterize_world, Costmap, FREE, LETHAL, MAX_INFLATED, UNKNOWN};
pub use dwa::{
    arc, arc_clearance, carrot, dwa_step, heading_alignment, DwaOutput, DwaParams, PurePursuit,
};
