//! Plate sighting model for the side camera, and detection evaluation
//! (IoU matching, precision/recall, all-points AP, mAP).

mod camera;
mod eval;
mod io;

pub use camera::{corrupt_plate, observe, CameraModel, Sighting};
pub use eval::{
    average_precision, evaluate, f1_score, iou, match_detections, pr_points, BBox, ClassMetrics,
    DetectionRecord, EvalReport, GroundTruthRecord,
};
pub use io::{
    export_pr_curve, read_detections, read_ground_truth, report_csv, write_detections,
    write_ground_truth, DETECTION_HEADER, GROUND_TRUTH_HEADER, REPORT_HEADER,
};
