//! Brute-force detection evaluation: a full threshold sweep with exhaustive optimal
//! matching at every threshold, plus a generator of small random instances.

use haris_core::alpr::{iou, BBox, DetectionRecord, GroundTruthRecord};
use haris_core::sim::VehicleClass;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMetrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub ap: Option<f64>,
}

/// Largest number of detection/label pairs that can be matched one-to-one.
fn max_matching(adj: &[Vec<usize>], used: &mut Vec<bool>, i: usize) -> usize {
    if i == adj.len() {
        return 0;
    }
    let mut best = max_matching(adj, used, i + 1);
    for &g in &adj[i] {
        if !used[g] {
            used[g] = true;
            best = best.max(1 + max_matching(adj, used, i + 1));
            used[g] = false;
        }
    }
    best
}

fn true_positives(dets: &[&DetectionRecord], gts: &[&GroundTruthRecord]) -> usize {
    let adj: Vec<Vec<usize>> = dets
        .iter()
        .map(|d| {
            (0..gts.len())
                .filter(|&g| {
                    gts[g].frame_id == d.frame_id
                        && gts[g].class == d.class
                        && iou(&d.bbox, &gts[g].bbox) >= 0.5
                })
                .collect()
        })
        .collect();
    max_matching(&adj, &mut vec![false; gts.len()], 0)
}

pub fn oracle(dets: &[&DetectionRecord], gts: &[&GroundTruthRecord]) -> OracleMetrics {
    let mut thresholds: Vec<f64> = dets.iter().map(|d| d.confidence).collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let labels = gts.len();
    let mut sweep = Vec::new();
    for &t in &thresholds {
        let kept: Vec<&DetectionRecord> =
            dets.iter().copied().filter(|d| d.confidence >= t).collect();
        let tp = true_positives(&kept, gts) as f64;
        sweep.push((tp / labels as f64, tp / kept.len() as f64));
    }
    let ap = (labels > 0).then(|| {
        let mut ap = 0.0;
        let mut prev = 0.0;
        for (i, &(r, _)) in sweep.iter().enumerate() {
            if r > prev {
                let best = sweep[i..].iter().map(|s| s.1).fold(0.0, f64::max);
                ap += (r - prev) * best;
                prev = r;
            }
        }
        ap
    });
    let tp = true_positives(dets, gts) as f64;
    OracleMetrics {
        precision: (!dets.is_empty()).then(|| tp / dets.len() as f64),
        recall: (labels > 0).then(|| tp / labels as f64),
        ap,
    }
}

/// Random instance with at most `max_boxes` labels and detections per class. Labels in a
/// frame are spaced so no detection can reach IoU 0.5 with two of them.
pub fn random_instance(
    seed: u64,
    max_boxes: usize,
) -> (Vec<DetectionRecord>, Vec<GroundTruthRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames = ["f0", "f1", "f2"];
    let mut dets = Vec::new();
    let mut gts = Vec::new();
    for class in VehicleClass::ALL {
        let n_gt = rng.random_range(0..=max_boxes);
        let n_det = rng.random_range(0..=max_boxes);
        let mut class_gts = Vec::new();
        for k in 0..n_gt {
            let frame = frames[rng.random_range(0..frames.len())];
            let bbox = BBox::new(
                100.0 * k as f64,
                rng.random_range(0.0..20.0),
                rng.random_range(20.0..40.0),
                rng.random_range(20.0..40.0),
            );
            class_gts.push(GroundTruthRecord {
                frame_id: frame.into(),
                class,
                bbox,
            });
        }
        for _ in 0..n_det {
            // confidences on a coarse grid so ties happen
            let confidence = rng.random_range(1..=10) as f64 / 10.0;
            let det = if !class_gts.is_empty() && rng.random_bool(0.7) {
                let g = &class_gts[rng.random_range(0..class_gts.len())];
                let jitter = rng.random_range(0.0..12.0);
                let frame = if rng.random_bool(0.9) {
                    g.frame_id.clone()
                } else {
                    frames[rng.random_range(0..3)].to_string()
                };
                DetectionRecord {
                    frame_id: frame,
                    class,
                    bbox: BBox::new(
                        g.bbox.x + jitter,
                        g.bbox.y - jitter / 2.0,
                        g.bbox.w,
                        g.bbox.h,
                    ),
                    confidence,
                }
            } else {
                DetectionRecord {
                    frame_id: frames[rng.random_range(0..3)].into(),
                    class,
                    bbox: BBox::new(
                        rng.random_range(0.0..600.0),
                        rng.random_range(50.0..300.0),
                        25.0,
                        25.0,
                    ),
                    confidence,
                }
            };
            dets.push(det);
        }
        gts.extend(class_gts);
    }
    (dets, gts)
}
