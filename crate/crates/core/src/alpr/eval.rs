use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::sim::VehicleClass;

/// Axis-aligned box in pixels: top-left corner and size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let ix = ((a.x + a.w).min(b.x + b.w) - a.x.max(b.x)).max(0.0);
    let iy = ((a.y + a.h).min(b.y + b.h) - a.y.max(b.y)).max(0.0);
    let inter = ix * iy;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub frame_id: String,
    pub class: VehicleClass,
    pub bbox: BBox,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub frame_id: String,
    pub class: VehicleClass,
    pub bbox: BBox,
}

/// One row of the report. `None` marks a metric that is undefined for the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub name: String,
    pub images: usize,
    pub labels: usize,
    pub detections: usize,
    pub true_positives: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub ap50: Option<f64>,
    /// Interpolated PR points with strictly increasing recall, starting at recall 0.
    pub pr_curve: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub iou_threshold: f64,
    pub all: ClassMetrics,
    pub classes: Vec<(VehicleClass, ClassMetrics)>,
    /// Unweighted mean of the defined per-class APs.
    pub map50: Option<f64>,
}

impl EvalReport {
    pub fn class(&self, c: VehicleClass) -> Option<&ClassMetrics> {
        self.classes.iter().find(|(k, _)| *k == c).map(|(_, m)| m)
    }
}

pub fn f1_score(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Greedy matching in confidence order: each detection takes the unmatched ground truth
/// of its class and frame with the highest IoU at or above the threshold.
/// Returns the TP flag per detection, in input order.
pub fn match_detections(
    dets: &[DetectionRecord],
    gts: &[GroundTruthRecord],
    iou_threshold: f64,
) -> Vec<bool> {
    let mut by_key: HashMap<(&str, VehicleClass), Vec<usize>> = HashMap::new();
    for (i, g) in gts.iter().enumerate() {
        by_key
            .entry((g.frame_id.as_str(), g.class))
            .or_default()
            .push(i);
    }
    let mut used = vec![false; gts.len()];
    let mut tp = vec![false; dets.len()];
    for i in confidence_order(dets) {
        let d = &dets[i];
        let Some(candidates) = by_key.get(&(d.frame_id.as_str(), d.class)) else {
            continue;
        };
        let mut best: Option<(f64, usize)> = None;
        for &g in candidates {
            if used[g] {
                continue;
            }
            let v = iou(&d.bbox, &gts[g].bbox);
            if v >= iou_threshold && best.is_none_or(|(b, _)| v > b) {
                best = Some((v, g));
            }
        }
        if let Some((_, g)) = best {
            used[g] = true;
            tp[i] = true;
        }
    }
    tp
}

/// Indices by descending confidence; ties keep input order.
fn confidence_order(dets: &[DetectionRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].confidence.total_cmp(&dets[a].confidence));
    order
}

/// PR operating points, one per distinct confidence threshold (ties enter together).
pub fn pr_points(confidences: &[f64], tp: &[bool], labels: usize) -> Vec<(f64, f64)> {
    let mut order: Vec<usize> = (0..confidences.len()).collect();
    order.sort_by(|&a, &b| confidences[b].total_cmp(&confidences[a]));
    let mut points = Vec::new();
    let (mut tps, mut n) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let c = confidences[order[k]];
        while k < order.len() && confidences[order[k]] == c {
            tps += tp[order[k]] as usize;
            n += 1;
            k += 1;
        }
        points.push((tps as f64 / labels as f64, tps as f64 / n as f64));
    }
    points
}

/// All-points average precision: recall steps weighted by the precision envelope.
/// Also returns the envelope curve with strictly increasing recall and an anchor at 0.
pub fn average_precision(points: &[(f64, f64)]) -> (f64, Vec<(f64, f64)>) {
    if points.is_empty() {
        return (0.0, vec![(0.0, 0.0)]);
    }
    let mut envelope: Vec<f64> = points.iter().map(|p| p.1).collect();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev_r = 0.0;
    let mut curve = vec![(0.0, envelope[0])];
    for (i, &(r, _)) in points.iter().enumerate() {
        if r > prev_r {
            ap += (r - prev_r) * envelope[i];
            curve.push((r, envelope[i]));
            prev_r = r;
        }
    }
    (ap, curve)
}

fn metrics(
    name: &str,
    images: usize,
    dets: &[&DetectionRecord],
    tp: &[bool],
    labels: usize,
) -> ClassMetrics {
    let true_positives = tp.iter().filter(|&&t| t).count();
    let precision = (!dets.is_empty()).then(|| true_positives as f64 / dets.len() as f64);
    let recall = (labels > 0).then(|| true_positives as f64 / labels as f64);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) => Some(f1_score(p, r)),
        (None, Some(_)) => Some(0.0),
        _ => None,
    };
    let (ap50, pr_curve) = if labels > 0 {
        let conf: Vec<f64> = dets.iter().map(|d| d.confidence).collect();
        let (ap, curve) = average_precision(&pr_points(&conf, tp, labels));
        (Some(ap), curve)
    } else {
        (None, Vec::new())
    };
    ClassMetrics {
        name: name.to_string(),
        images,
        labels,
        detections: dets.len(),
        true_positives,
        precision,
        recall,
        f1,
        ap50,
        pr_curve,
    }
}

/// P, R, F1 and AP per class and pooled over all classes. Classes with neither
/// labels nor detections are left out.
pub fn evaluate(
    dets: &[DetectionRecord],
    gts: &[GroundTruthRecord],
    iou_threshold: f64,
) -> EvalReport {
    let tp = match_detections(dets, gts, iou_threshold);
    let images = dets
        .iter()
        .map(|d| d.frame_id.as_str())
        .chain(gts.iter().map(|g| g.frame_id.as_str()))
        .collect::<BTreeSet<_>>()
        .len();
    let mut classes = Vec::new();
    for class in VehicleClass::ALL {
        let idx: Vec<usize> = (0..dets.len())
            .filter(|&i| dets[i].class == class)
            .collect();
        let labels = gts.iter().filter(|g| g.class == class).count();
        if idx.is_empty() && labels == 0 {
            continue;
        }
        let cd: Vec<&DetectionRecord> = idx.iter().map(|&i| &dets[i]).collect();
        let ct: Vec<bool> = idx.iter().map(|&i| tp[i]).collect();
        classes.push((class, metrics(class.title(), images, &cd, &ct, labels)));
    }
    let all_dets: Vec<&DetectionRecord> = dets.iter().collect();
    let all = metrics("All", images, &all_dets, &tp, gts.len());
    let aps: Vec<f64> = classes.iter().filter_map(|(_, m)| m.ap50).collect();
    let map50 = (!aps.is_empty()).then(|| aps.iter().sum::<f64>() / aps.len() as f64);
    EvalReport {
        iou_threshold,
        all,
        classes,
        map50,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(frame: &str, b: BBox, conf: f64) -> DetectionRecord {
        DetectionRecord {
            frame_id: frame.into(),
            class: VehicleClass::Car,
            bbox: b,
            confidence: conf,
        }
    }

    fn gt(frame: &str, b: BBox) -> GroundTruthRecord {
        GroundTruthRecord {
            frame_id: frame.into(),
            class: VehicleClass::Car,
            bbox: b,
        }
    }

    #[test]
    fn iou_cases() {
        let a = BBox::new(0.0, 0.0, 1.0, 1.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &BBox::new(2.0, 2.0, 1.0, 1.0)), 0.0);
        assert!((iou(&a, &BBox::new(0.5, 0.0, 1.0, 1.0)) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_detector() {
        let gts = vec![
            gt("a", BBox::new(0.0, 0.0, 10.0, 10.0)),
            gt("b", BBox::new(5.0, 5.0, 10.0, 10.0)),
        ];
        let dets: Vec<_> = gts.iter().map(|g| det(&g.frame_id, g.bbox, 1.0)).collect();
        let r = evaluate(&dets, &gts, 0.5);
        let car = r.class(VehicleClass::Car).unwrap();
        for v in [
            car.precision,
            car.recall,
            car.f1,
            car.ap50,
            r.map50,
            r.all.ap50,
        ] {
            assert_eq!(v, Some(1.0));
        }
        assert_eq!(car.pr_curve, vec![(0.0, 1.0), (1.0, 1.0)]);
    }

    #[test]
    fn one_hit_one_false_positive() {
        let g1 = BBox::new(0.0, 0.0, 10.0, 10.0);
        let gts = vec![gt("a", g1), gt("a", BBox::new(50.0, 50.0, 10.0, 10.0))];
        let a = BBox::new(0.0, 0.0, 6.0, 10.0);
        assert!((iou(&a, &g1) - 0.6).abs() < 1e-12);
        let dets = vec![
            det("a", a, 0.9),
            det("a", BBox::new(100.0, 0.0, 5.0, 5.0), 0.8),
        ];
        let r = evaluate(&dets, &gts, 0.5);
        let car = r.class(VehicleClass::Car).unwrap();
        assert_eq!(car.precision, Some(0.5));
        assert_eq!(car.recall, Some(0.5));
        assert_eq!(car.ap50, Some(0.5));
        assert_eq!(car.pr_curve, vec![(0.0, 1.0), (0.5, 1.0)]);
    }

    #[test]
    fn class_without_labels_is_undefined() {
        let gts = vec![gt("a", BBox::new(0.0, 0.0, 10.0, 10.0))];
        let mut dets = vec![det("a", BBox::new(0.0, 0.0, 10.0, 10.0), 0.9)];
        dets.push(DetectionRecord {
            class: VehicleClass::Bus,
            ..det("a", BBox::new(0.0, 0.0, 10.0, 10.0), 0.7)
        });
        let r = evaluate(&dets, &gts, 0.5);
        let bus = r.class(VehicleClass::Bus).unwrap();
        assert_eq!(bus.recall, None);
        assert_eq!(bus.ap50, None);
        assert_eq!(bus.precision, Some(0.0));
        assert_eq!(r.map50, Some(1.0));
    }

    #[test]
    fn tied_confidences_enter_together() {
        let b = |x: f64| BBox::new(x, 0.0, 10.0, 10.0);
        let gts = vec![gt("a", b(0.0)), gt("a", b(100.0))];
        // a tie between a hit and a miss: the FP must not be ranked either side of the TP
        let dets = vec![
            det("a", b(0.0), 0.5),
            det("a", b(300.0), 0.5),
            det("a", b(100.0), 0.4),
        ];
        let reordered = vec![dets[1].clone(), dets[0].clone(), dets[2].clone()];
        let ap1 = evaluate(&dets, &gts, 0.5).all.ap50;
        let ap2 = evaluate(&reordered, &gts, 0.5).all.ap50;
        assert_eq!(ap1, ap2);
        assert!((ap1.unwrap() - (0.5 * 2.0 / 3.0 + 0.5 * 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn duplicate_detection_is_false_positive() {
        let g = BBox::new(0.0, 0.0, 10.0, 10.0);
        let r = evaluate(&[det("a", g, 0.9), det("a", g, 0.8)], &[gt("a", g)], 0.5);
        assert_eq!(r.all.true_positives, 1);
        assert_eq!(r.all.precision, Some(0.5));
        assert_eq!(r.all.ap50, Some(1.0));
    }
}
