use serde::{Deserialize, Serialize};

use super::{Costmap, Path, LETHAL};
use crate::geometry::{angle_diff, Point2D, Pose2D, Twist};
use crate::sim::integrate_unicycle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DwaParams {
    pub v_samples: usize,
    pub w_samples: usize,
    /// Arc simulation length, seconds.
    pub horizon: f64,
    /// Arc simulation step, seconds.
    pub dt: f64,
    /// Control period that bounds the reachable window, seconds.
    pub control_period: f64,
    pub alpha_heading: f64,
    pub beta_clearance: f64,
    pub gamma_velocity: f64,
    pub accel_v: f64,
    pub accel_w: f64,
    pub v_max: f64,
    pub w_max: f64,
    /// Arcs passing closer than this to a lethal cell are discarded.
    pub robot_radius: f64,
    /// Clearance beyond this scores the same.
    pub clearance_cap: f64,
    /// Distance along the path to the heading target.
    pub lookahead: f64,
}

impl Default for DwaParams {
    fn default() -> Self {
        Self {
            v_samples: 11,
            w_samples: 31,
            horizon: 1.5,
            dt: 0.1,
            control_period: 0.05,
            alpha_heading: 0.8,
            beta_clearance: 0.2,
            gamma_velocity: 0.1,
            accel_v: 1.0,
            accel_w: 3.0,
            v_max: 1.0,
            w_max: 1.5,
            robot_radius: 0.3,
            clearance_cap: 1.0,
            lookahead: 0.6,
        }
    }
}

impl DwaParams {
    /// Reachable `(v, ω)` bounds from `current` within one control period.
    pub fn window(&self, current: &Twist) -> ((f64, f64), (f64, f64)) {
        let dv = self.accel_v * self.control_period;
        let dw = self.accel_w * self.control_period;
        let v = ((current.v - dv).max(0.0), (current.v + dv).min(self.v_max));
        let w = (
            (current.omega - dw).max(-self.w_max),
            (current.omega + dw).min(self.w_max),
        );
        let v = if v.0 > v.1 {
            (self.v_max, self.v_max)
        } else {
            v
        };
        let w = if w.0 > w.1 { (w.1, w.1) } else { w };
        (v, w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DwaOutput {
    pub twist: Twist,
    /// Every sampled arc collided; `twist` is a stop command.
    pub blocked: bool,
    /// End pose of the chosen arc, for display.
    pub arc_end: Pose2D,
}

/// Evenly spaced samples over `[lo, hi]`, with zero added when it lies inside.
fn samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    let mut out: Vec<f64> = if n == 1 || hi - lo < 1e-12 {
        vec![0.5 * (lo + hi)]
    } else {
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()
    };
    if lo <= 0.0 && hi >= 0.0 && !out.contains(&0.0) {
        // snap the nearest sample onto zero
        let i = (0..out.len())
            .min_by(|&a, &b| out[a].abs().total_cmp(&out[b].abs()))
            .unwrap();
        out[i] = 0.0;
    }
    out
}

/// The point `lookahead` metres along `path` past the point closest to `p`.
pub fn carrot(path: &Path, p: &Point2D, lookahead: f64) -> Point2D {
    let pts: Vec<Point2D> = path.waypoints.iter().map(|w| w.position()).collect();
    if pts.len() == 1 {
        return pts[0];
    }
    let (mut best_seg, mut best_t, mut best_d) = (0, 0.0, f64::INFINITY);
    for (i, w) in pts.windows(2).enumerate() {
        let (dx, dy) = (w[1].x - w[0].x, w[1].y - w[0].y);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            (((p.x - w[0].x) * dx + (p.y - w[0].y) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let q = Point2D::new(w[0].x + t * dx, w[0].y + t * dy);
        let d = q.distance(p);
        if d < best_d - 1e-12 {
            (best_seg, best_t, best_d) = (i, t, d);
        }
    }
    let mut remaining = lookahead;
    let mut seg = best_seg;
    let mut from = {
        let (a, b) = (pts[seg], pts[seg + 1]);
        Point2D::new(a.x + best_t * (b.x - a.x), a.y + best_t * (b.y - a.y))
    };
    loop {
        let to = pts[seg + 1];
        let d = from.distance(&to);
        if d >= remaining {
            let t = remaining / d;
            return Point2D::new(from.x + t * (to.x - from.x), from.y + t * (to.y - from.y));
        }
        remaining -= d;
        seg += 1;
        if seg + 1 >= pts.len() {
            return to;
        }
        from = to;
    }
}

/// Simulated arc poses over the horizon, excluding the start pose.
pub fn arc(pose: &Pose2D, twist: &Twist, params: &DwaParams) -> Vec<Pose2D> {
    let steps = (params.horizon / params.dt).round().max(1.0) as usize;
    (1..=steps)
        .map(|k| integrate_unicycle(pose, twist, params.dt * k as f64))
        .collect()
}

/// Minimum clearance along an arc; `None` when it touches a lethal cell.
pub fn arc_clearance(cm: &Costmap, poses: &[Pose2D]) -> Option<f64> {
    let mut min = f64::INFINITY;
    for p in poses {
        let q = p.position();
        if cm.cost_at(&q) == LETHAL {
            return None;
        }
        min = min.min(cm.clearance_at(&q));
    }
    Some(min)
}

/// One dynamic-window step toward `path`. Each arc is scored on how well its end pose
/// faces the path point `lookahead` metres beyond it.
pub fn dwa_step(
    cm: &Costmap,
    pose: &Pose2D,
    current: &Twist,
    path: &Path,
    params: &DwaParams,
) -> DwaOutput {
    let ((v_lo, v_hi), (w_lo, w_hi)) = params.window(current);
    let vs = samples(v_lo, v_hi, params.v_samples);
    let ws = samples(w_lo, w_hi, params.w_samples);
    let mut best: Option<(f64, f64, Twist, Pose2D)> = None;
    for &v in &vs {
        for &w in &ws {
            let twist = Twist::new(v, w);
            let poses = arc(pose, &twist, params);
            let Some(clear) = arc_clearance(cm, &poses) else {
                continue;
            };
            if clear < params.robot_radius {
                continue;
            }
            let end = *poses.last().unwrap();
            let target = carrot(path, &end.position(), params.lookahead);
            let score = score(&end, &target, clear, v, params);
            let better = match best {
                None => true,
                Some((s, bw, _, _)) => {
                    score > s + 1e-12 || ((score - s).abs() <= 1e-12 && w.abs() < bw.abs() - 1e-12)
                }
            };
            if better {
                best = Some((score, w, twist, end));
            }
        }
    }
    match best {
        Some((_, _, twist, end)) => DwaOutput {
            twist,
            blocked: false,
            arc_end: end,
        },
        None => DwaOutput {
            twist: Twist::STOP,
            blocked: true,
            arc_end: *pose,
        },
    }
}

/// Heading alignment of an arc's end pose toward `target`, in [0, 1].
pub fn heading_alignment(end: &Pose2D, target: &Point2D) -> f64 {
    let dx = target.x - end.x;
    let dy = target.y - end.y;
    if dx.hypot(dy) < 1e-9 {
        return 1.0;
    }
    1.0 - angle_diff(dy.atan2(dx), end.theta).abs() / std::f64::consts::PI
}

fn score(end: &Pose2D, target: &Point2D, clearance: f64, v: f64, p: &DwaParams) -> f64 {
    p.alpha_heading * heading_alignment(end, target)
        + p.beta_clearance * clearance.min(p.clearance_cap) / p.clearance_cap
        + p.gamma_velocity * v.abs() / p.v_max
}

/// Fixed-speed pure-pursuit tracker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurePursuit {
    pub speed: f64,
    pub lookahead: f64,
    pub w_max: f64,
}

impl PurePursuit {
    pub fn command(&self, pose: &Pose2D, path: &Path) -> Twist {
        let target = carrot(path, &pose.position(), self.lookahead);
        let local = pose.inverse().transform_point(&target);
        let d2 = local.x * local.x + local.y * local.y;
        if d2 < 1e-12 {
            return Twist::STOP;
        }
        let curvature = 2.0 * local.y / d2;
        Twist::new(
            self.speed,
            (self.speed * curvature).clamp(-self.w_max, self.w_max),
        )
    }
}
