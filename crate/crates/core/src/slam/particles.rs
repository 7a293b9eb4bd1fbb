use rand::Rng;
use serde::{Deserialize, Serialize};

use super::LikelihoodField;
use crate::geometry::{LaserScan, Pose2D};
use crate::sim::gauss;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub pose: Pose2D,
    pub weight: f64,
}

/// Filter-side odometry error model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionNoise {
    /// Translation std as a fraction of distance.
    pub trans_std: f64,
    /// Rotation std per radian turned.
    pub rot_std: f64,
    /// Rotation std per metre travelled.
    pub rot_per_meter: f64,
}

impl MotionNoise {
    pub fn zero() -> Self {
        Self {
            trans_std: 0.0,
            rot_std: 0.0,
            rot_per_meter: 0.0,
        }
    }
}

impl Default for MotionNoise {
    fn default() -> Self {
        Self {
            trans_std: 0.05,
            rot_std: 0.3,
            rot_per_meter: 0.02,
        }
    }
}

/// Measurement-model constants for the likelihood field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodParams {
    pub sigma: f64,
    pub max_beams: usize,
    /// Distances are capped here when the field is built.
    pub max_distance: f64,
}

impl Default for LikelihoodParams {
    fn default() -> Self {
        Self {
            sigma: 0.2,
            max_beams: 60,
            max_distance: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationEstimate {
    pub pose: Pose2D,
    /// Weighted RMS distance of the particles from the mean position.
    pub position_rms: f64,
}

/// Outcome flag of a measurement update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementOutcome {
    Weighted,
    /// No usable likelihood: weights were reset to uniform.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSet {
    pub particles: Vec<Particle>,
}

impl ParticleSet {
    /// `n` copies of `pose` with uniform weight.
    pub fn at_pose(pose: Pose2D, n: usize) -> Self {
        assert!(n > 0, "particle count must be positive");
        let w = 1.0 / n as f64;
        Self {
            particles: vec![Particle { pose, weight: w }; n],
        }
    }

    pub fn from_poses(poses: impl IntoIterator<Item = Pose2D>) -> Self {
        let mut ps = Self {
            particles: poses
                .into_iter()
                .map(|pose| Particle { pose, weight: 1.0 })
                .collect(),
        };
        assert!(!ps.particles.is_empty(), "particle count must be positive");
        ps.reset_uniform();
        ps
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.particles.iter().map(|p| p.weight)
    }

    pub fn reset_uniform(&mut self) {
        let w = 1.0 / self.len() as f64;
        self.particles.iter_mut().for_each(|p| p.weight = w);
    }

    /// 1 / Σw² of normalized weights.
    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights().map(|w| w * w).sum::<f64>()
    }

    /// Moves every particle by `delta` in its own frame, with sampled noise.
    pub fn motion_update<R: Rng + ?Sized>(
        &mut self,
        delta: &Pose2D,
        noise: &MotionNoise,
        rng: &mut R,
    ) {
        let dist = delta.x.hypot(delta.y);
        let trans_sd = noise.trans_std * dist;
        let rot_sd = noise.rot_std * delta.theta.abs() + noise.rot_per_meter * dist;
        let (ux, uy) = if dist > 0.0 {
            (delta.x / dist, delta.y / dist)
        } else {
            (1.0, 0.0)
        };
        for p in &mut self.particles {
            let along = gauss(rng, trans_sd);
            let across = gauss(rng, trans_sd);
            let rot = gauss(rng, rot_sd);
            let noisy = Pose2D::new(
                delta.x + along * ux - across * uy,
                delta.y + along * uy + across * ux,
                delta.theta + rot,
            );
            p.pose = p.pose.compose(&noisy);
        }
    }

    /// Reweights particles by how well `scan` endpoints fall on occupied cells of the field.
    pub fn measurement_update(
        &mut self,
        scan: &LaserScan,
        field: &LikelihoodField,
        params: &LikelihoodParams,
    ) -> MeasurementOutcome {
        self.measurement_update_phased(scan, field, params, 0)
    }

    /// As [`Self::measurement_update`], with the decimated beam subset shifted by `phase`
    /// beams so that successive updates sample different beams.
    pub fn measurement_update_phased(
        &mut self,
        scan: &LaserScan,
        field: &LikelihoodField,
        params: &LikelihoodParams,
        phase: usize,
    ) -> MeasurementOutcome {
        if !field.has_obstacles() {
            self.reset_uniform();
            return MeasurementOutcome::Degenerate;
        }
        // endpoints in unobserved space say nothing about the pose; scoring them as
        // "far from any wall" would drag the cloud toward the mapped region
        let mean = self.estimate().pose;
        let (s, c) = mean.theta.sin_cos();
        let usable: Vec<(f64, f64)> = scan
            .returns()
            .map(|(_, a, r)| (r * a.cos(), r * a.sin()))
            .filter(|&(bx, by)| field.is_known(mean.x + c * bx - s * by, mean.y + s * bx + c * by))
            .collect();
        let beams = decimate(usable, params.max_beams, phase);
        if beams.is_empty() {
            return MeasurementOutcome::Weighted;
        }
        let inv = 1.0 / (2.0 * params.sigma * params.sigma);
        let log_lik: Vec<f64> = self
            .particles
            .iter()
            .map(|p| {
                let (s, c) = p.pose.theta.sin_cos();
                beams
                    .iter()
                    .map(|&(bx, by)| {
                        let x = p.pose.x + c * bx - s * by;
                        let y = p.pose.y + s * bx + c * by;
                        let d = field.distance_at(x, y);
                        -d * d * inv
                    })
                    .sum::<f64>()
            })
            .collect();
        let best = log_lik
            .iter()
            .zip(&self.particles)
            .filter(|(_, p)| p.weight > 0.0)
            .map(|(l, _)| *l)
            .fold(f64::NEG_INFINITY, f64::max);
        if !best.is_finite() {
            self.reset_uniform();
            return MeasurementOutcome::Degenerate;
        }
        for (p, l) in self.particles.iter_mut().zip(&log_lik) {
            p.weight *= (l - best).exp();
        }
        let total: f64 = self.weights().sum();
        if !(total > 0.0 && total.is_finite()) {
            self.reset_uniform();
            return MeasurementOutcome::Degenerate;
        }
        self.particles.iter_mut().for_each(|p| p.weight /= total);
        MeasurementOutcome::Weighted
    }

    /// Low-variance resampling, run only when the effective sample size drops below N/2.
    /// Returns whether resampling happened.
    pub fn resample_systematic<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let n = self.len();
        if self.effective_sample_size() >= n as f64 / 2.0 {
            return false;
        }
        let step = 1.0 / n as f64;
        let start = rng.random::<f64>() * step;
        let mut out = Vec::with_capacity(n);
        let mut cumulative = self.particles[0].weight;
        let mut i = 0;
        for k in 0..n {
            let u = start + k as f64 * step;
            while u >= cumulative && i + 1 < n {
                i += 1;
                cumulative += self.particles[i].weight;
            }
            out.push(Particle {
                pose: self.particles[i].pose,
                weight: step,
            });
        }
        self.particles = out;
        true
    }

    /// Weighted mean position and circular-mean heading.
    pub fn estimate(&self) -> LocalizationEstimate {
        let (mut x, mut y, mut s, mut c, mut total) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for p in &self.particles {
            x += p.weight * p.pose.x;
            y += p.weight * p.pose.y;
            s += p.weight * p.pose.theta.sin();
            c += p.weight * p.pose.theta.cos();
            total += p.weight;
        }
        let (x, y) = (x / total, y / total);
        let var = self
            .particles
            .iter()
            .map(|p| p.weight * ((p.pose.x - x).powi(2) + (p.pose.y - y).powi(2)))
            .sum::<f64>()
            / total;
        LocalizationEstimate {
            pose: Pose2D::new(x, y, s.atan2(c)),
            position_rms: var.max(0.0).sqrt(),
        }
    }
}

/// Robot-frame endpoints of up to `max_beams` returns, evenly spread over the scan.
fn decimate(beams: Vec<(f64, f64)>, max_beams: usize, phase: usize) -> Vec<(f64, f64)> {
    let n = beams.len();
    if n <= max_beams {
        return beams;
    }
    let shift = phase % (n / max_beams.max(1));
    (0..max_beams)
        .map(|k| beams[(k * n / max_beams + shift) % n])
        .collect()
}
