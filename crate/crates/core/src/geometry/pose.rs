use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Smallest signed rotation taking `from` onto `to`.
pub fn angle_diff(to: f64, from: f64) -> f64 {
    normalize_angle(to - from)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Planar rigid pose. x forward, counter-clockwise positive heading.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub const IDENTITY: Pose2D = Pose2D {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn position(&self) -> Point2D {
        Point2D::new(self.x, self.y)
    }

    /// `self ∘ other`: `other` expressed in the frame of `self`, lifted into the parent frame.
    pub fn compose(&self, other: &Pose2D) -> Pose2D {
        let (s, c) = self.theta.sin_cos();
        Pose2D::new(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )
    }

    pub fn inverse(&self) -> Pose2D {
        let (s, c) = self.theta.sin_cos();
        Pose2D::new(
            -(c * self.x + s * self.y),
            -(-s * self.x + c * self.y),
            -self.theta,
        )
    }

    /// Relative pose of `other` seen from `self`.
    pub fn between(&self, other: &Pose2D) -> Pose2D {
        self.inverse().compose(other)
    }

    pub fn transform_point(&self, p: &Point2D) -> Point2D {
        let (s, c) = self.theta.sin_cos();
        Point2D::new(self.x + c * p.x - s * p.y, self.y + s * p.x + c * p.y)
    }

    pub fn distance(&self, other: &Pose2D) -> f64 {
        self.position().distance(&other.position())
    }

    pub fn approx_eq(&self, other: &Pose2D, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol
            && (self.y - other.y).abs() <= tol
            && angle_diff(self.theta, other.theta).abs() <= tol
    }
}

/// Free function form of [`Pose2D::compose`].
pub fn compose(a: &Pose2D, b: &Pose2D) -> Pose2D {
    a.compose(b)
}

/// Velocity command for a unicycle base.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist {
    /// Forward speed, m/s.
    pub v: f64,
    /// Yaw rate, rad/s, counter-clockwise positive.
    pub omega: f64,
}

impl Twist {
    pub const STOP: Twist = Twist { v: 0.0, omega: 0.0 };

    pub fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }

    pub fn clamped(&self, v_max: f64, omega_max: f64) -> Twist {
        Twist::new(
            self.v.clamp(-v_max, v_max),
            self.omega.clamp(-omega_max, omega_max),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalization_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(-0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn compose_identity_and_inverse() {
        let p = Pose2D::new(1.5, -2.0, 0.7);
        assert_eq!(Pose2D::IDENTITY.compose(&p), p);
        assert!(p.compose(&p.inverse()).approx_eq(&Pose2D::IDENTITY, 1e-12));
    }

    #[test]
    fn compose_matches_rotation_matrix() {
        // [cos -sin; sin cos] at π/2 applied to (1,0) gives (0,1), then add (1,0).
        let a = Pose2D::new(1.0, 0.0, PI / 2.0);
        let b = Pose2D::new(1.0, 0.0, 0.0);
        let r = compose(&a, &b);
        assert!(r.approx_eq(&Pose2D::new(1.0, 1.0, PI / 2.0), 1e-12));
    }

    fn pose() -> impl Strategy<Value = Pose2D> {
        (-50.0..50.0f64, -50.0..50.0f64, -4.0..4.0f64).prop_map(|(x, y, t)| Pose2D::new(x, y, t))
    }

    proptest! {
        #[test]
        fn compose_is_associative(a in pose(), b in pose(), c in pose()) {
            let l = a.compose(&b).compose(&c);
            let r = a.compose(&b.compose(&c));
            prop_assert!(l.approx_eq(&r, 1e-9));
        }

        #[test]
        fn inverse_cancels(p in pose()) {
            prop_assert!(p.compose(&p.inverse()).approx_eq(&Pose2D::IDENTITY, 1e-9));
            prop_assert!(p.inverse().compose(&p).approx_eq(&Pose2D::IDENTITY, 1e-9));
        }

        #[test]
        fn heading_stays_normalized(a in pose(), b in pose()) {
            let t = a.compose(&b).theta;
            prop_assert!(t > -PI && t <= PI);
        }
    }
}
