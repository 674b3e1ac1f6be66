//! Planar vectors, poses and angle arithmetic.
//!
//! All angles are radians, normalized to the half-open interval `(-pi, pi]`.

use core::f64::consts::PI;
use core::ops::{Add, Mul, Neg, Sub};

/// Float functions routed to `std` or `libm` depending on features.
pub(crate) mod scalar {
    #[cfg(feature = "std")]
    mod imp {
        pub fn sin(x: f64) -> f64 {
            x.sin()
        }
        pub fn cos(x: f64) -> f64 {
            x.cos()
        }
        pub fn atan2(y: f64, x: f64) -> f64 {
            y.atan2(x)
        }
        pub fn hypot(x: f64, y: f64) -> f64 {
            x.hypot(y)
        }
        pub fn abs(x: f64) -> f64 {
            x.abs()
        }
        pub fn rem(x: f64, m: f64) -> f64 {
            x % m
        }
        pub fn round(x: f64) -> f64 {
            x.round()
        }
        pub fn ceil(x: f64) -> f64 {
            x.ceil()
        }
    }

    #[cfg(all(not(feature = "std"), feature = "libm"))]
    mod imp {
        pub fn sin(x: f64) -> f64 {
            libm::sin(x)
        }
        pub fn cos(x: f64) -> f64 {
            libm::cos(x)
        }
        pub fn atan2(y: f64, x: f64) -> f64 {
            libm::atan2(y, x)
        }
        pub fn hypot(x: f64, y: f64) -> f64 {
            libm::hypot(x, y)
        }
        pub fn abs(x: f64) -> f64 {
            libm::fabs(x)
        }
        pub fn rem(x: f64, m: f64) -> f64 {
            libm::fmod(x, m)
        }
        pub fn round(x: f64) -> f64 {
            libm::round(x)
        }
        pub fn ceil(x: f64) -> f64 {
            libm::ceil(x)
        }
    }

    pub use imp::*;
}

/// Normalize an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = scalar::rem(a, two_pi);
    if r <= -PI {
        r += two_pi;
    } else if r > PI {
        r -= two_pi;
    }
    r
}

/// 2D vector (meters).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Self = Self { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        scalar::hypot(self.x, self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise rotation by `theta`.
    pub fn rotated(self, theta: f64) -> Self {
        let (s, c) = (scalar::sin(theta), scalar::cos(theta));
        Self {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    /// Angle of the vector, `atan2(y, x)`.
    pub fn angle(self) -> f64 {
        scalar::atan2(self.y, self.x)
    }

    /// Unit vector along `theta`.
    pub fn from_angle(theta: f64) -> Self {
        Self {
            x: scalar::cos(theta),
            y: scalar::sin(theta),
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Planar pose `(x, y, theta)` of a module body frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub const IDENTITY: Self = Self {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    pub const fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn position(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn from_parts(p: Vec2, theta: f64) -> Self {
        Self {
            x: p.x,
            y: p.y,
            theta,
        }
    }

    /// Compose with a pose expressed in this pose's frame:
    /// `self ∘ local` = rotate `local` by `self.theta`, translate, add angles.
    pub fn compose(self, local: Pose2) -> Pose2 {
        let p = self.position() + local.position().rotated(self.theta);
        Pose2::from_parts(p, wrap_angle(self.theta + local.theta))
    }

    /// Inverse transform: `self.inverse().compose(self) == identity`.
    pub fn inverse(self) -> Pose2 {
        let p = (-self.position()).rotated(-self.theta);
        Pose2::from_parts(p, wrap_angle(-self.theta))
    }

    /// This pose expressed in `frame`'s coordinates.
    pub fn in_frame(self, frame: Pose2) -> Pose2 {
        frame.inverse().compose(self)
    }

    /// Map a point from this pose's frame to the world.
    pub fn transform_point(self, p: Vec2) -> Vec2 {
        self.position() + p.rotated(self.theta)
    }

    /// World direction of the body `+x` axis.
    pub fn heading_vector(self) -> Vec2 {
        Vec2::from_angle(self.theta)
    }

    pub fn with_wrapped_angle(self) -> Pose2 {
        Pose2::new(self.x, self.y, wrap_angle(self.theta))
    }
}
