use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A point of the complex plane, stored as a pair of reals.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub const ORIGIN: PlanePoint = PlanePoint { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self { x: z.re, y: z.im }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: PlanePoint) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: PlanePoint) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: PlanePoint) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Rotation by +90 degrees.
    pub fn perp(self) -> PlanePoint {
        PlanePoint::new(-self.y, self.x)
    }

    pub fn lerp(self, other: PlanePoint, t: f64) -> PlanePoint {
        PlanePoint::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    /// Rotation by `angle` about `center`.
    pub fn rotate_about(self, center: PlanePoint, angle: f64) -> PlanePoint {
        let (s, c) = angle.sin_cos();
        let d = self - center;
        center + PlanePoint::new(c * d.x - s * d.y, s * d.x + c * d.y)
    }

    /// `(self - w)^2` as a complex number.
    pub fn diff_squared(self, w: PlanePoint) -> Complex64 {
        let d = (self - w).to_complex();
        d * d
    }

    /// `(self - w)^3` as a complex number.
    pub fn diff_cubed(self, w: PlanePoint) -> Complex64 {
        let d = (self - w).to_complex();
        d * d * d
    }
}

impl From<[f64; 2]> for PlanePoint {
    fn from(v: [f64; 2]) -> Self {
        PlanePoint::new(v[0], v[1])
    }
}

impl From<PlanePoint> for [f64; 2] {
    fn from(p: PlanePoint) -> Self {
        [p.x, p.y]
    }
}

impl Add for PlanePoint {
    type Output = PlanePoint;
    fn add(self, o: PlanePoint) -> PlanePoint {
        PlanePoint::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for PlanePoint {
    type Output = PlanePoint;
    fn sub(self, o: PlanePoint) -> PlanePoint {
        PlanePoint::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for PlanePoint {
    type Output = PlanePoint;
    fn mul(self, s: f64) -> PlanePoint {
        PlanePoint::new(self.x * s, self.y * s)
    }
}

impl Neg for PlanePoint {
    type Output = PlanePoint;
    fn neg(self) -> PlanePoint {
        PlanePoint::new(-self.x, -self.y)
    }
}

/// Unit vector, used for boundary normals and line directions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitNormal {
    pub n1: f64,
    pub n2: f64,
}

impl UnitNormal {
    pub const TOLERANCE: f64 = 1e-12;

    /// Normalizes `(n1, n2)`; `None` for a zero or non-finite vector.
    pub fn new(n1: f64, n2: f64) -> Option<Self> {
        let len = n1.hypot(n2);
        if !len.is_finite() || len == 0.0 {
            return None;
        }
        Some(Self {
            n1: n1 / len,
            n2: n2 / len,
        })
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { n1: c, n2: s }
    }

    pub fn angle(self) -> f64 {
        self.n2.atan2(self.n1)
    }

    pub fn as_point(self) -> PlanePoint {
        PlanePoint::new(self.n1, self.n2)
    }

    pub fn is_unit(self) -> bool {
        ((self.n1 * self.n1 + self.n2 * self.n2) - 1.0).abs() <= Self::TOLERANCE
    }
}

/// Wraps an angle difference into `(-pi, pi]`.
pub fn wrap_angle(mut a: f64) -> f64 {
    use std::f64::consts::PI;
    while a > PI {
        a -= 2.0 * PI;
    }
    while a <= -PI {
        a += 2.0 * PI;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_powers_match_manual_arithmetic() {
        let z = PlanePoint::new(2.0, 1.0);
        let w = PlanePoint::new(1.0, -1.0);
        // z - w = 1 + 2i, squared = -3 + 4i, cubed = -11 - 2i
        assert_eq!(z.diff_squared(w), Complex64::new(-3.0, 4.0));
        assert_eq!(z.diff_cubed(w), Complex64::new(-11.0, -2.0));
    }

    #[test]
    fn unit_normal_rejects_zero() {
        assert!(UnitNormal::new(0.0, 0.0).is_none());
        let n = UnitNormal::new(3.0, 4.0).unwrap();
        assert!(n.is_unit());
        assert!((n.n1 - 0.6).abs() < 1e-15);
    }

    #[test]
    fn wrap_angle_range() {
        use std::f64::consts::PI;
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.5) - 0.5).abs() < 1e-15);
    }
}
