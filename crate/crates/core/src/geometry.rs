//! Planar points and the metrics used to build neighbourhoods.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// A point (or displacement) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

impl From<(f64, f64)> for Vec2 {
    fn from((x, y): (f64, f64)) -> Self {
        Vec2::new(x, y)
    }
}

/// Chebyshev (maximum) distance: `max(|p.x - q.x|, |p.y - q.y|)`.
pub fn chebyshev(p: Vec2, q: Vec2) -> f64 {
    (p.x - q.x).abs().max((p.y - q.y).abs())
}

/// Euclidean distance.
pub fn euclidean(p: Vec2, q: Vec2) -> f64 {
    p.distance(q)
}

/// Point-in-polygon test where points lying on an edge or vertex count as inside.
///
/// `polygon` is a closed ring given without repeating the first vertex.
pub fn point_in_polygon(p: Vec2, polygon: &[Vec2], tol: f64) -> bool {
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        if on_segment(p, polygon[i], polygon[(i + 1) % n], tol) {
            return true;
        }
    }
    // even-odd crossing count
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn on_segment(p: Vec2, a: Vec2, b: Vec2, tol: f64) -> bool {
    let ab = b - a;
    let ap = p - a;
    let len = ab.norm();
    if len == 0.0 {
        return ap.norm() <= tol;
    }
    let cross = ab.x * ap.y - ab.y * ap.x;
    if (cross / len).abs() > tol {
        return false;
    }
    let dot = ab.x * ap.x + ab.y * ap.y;
    dot >= -tol * len && dot <= len * len + tol * len
}
