//! Three-component values stored per cell, and the small trait that lets the
//! difference operators work on scalar and vector grid functions alike.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);
    pub const E_Z: Vec3 = Vec3([0.0, 0.0, 1.0]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = o.0;
        Vec3([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        self.0[0] += o.0[0];
        self.0[1] += o.0[1];
        self.0[2] += o.0[2];
    }
}

/// Value stored in one grid cell.
pub trait FieldValue:
    Copy
    + Default
    + PartialEq
    + Send
    + Sync
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
{
    const COMPONENTS: usize;

    fn dot(self, other: Self) -> f64;
    fn max_abs(self) -> f64;
    fn component(self, c: usize) -> f64;
    fn set_component(&mut self, c: usize, v: f64);

    fn zero() -> Self {
        Self::default()
    }
}

impl FieldValue for f64 {
    const COMPONENTS: usize = 1;

    fn dot(self, other: f64) -> f64 {
        self * other
    }
    fn max_abs(self) -> f64 {
        self.abs()
    }
    fn component(self, _c: usize) -> f64 {
        self
    }
    fn set_component(&mut self, _c: usize, v: f64) {
        *self = v;
    }
}

impl FieldValue for Vec3 {
    const COMPONENTS: usize = 3;

    fn dot(self, other: Vec3) -> f64 {
        Vec3::dot(self, other)
    }
    fn max_abs(self) -> f64 {
        Vec3::max_abs(self)
    }
    fn component(self, c: usize) -> f64 {
        self.0[c]
    }
    fn set_component(&mut self, c: usize, v: f64) {
        self.0[c] = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_is_right_handed() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        let y = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(x.cross(y), Vec3::E_Z);
        assert_eq!(y.cross(x), -Vec3::E_Z);
    }

    #[test]
    fn triple_product_cycles() {
        let a = Vec3::new(0.3, -1.2, 2.0);
        let b = Vec3::new(1.5, 0.4, -0.7);
        let c = Vec3::new(-0.9, 2.2, 0.1);
        let lhs = a.cross(b).dot(c);
        let rhs = c.cross(a).dot(b);
        assert!((lhs - rhs).abs() < 1e-14);
    }
}
