//! Scalar abstraction shared by the plain `f64` path and the dual-number path
//! used for gradients and Hessians.

use std::ops::{Add, Mul, Neg, Sub};

use num_dual::DualNum;

/// Any scalar the geometry routines can be evaluated with: `f64`, or one of
/// the `num-dual` first/second order vector duals.
pub trait Real: DualNum<Primitive = f64> {
    #[inline]
    fn val(&self) -> f64 {
        self.re()
    }

    #[inline]
    fn cst(v: f64) -> Self {
        Self::from(v)
    }
}

impl<T: DualNum<Primitive = f64>> Real for T {}

/// Minimal 3-vector over a [`Real`] scalar. 2D geometry is embedded at z = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct V3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

pub type Vec3 = V3<f64>;

impl<T: Real> V3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> T {
        self.x.clone() * &o.x + self.y.clone() * &o.y + self.z.clone() * &o.z
    }

    #[inline]
    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.y.clone() * &o.z - self.z.clone() * &o.y,
            self.z.clone() * &o.x - self.x.clone() * &o.z,
            self.x.clone() * &o.y - self.y.clone() * &o.x,
        )
    }

    #[inline]
    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn scale(&self, s: &T) -> Self {
        Self::new(
            self.x.clone() * s,
            self.y.clone() * s,
            self.z.clone() * s,
        )
    }

    #[inline]
    pub fn scale_f(&self, s: f64) -> Self {
        Self::new(self.x.clone() * s, self.y.clone() * s, self.z.clone() * s)
    }

    /// Unit vector in the same direction. Caller guarantees a nonzero norm.
    #[inline]
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        let inv = n.recip();
        self.scale(&inv)
    }

    #[inline]
    pub fn values(&self) -> Vec3 {
        Vec3::new(self.x.val(), self.y.val(), self.z.val())
    }

    #[inline]
    pub fn lift(v: &Vec3) -> Self {
        Self::new(T::cst(v.x), T::cst(v.y), T::cst(v.z))
    }

    #[inline]
    pub fn component(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            _ => &self.z,
        }
    }
}

impl Vec3 {
    pub fn from_slice(s: &[f64]) -> Self {
        Vec3::new(s[0], s[1], s.get(2).copied().unwrap_or(0.0))
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn max_abs(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn min_comp(&self, o: &Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max_comp(&self, o: &Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }
}

impl<'a, T: Real> Add<&'a V3<T>> for &'a V3<T> {
    type Output = V3<T>;
    #[inline]
    fn add(self, o: &'a V3<T>) -> V3<T> {
        V3::new(
            self.x.clone() + &o.x,
            self.y.clone() + &o.y,
            self.z.clone() + &o.z,
        )
    }
}

impl<'a, T: Real> Sub<&'a V3<T>> for &'a V3<T> {
    type Output = V3<T>;
    #[inline]
    fn sub(self, o: &'a V3<T>) -> V3<T> {
        V3::new(
            self.x.clone() - &o.x,
            self.y.clone() - &o.y,
            self.z.clone() - &o.z,
        )
    }
}

impl<T: Real> Add for V3<T> {
    type Output = V3<T>;
    #[inline]
    fn add(self, o: V3<T>) -> V3<T> {
        V3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for V3<T> {
    type Output = V3<T>;
    #[inline]
    fn sub(self, o: V3<T>) -> V3<T> {
        V3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for V3<T> {
    type Output = V3<T>;
    #[inline]
    fn neg(self) -> V3<T> {
        V3::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<f64> for V3<T> {
    type Output = V3<T>;
    #[inline]
    fn mul(self, s: f64) -> V3<T> {
        V3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Copy for V3<f64> {}

impl Default for Vec3 {
    fn default() -> Self {
        Vec3::new(0.0, 0.0, 0.0)
    }
}
