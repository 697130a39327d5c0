//! Scalar abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the solver can run on. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + rustfft::FftNum
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64` literals.
    fn c(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn c(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn c(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

pub type C<T> = Complex<T>;

/// Principal square root, `Re >= 0`, with the cut on the negative real axis.
///
/// Avoids cancellation in the imaginary part for arguments near the cut.
pub fn csqrt<T: Real>(z: C<T>) -> C<T> {
    let (x, y) = (z.re, z.im);
    if x == T::zero() && y == T::zero() {
        return C::new(T::zero(), y);
    }
    let r = z.norm();
    let t = ((x.abs() + r) * T::c(0.5)).sqrt();
    if x >= T::zero() {
        C::new(t, y / (t + t))
    } else {
        let im = if y.is_sign_negative() { -t } else { t };
        C::new(y.abs() / (t + t), im)
    }
}

/// Dense 2x2 complex matrix acting on tangential pairs `(u1, u2)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Mat2<T> {
    pub m: [[C<T>; 2]; 2],
}

impl<T: Real> Mat2<T> {
    pub fn new(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    pub fn zero() -> Self {
        let z = C::new(T::zero(), T::zero());
        Mat2::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        Self::scalar(C::new(T::one(), T::zero()))
    }

    pub fn scalar(a: C<T>) -> Self {
        let z = C::new(T::zero(), T::zero());
        Mat2::new(a, z, z, a)
    }

    pub fn apply(&self, u: [C<T>; 2]) -> [C<T>; 2] {
        [
            self.m[0][0] * u[0] + self.m[0][1] * u[1],
            self.m[1][0] * u[0] + self.m[1][1] * u[1],
        ]
    }

    pub fn det(&self) -> C<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == T::zero() || !d.norm().is_finite() {
            return None;
        }
        let inv = C::new(T::one(), T::zero()) / d;
        Some(Mat2::new(
            self.m[1][1] * inv,
            -self.m[0][1] * inv,
            -self.m[1][0] * inv,
            self.m[0][0] * inv,
        ))
    }

    pub fn conj(&self) -> Self {
        Mat2::new(
            self.m[0][0].conj(),
            self.m[0][1].conj(),
            self.m[1][0].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn scale(&self, a: C<T>) -> Self {
        Mat2::new(
            self.m[0][0] * a,
            self.m[0][1] * a,
            self.m[1][0] * a,
            self.m[1][1] * a,
        )
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        let mut r = T::zero();
        for row in &self.m {
            for v in row {
                r = r.max(v.norm());
            }
        }
        r
    }

    /// Eigenvalues of the Hermitian part `(M + M^*)/2`, ascending.
    pub fn hermitian_part_eigs(&self) -> [T; 2] {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = (self.m[0][1] + self.m[1][0].conj()) * T::c(0.5);
        let mean = (a + d) * T::c(0.5);
        let half = (a - d) * T::c(0.5);
        let rad = (half * half + b.norm_sqr()).sqrt();
        [mean - rad, mean + rad]
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Mat2::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Real> Neg for Mat2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(C::new(-T::one(), T::zero()))
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let a = &self.m;
        let b = &o.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csqrt_matches_std_off_the_cut() {
        for &(x, y) in &[(1.0, 2.0), (-3.0, 0.5), (-3.0, -0.5), (0.0, 1.0), (4.0, 0.0)] {
            let z = C::new(x, y);
            let a = csqrt(z);
            let b = z.sqrt();
            assert!((a - b).norm() < 1e-14 * b.norm().max(1.0), "{z} {a} {b}");
            assert!(a.re >= 0.0);
        }
    }

    #[test]
    fn csqrt_near_cut_keeps_relative_accuracy() {
        let z = C::new(-1.0e8, 1.0e-6);
        let r = csqrt(z);
        let back = r * r;
        assert!(((back - z) / z).norm() < 1e-15);
        assert!(r.re > 0.0);
    }

    #[test]
    fn mat2_inverse_roundtrip() {
        let m = Mat2::new(
            C::new(1.0, 2.0),
            C::new(0.5, -1.0),
            C::new(-0.3, 0.1),
            C::new(2.0, 0.0),
        );
        let p = m * m.inverse().unwrap();
        assert!((p - Mat2::identity()).max_abs() < 1e-14);
    }
}
