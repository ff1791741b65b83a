//! Linear algebra on R^8 = C^4 = H^2.
//!
//! A quaternion slot is written h = z1 + z2 j, so the vector (z1, z2, z3, z4)
//! holds the two quaternions z1 + z2 j and z3 + z4 j. Quaternions act by left
//! multiplication: i is the complex scalar, j(z) = (-conj z2, conj z1,
//! -conj z4, conj z3) and k = i j.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{GeomError, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance on |v| - 1 for a [`SpherePoint`].
pub const SPHERE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct AmbientVector(pub [C64; 4]);

/// Imaginary quaternion units acting from the left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Unit {
    I,
    J,
    K,
}

impl AmbientVector {
    pub const ZERO: Self = AmbientVector([C64::new(0.0, 0.0); 4]);

    pub fn new(z: [C64; 4]) -> Self {
        AmbientVector(z)
    }

    pub fn from_reals(x: [f64; 8]) -> Self {
        AmbientVector([
            C64::new(x[0], x[1]),
            C64::new(x[2], x[3]),
            C64::new(x[4], x[5]),
            C64::new(x[6], x[7]),
        ])
    }

    pub fn to_reals(&self) -> [f64; 8] {
        let z = &self.0;
        [z[0].re, z[0].im, z[1].re, z[1].im, z[2].re, z[2].im, z[3].re, z[3].im]
    }

    /// Standard basis vector `e_k` of C^4 (real direction).
    pub fn basis(k: usize) -> Self {
        let mut v = Self::ZERO;
        v.0[k] = C64::new(1.0, 0.0);
        v
    }

    pub fn i(&self) -> Self {
        self.scale_c(I)
    }

    pub fn j(&self) -> Self {
        let z = &self.0;
        AmbientVector([-z[1].conj(), z[0].conj(), -z[3].conj(), z[2].conj()])
    }

    pub fn k(&self) -> Self {
        self.j().i()
    }

    pub fn conj(&self) -> Self {
        let z = &self.0;
        AmbientVector([z[0].conj(), z[1].conj(), z[2].conj(), z[3].conj()])
    }

    pub fn scale_c(&self, c: C64) -> Self {
        let z = &self.0;
        AmbientVector([c * z[0], c * z[1], c * z[2], c * z[3]])
    }

    pub fn dot(&self, other: &Self) -> f64 {
        real_inner(self, other)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest absolute value over the 8 real components.
    pub fn max_abs(&self) -> f64 {
        self.to_reals().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn normalized(&self) -> Self {
        *self * (1.0 / self.norm())
    }
}

pub fn left_mul(unit: Unit, v: &AmbientVector) -> AmbientVector {
    match unit {
        Unit::I => v.i(),
        Unit::J => v.j(),
        Unit::K => v.k(),
    }
}

pub fn real_inner(u: &AmbientVector, v: &AmbientVector) -> f64 {
    u.0.iter()
        .zip(v.0.iter())
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum()
}

/// Hermitian product, linear in `u`: sum of u_m conj(v_m).
pub fn herm_inner(u: &AmbientVector, v: &AmbientVector) -> C64 {
    u.0.iter().zip(v.0.iter()).map(|(a, b)| a * b.conj()).sum()
}

impl Add for AmbientVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (self.0, rhs.0);
        AmbientVector([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }
}

impl Sub for AmbientVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let (a, b) = (self.0, rhs.0);
        AmbientVector([a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]])
    }
}

impl Neg for AmbientVector {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Mul<f64> for AmbientVector {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        let a = self.0;
        AmbientVector([a[0] * s, a[1] * s, a[2] * s, a[3] * s])
    }
}

impl Mul<AmbientVector> for f64 {
    type Output = AmbientVector;
    fn mul(self, v: AmbientVector) -> AmbientVector {
        v * self
    }
}

impl AddAssign for AmbientVector {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for AmbientVector {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl std::iter::Sum for AmbientVector {
    fn sum<It: Iterator<Item = Self>>(iter: It) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

/// A unit vector of R^8, i.e. a point of S^7.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint(AmbientVector);

impl SpherePoint {
    pub fn new(v: AmbientVector) -> Result<Self> {
        if !v.is_finite() {
            return Err(GeomError::InvalidInput("non-finite sphere point".into()));
        }
        let n = v.norm();
        if (n - 1.0).abs() > SPHERE_TOL {
            return Err(GeomError::InvalidInput(format!("sphere point has norm {n}")));
        }
        Ok(SpherePoint(v))
    }

    /// Normalizes `v`; fails only on zero or non-finite input.
    pub fn from_unnormalized(v: AmbientVector) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(GeomError::InvalidInput("cannot normalize vector".into()));
        }
        Ok(SpherePoint(v * (1.0 / n)))
    }

    pub fn vec(&self) -> &AmbientVector {
        &self.0
    }

    /// e^{i theta} q, the same point of CP^3.
    pub fn rephase(&self, theta: f64) -> Self {
        SpherePoint(self.0.scale_c(C64::from_polar(1.0, theta)))
    }
}

impl std::ops::Deref for SpherePoint {
    type Target = AmbientVector;
    fn deref(&self) -> &AmbientVector {
        &self.0
    }
}

/// Normalized 8-dimensional Gaussian sample from a seeded ChaCha stream.
pub fn random_sphere_point(seed: u64) -> SpherePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sphere_point_from_rng(&mut rng)
}

pub fn sphere_point_from_rng<R: Rng + ?Sized>(rng: &mut R) -> SpherePoint {
    loop {
        let v = gaussian_vector(rng);
        if v.norm() > 1e-6 {
            return SpherePoint(v.normalized());
        }
    }
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R) -> AmbientVector {
    let mut x = [0.0; 8];
    for xi in x.iter_mut() {
        *xi = rng.sample(StandardNormal);
    }
    AmbientVector::from_reals(x)
}
