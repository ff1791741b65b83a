//! Unitary actions on C^4 and the maps they induce on CP^3.
//!
//! An element `(A, eps)` acts by `p -> A eps(p)` where `eps(p)` is complex
//! conjugation when `eps` is set. Sp(2) is tested as the set of SU(4)
//! matrices commuting with the anti-linear `j` of [`crate::ambient`].

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ambient::{sphere_point_from_rng, AmbientVector, SpherePoint, C64};
use crate::error::{GeomError, Result};
use crate::hopf::{almost_product, horizontal, horizontality_residual, metric_vec, nk_j, random_horizontal, TangentRep};

pub type Mat4 = Matrix4<C64>;

/// Membership tolerance for [`is_su4`] and [`is_sp2`].
pub const GROUP_TOL: f64 = 1e-9;

/// Horizontality loss above which [`pushforward`] fails.
pub const PUSHFORWARD_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitaryMatrix(pub Mat4);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Matrix of `j` composed with conjugation: `j(v) = jmat * conj(v)`.
fn jmat() -> Mat4 {
    let mut m = Mat4::zeros();
    m[(0, 1)] = c(-1.0);
    m[(1, 0)] = c(1.0);
    m[(2, 3)] = c(-1.0);
    m[(3, 2)] = c(1.0);
    m
}

fn conj_mat(m: &Mat4) -> Mat4 {
    m.map(|z| z.conj())
}

fn max_abs(m: &Mat4) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn mat_vec(m: &Mat4, v: &AmbientVector) -> AmbientVector {
    let z = &v.0;
    let mut out = [C64::new(0.0, 0.0); 4];
    for (r, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|k| m[(r, k)] * z[k]).sum();
    }
    AmbientVector(out)
}

/// `max(|A* A - 1|, |det A - 1|)`.
pub fn su4_residual(m: &Mat4) -> f64 {
    let u = max_abs(&(m.adjoint() * m - Mat4::identity()));
    u.max((m.determinant() - c(1.0)).norm())
}

/// `|A jmat - jmat conj(A)|`, zero exactly when `A j = j A`.
pub fn sp2_residual(m: &Mat4) -> f64 {
    let j = jmat();
    max_abs(&(m * j - j * conj_mat(m)))
}

pub fn is_su4(m: &Mat4) -> bool {
    su4_residual(m) < GROUP_TOL
}

pub fn is_sp2(m: &Mat4) -> bool {
    is_su4(m) && sp2_residual(m) < GROUP_TOL
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsometryElement {
    pub a: UnitaryMatrix,
    /// Conjugation component.
    pub eps: bool,
}

impl IsometryElement {
    pub fn identity() -> Self {
        IsometryElement { a: UnitaryMatrix(Mat4::identity()), eps: false }
    }

    pub fn new(m: Mat4, eps: bool) -> Self {
        IsometryElement { a: UnitaryMatrix(m), eps }
    }

    pub fn apply(&self, v: &AmbientVector) -> AmbientVector {
        let v = if self.eps { v.conj() } else { *v };
        mat_vec(&self.a.0, &v)
    }

    /// `(A, e)(B, n) = (A e(B), e + n)`.
    pub fn compose(&self, other: &Self) -> Self {
        let b = if self.eps { conj_mat(&other.a.0) } else { other.a.0 };
        IsometryElement::new(self.a.0 * b, self.eps ^ other.eps)
    }

    pub fn inverse(&self) -> Self {
        let inv = self.a.0.adjoint();
        IsometryElement::new(if self.eps { conj_mat(&inv) } else { inv }, self.eps)
    }
}

pub fn induced_map(el: &IsometryElement, q: &SpherePoint) -> Result<SpherePoint> {
    SpherePoint::from_unnormalized(el.apply(q))
}

pub fn pushforward(el: &IsometryElement, t: &TangentRep) -> Result<TangentRep> {
    let q = SpherePoint::from_unnormalized(el.apply(&t.base))?;
    let v = el.apply(&t.vec);
    let r = horizontality_residual(&q, &v);
    if r > PUSHFORWARD_TOL * (1.0 + v.norm()) {
        return Err(GeomError::NotFibrePreserving(r));
    }
    Ok(TangentRep::new_unchecked(q, horizontal(&q, &v)))
}

/// Independent stream for sample `i` of a seeded loop.
pub fn sample_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

fn samples(seed: u64, n: usize) -> impl Iterator<Item = (SpherePoint, AmbientVector, AmbientVector)> {
    (0..n as u64).map(move |i| {
        let mut rng = sample_rng(seed, i);
        let q = sphere_point_from_rng(&mut rng);
        let x = random_horizontal(&mut rng, &q).vec;
        let y = random_horizontal(&mut rng, &q).vec;
        (q, x, y)
    })
}

/// Max of `|g_a(F_* X, F_* Y) - g_a(X, Y)|` over seeded samples. A map that
/// breaks horizontality reports infinity.
pub fn isometry_residual(el: &IsometryElement, a: f64, n_samples: usize, seed: u64) -> f64 {
    samples(seed, n_samples)
        .map(|(q, x, y)| {
            let push = |v: AmbientVector| pushforward(el, &TangentRep::new_unchecked(q, v));
            match (push(x), push(y)) {
                (Ok(fx), Ok(fy)) => (metric_vec(a, &fx.base, &fx.vec, &fy.vec) - metric_vec(a, &q, &x, &y)).abs(),
                _ => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureTransport {
    pub p_residual: f64,
    pub j_sign: i8,
    pub j_residual: f64,
}

pub fn structure_transport(el: &IsometryElement, n_samples: usize, seed: u64) -> Result<StructureTransport> {
    let mut p_res: f64 = 0.0;
    let mut j_res = [0.0f64; 2];
    for (q, x, _) in samples(seed, n_samples) {
        let t = |v: AmbientVector| TangentRep::new_unchecked(q, v);
        let fx = pushforward(el, &t(x))?;
        let fp = pushforward(el, &t(almost_product(&q, &x)))?;
        let fj = pushforward(el, &t(nk_j(&q, &x)))?;
        let b = &fx.base;
        p_res = p_res.max((fp.vec - almost_product(b, &fx.vec)).norm());
        let jfx = nk_j(b, &fx.vec);
        j_res[0] = j_res[0].max((fj.vec - jfx).norm());
        j_res[1] = j_res[1].max((fj.vec + jfx).norm());
    }
    let (j_sign, j_residual) = if j_res[0] <= j_res[1] { (1, j_res[0]) } else { (-1, j_res[1]) };
    Ok(StructureTransport { p_residual: p_res, j_sign, j_residual })
}

fn gaussian_mat<R: Rng + ?Sized>(rng: &mut R) -> Mat4 {
    Mat4::from_fn(|_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Projection of a matrix onto the Lie algebra sp(2).
pub fn project_sp2_algebra(x: &Mat4) -> Mat4 {
    let skew = (x - x.adjoint()) * c(0.5);
    let j = jmat();
    // j^{-1} = -j
    (skew - j * conj_mat(&skew) * j) * c(0.5)
}

/// `exp` of a random element of sp(2) with Gaussian entries.
pub fn random_sp2(seed: u64) -> Mat4 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    project_sp2_algebra(&gaussian_mat(&mut rng)).exp()
}

/// Haar-random SU(4) element via QR with phase fixing.
pub fn random_su4(seed: u64) -> Mat4 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qr = gaussian_mat(&mut rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = Mat4::from_diagonal(&r.diagonal().map(|z| if z.norm() > 0.0 { z / z.norm() } else { c(1.0) }));
    let u = q * phases;
    let d = u.determinant();
    u * C64::from_polar(1.0, -d.arg() / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::random_sphere_point;
    use crate::hopf::same_point;

    #[test]
    fn membership_examples() {
        let id = Mat4::identity();
        assert!(is_su4(&id) && is_sp2(&id));
        let p = 0.37;
        let d = Mat4::from_diagonal(&nalgebra::Vector4::new(
            C64::from_polar(1.0, p),
            C64::from_polar(1.0, p),
            C64::from_polar(1.0, p),
            C64::from_polar(1.0, -3.0 * p),
        ));
        assert!(is_su4(&d));
        assert!(!is_sp2(&d));
        for s in 0..10 {
            assert!(is_sp2(&random_sp2(s)));
            let u = random_su4(s);
            assert!(is_su4(&u) && !is_sp2(&u));
        }
    }

    #[test]
    fn matrix_commutes_with_ambient_j() {
        let m = random_sp2(3);
        let v = *random_sphere_point(4).vec();
        assert!((mat_vec(&m, &v.j()) - mat_vec(&m, &v).j()).norm() < 1e-12);
    }

    #[test]
    fn group_closure() {
        for s in 0..50 {
            let a = random_sp2(2 * s);
            let b = random_sp2(2 * s + 1);
            assert!(sp2_residual(&(a * b)) < 1e-8 && su4_residual(&(a * b)) < 1e-8);
            assert!(sp2_residual(&a.adjoint()) < 1e-8);
        }
    }

    #[test]
    fn induced_map_is_well_defined() {
        let el = IsometryElement::new(random_su4(1), true);
        let q = random_sphere_point(2);
        let a = induced_map(&el, &q).unwrap();
        let b = induced_map(&el, &q.rephase(1.1)).unwrap();
        assert!(same_point(&a, &b));
        let id = IsometryElement::identity();
        assert_eq!(induced_map(&id, &q).unwrap(), q);
    }

    #[test]
    fn conjugation_keeps_lifts_horizontal() {
        let q = random_sphere_point(5);
        let el = IsometryElement::new(Mat4::identity(), true);
        let t = pushforward(&el, &TangentRep::new_unchecked(q, q.j())).unwrap();
        assert_eq!(t.base.vec(), &q.conj());
        assert!(horizontality_residual(&t.base, &t.vec) < 1e-15);
    }

    #[test]
    fn composition_law() {
        let e1 = IsometryElement::new(random_sp2(1), true);
        let e2 = IsometryElement::new(random_su4(2), true);
        let e3 = IsometryElement::new(random_sp2(3), false);
        let q = random_sphere_point(9);
        for (x, y) in [(e1, e2), (e2, e3), (e3, e1)] {
            let lhs = x.compose(&y).apply(&q);
            let rhs = x.apply(&y.apply(&q));
            assert!((lhs - rhs).norm() < 1e-12);
            let back = x.inverse().apply(&x.apply(&q));
            assert!((back - *q.vec()).norm() < 1e-12);
        }
    }

    #[test]
    fn isometries_and_transport() {
        for s in 0..5 {
            let sp = IsometryElement::new(random_sp2(s), false);
            let su = IsometryElement::new(random_su4(s), false);
            for a in [0.5, 2.0, 3.0] {
                assert!(isometry_residual(&sp, a, 10, s) < 1e-9);
                assert!(isometry_residual(&su, a, 10, s) > 1e-2);
            }
            assert!(isometry_residual(&su, 1.0, 10, s) < 1e-9);
            let t = structure_transport(&sp, 10, s).unwrap();
            assert!(t.p_residual < 1e-8 && t.j_sign == 1 && t.j_residual < 1e-8);
            let conj = IsometryElement::new(random_sp2(s), true);
            assert!(isometry_residual(&conj, 2.0, 10, s) < 1e-9);
            let t = structure_transport(&conj, 10, s).unwrap();
            assert!(t.p_residual < 1e-8 && t.j_sign == -1 && t.j_residual < 1e-8);
        }
        let t = structure_transport(&IsometryElement::identity(), 5, 0).unwrap();
        assert!(t.p_residual < 1e-14 && t.j_residual < 1e-14);
    }

    #[test]
    fn non_unitary_breaks_horizontality() {
        let mut m = Mat4::identity();
        m[(0, 1)] = c(0.5);
        let el = IsometryElement::new(m, false);
        let q = random_sphere_point(11);
        let mut rng = sample_rng(1, 0);
        let x = random_horizontal(&mut rng, &q);
        assert!(matches!(pushforward(&el, &x), Err(GeomError::NotFibrePreserving(_))));
    }
}
