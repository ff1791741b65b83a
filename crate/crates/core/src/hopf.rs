//! The Hopf model of CP^3.
//!
//! Tangent vectors of CP^3 are carried as horizontal lifts `(q, v)` with
//! `v` orthogonal to `q` and `iq`. The pair `(e^{it} q, e^{it} v)` represents
//! the same tangent vector. `D1` is spanned by the lifts `jq, kq`, `D2` is its
//! horizontal complement.
//!
//! The free functions taking `(q, w)` are the raw kernels used by the
//! numerical layers; `TangentRep` wraps them with the checks.

use crate::ambient::{herm_inner, real_inner, AmbientVector, SpherePoint, C64};
use crate::error::{GeomError, Result};

/// Horizontality tolerance for [`TangentRep::new`].
pub const HORIZONTAL_TOL: f64 = 1e-10;
/// Residual below which two lifts are considered to lie on one fibre.
pub const FIBRE_TOL: f64 = 1e-10;

/// Removes the radial and fibre components of `w` at `q`.
pub fn horizontal(q: &AmbientVector, w: &AmbientVector) -> AmbientVector {
    let iq = q.i();
    *w - *q * real_inner(w, q) - iq * real_inner(w, &iq)
}

/// Orthogonal projection onto span{jq, kq}.
pub fn d12(q: &AmbientVector, w: &AmbientVector) -> AmbientVector {
    let jq = q.j();
    let kq = q.k();
    jq * real_inner(w, &jq) + kq * real_inner(w, &kq)
}

/// D2 part of a horizontal vector.
pub fn d24(q: &AmbientVector, w: &AmbientVector) -> AmbientVector {
    *w - d12(q, w)
}

/// The almost product structure: -1 on D1, +1 on D2.
pub fn almost_product(q: &AmbientVector, w: &AmbientVector) -> AmbientVector {
    *w - d12(q, w) * 2.0
}

/// The nearly Kähler structure J = J1 P.
pub fn nk_j(q: &AmbientVector, w: &AmbientVector) -> AmbientVector {
    almost_product(q, w).i()
}

/// g_a on horizontal lifts at a common base.
pub fn metric_vec(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector) -> f64 {
    let x1 = d12(q, x);
    let y1 = d12(q, y);
    real_inner(&x1, &y1) + a * real_inner(&(*x - x1), &(*y - y1))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricParam(f64);

impl MetricParam {
    pub fn new(a: f64) -> Result<Self> {
        if a.is_finite() && a > 0.0 {
            Ok(MetricParam(a))
        } else {
            Err(GeomError::InvalidInput(format!("metric parameter a = {a} must be positive")))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// A tangent vector of CP^3 as a horizontal lift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentRep {
    pub base: SpherePoint,
    pub vec: AmbientVector,
}

impl TangentRep {
    pub fn new(base: SpherePoint, vec: AmbientVector) -> Result<Self> {
        let r = horizontality_residual(&base, &vec);
        if !(r <= HORIZONTAL_TOL) {
            return Err(GeomError::NotHorizontal(r));
        }
        Ok(TangentRep { base, vec })
    }

    /// Skips the horizontality check; for vectors horizontal by construction.
    pub fn new_unchecked(base: SpherePoint, vec: AmbientVector) -> Self {
        TangentRep { base, vec }
    }

    pub fn with_vec(&self, vec: AmbientVector) -> Self {
        TangentRep { base: self.base, vec }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.with_vec(self.vec * s)
    }
}

pub fn horizontality_residual(q: &AmbientVector, w: &AmbientVector) -> f64 {
    real_inner(w, q).abs().max(real_inner(w, &q.i()).abs())
}

pub fn horizontalize(q: &SpherePoint, w: &AmbientVector) -> TangentRep {
    TangentRep::new_unchecked(*q, horizontal(q, w))
}

/// The unit complex number `c` with `q2 = c q1`, if the lifts share a fibre.
pub fn fibre_phase(q1: &SpherePoint, q2: &SpherePoint) -> Option<C64> {
    let c = herm_inner(q2, q1);
    let n = c.norm();
    if n < 0.5 {
        return None;
    }
    let c = c / n;
    let r = (*q2.vec() - q1.scale_c(c)).norm();
    (r < FIBRE_TOL).then_some(c)
}

pub fn same_point(q1: &SpherePoint, q2: &SpherePoint) -> bool {
    fibre_phase(q1, q2).is_some()
}

pub fn gauge_transport(t: &TangentRep, theta: f64) -> TangentRep {
    let c = C64::from_polar(1.0, theta);
    TangentRep::new_unchecked(t.base.rephase(theta), t.vec.scale_c(c))
}

/// Re-expresses `y` at the lift used by `x`.
pub fn align(x: &TangentRep, y: &TangentRep) -> Result<TangentRep> {
    if x.base == y.base {
        return Ok(*y);
    }
    let c = fibre_phase(&x.base, &y.base).ok_or(GeomError::DifferentFibres)?;
    Ok(TangentRep::new_unchecked(x.base, y.vec.scale_c(c.conj())))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistributionSplit {
    pub d12: TangentRep,
    pub d24: TangentRep,
}

pub fn split_distributions(t: &TangentRep) -> DistributionSplit {
    let a = d12(&t.base, &t.vec);
    DistributionSplit {
        d12: t.with_vec(a),
        d24: t.with_vec(t.vec - a),
    }
}

pub fn apply_j1(t: &TangentRep) -> TangentRep {
    t.with_vec(t.vec.i())
}

pub fn apply_j(t: &TangentRep) -> TangentRep {
    t.with_vec(nk_j(&t.base, &t.vec))
}

pub fn apply_p(t: &TangentRep) -> TangentRep {
    t.with_vec(almost_product(&t.base, &t.vec))
}

/// (id - P)/2, the projection onto D1.
pub fn proj_d12(t: &TangentRep) -> TangentRep {
    t.with_vec(d12(&t.base, &t.vec))
}

/// (id + P)/2, the projection onto D2.
pub fn proj_d24(t: &TangentRep) -> TangentRep {
    t.with_vec(d24(&t.base, &t.vec))
}

pub fn metric(a: MetricParam, x: &TangentRep, y: &TangentRep) -> Result<f64> {
    let y = align(x, y)?;
    Ok(metric_vec(a.value(), &x.base, &x.vec, &y.vec))
}

/// g_a written through g1 and P.
pub fn metric_from_g1(a: MetricParam, x: &TangentRep, y: &TangentRep) -> Result<f64> {
    let a = a.value();
    let y = align(x, y)?;
    let g1 = real_inner(&x.vec, &y.vec);
    let g1p = real_inner(&almost_product(&x.base, &x.vec), &y.vec);
    Ok((1.0 + a) / 2.0 * g1 + (a - 1.0) / 2.0 * g1p)
}

/// g1 recovered from g_a and P.
pub fn g1_from_metric(a: MetricParam, x: &TangentRep, y: &TangentRep) -> Result<f64> {
    let av = a.value();
    let y = align(x, y)?;
    let ga = metric_vec(av, &x.base, &x.vec, &y.vec);
    let gap = metric_vec(av, &x.base, &almost_product(&x.base, &x.vec), &y.vec);
    Ok((1.0 + av) / (2.0 * av) * ga + (1.0 - av) / (2.0 * av) * gap)
}

/// A random horizontal vector at `q` (Gaussian ambient sample, horizontalized).
pub fn random_horizontal<R: rand::Rng + ?Sized>(rng: &mut R, q: &SpherePoint) -> TangentRep {
    horizontalize(q, &crate::ambient::gaussian_vector(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{random_sphere_point, AmbientVector as V};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e0() -> SpherePoint {
        SpherePoint::new(V::basis(0)).unwrap()
    }

    #[test]
    fn horizontalize_examples() {
        let q = random_sphere_point(1);
        assert!(horizontalize(&q, &q.i()).vec.norm() < 1e-15);
        assert!(horizontalize(&q, q.vec()).vec.norm() < 1e-15);
        let jq = q.j();
        assert!((horizontalize(&q, &jq).vec - jq).norm() < 1e-15);
    }

    #[test]
    fn same_point_examples() {
        let q = random_sphere_point(2);
        assert!(same_point(&q, &q.rephase(0.7)));
        assert!(same_point(&q, &q.rephase(std::f64::consts::PI)));
        let jq = SpherePoint::new(q.j()).unwrap();
        assert!(!same_point(&q, &jq));
    }

    #[test]
    fn split_examples() {
        let q = e0();
        let s = split_distributions(&TangentRep::new(q, V::basis(1)).unwrap());
        assert_eq!(s.d12.vec, V::basis(1));
        assert_eq!(s.d24.vec.norm(), 0.0);
        let s = split_distributions(&TangentRep::new(q, V::basis(2)).unwrap());
        assert_eq!(s.d24.vec, V::basis(2));
        assert_eq!(s.d12.vec.norm(), 0.0);
        let v = (V::basis(1) + V::basis(2)) * std::f64::consts::FRAC_1_SQRT_2;
        let s = split_distributions(&TangentRep::new(q, v).unwrap());
        assert!((s.d12.vec.norm_sqr() - 0.5).abs() < 1e-15);
        assert!((s.d24.vec.norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn j_examples() {
        let q = e0();
        let x = TangentRep::new(q, V::basis(1)).unwrap();
        assert_eq!(apply_j(&x).vec, V::basis(1).scale_c(C64::new(0.0, -1.0)));
        let y = TangentRep::new(q, V::basis(2)).unwrap();
        assert_eq!(apply_j(&y).vec, V::basis(2).i());
        assert_eq!(apply_p(&x).vec, -V::basis(1));
    }

    #[test]
    fn metric_examples() {
        let q = random_sphere_point(5);
        let jq = TangentRep::new(q, q.j()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = random_horizontal(&mut rng, &q);
        let w2 = proj_d24(&w);
        let w2 = w2.scale(1.0 / w2.vec.norm());
        for a in [0.5, 1.0, 2.0, 3.0] {
            let a = MetricParam::new(a).unwrap();
            assert!((metric(a, &jq, &jq).unwrap() - 1.0).abs() < 1e-14);
            assert!((metric(a, &w2, &w2).unwrap() - a.value()).abs() < 1e-14);
            assert!(metric(a, &jq, &w2).unwrap().abs() < 1e-14);
        }
        assert!(MetricParam::new(0.0).is_err());
    }

    #[test]
    fn metric_rejects_other_fibres() {
        let a = MetricParam::new(2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q1 = random_sphere_point(1);
        let q2 = random_sphere_point(2);
        let x = random_horizontal(&mut rng, &q1);
        let y = random_horizontal(&mut rng, &q2);
        assert_eq!(metric(a, &x, &y), Err(GeomError::DifferentFibres));
        let yt = gauge_transport(&x, 1.3);
        assert!((metric(a, &x, &yt).unwrap() - metric(a, &x, &x).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn tangent_rep_checks_horizontality() {
        let q = random_sphere_point(8);
        assert!(matches!(TangentRep::new(q, q.i()), Err(GeomError::NotHorizontal(_))));
    }
}
