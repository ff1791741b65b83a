//! Riemann curvature of (CP^3, g_a): closed form, Ricci and scalar
//! curvature, sectional curvature, and a finite-difference oracle.
//!
//! Sign convention: `R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z`,
//! so that at `a = 1` the Fubini-Study tensor has `sec(X, J1 X) = 4`.

use crate::ambient::{real_inner, AmbientVector};
use crate::connection::{central_diff, covariant_kernel, d_a_vec, metric_basis, nabla_point, ConnectionConfig};
use crate::error::{GeomError, Result};
use crate::hopf::{align, almost_product, d12, d24, horizontal, metric_vec, nk_j, TangentRep};

/// Agreement expected between the closed form and the FD oracle.
pub const CURVATURE_FD_TOL: f64 = 1e-4;

/// Gram residual above which [`sectional`] rejects its input.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// `(X ^_a Y) Z = g_a(Y,Z) X - g_a(X,Z) Y`.
pub fn wedge_vec(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector, z: &AmbientVector) -> AmbientVector {
    *x * metric_vec(a, q, y, z) - *y * metric_vec(a, q, x, z)
}

pub fn riemann_closed_vec(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector, z: &AmbientVector) -> AmbientVector {
    let w = |x: &AmbientVector, y: &AmbientVector, z: &AmbientVector| wedge_vec(a, q, x, y, z);
    let j = |v: &AmbientVector| nk_j(q, v);
    let p = |v: &AmbientVector| almost_product(q, v);
    let g = |u: &AmbientVector, v: &AmbientVector| metric_vec(a, q, u, v);
    let wxy = w(x, y, z);
    let t0 = wxy * ((a - 1.0) * (a + 2.0) / (a * a));
    let t1 = (wxy + w(&x.i(), &y.i(), z) + z.i() * (2.0 * g(x, &y.i()))) * (1.0 / a);
    let t2 = (wxy + w(&j(x), &j(y), z) + j(z) * (2.0 * g(x, &j(y)))) * ((1.0 - a) / (a * a));
    let pz = p(z);
    let t3 = (w(x, y, &pz) + p(&wxy) - p(&w(x, y, &pz)) * ((a + 2.0) / a)) * ((1.0 - a) / a);
    t0 + t1 + t2 + t3
}

/// Fubini-Study curvature `(X ^ Y)Z + (J1X ^ J1Y)Z + 2 g1(X, J1 Y) J1 Z`.
pub fn riemann_fs_vec(q: &AmbientVector, x: &AmbientVector, y: &AmbientVector, z: &AmbientVector) -> AmbientVector {
    wedge_vec(1.0, q, x, y, z) + wedge_vec(1.0, q, &x.i(), &y.i(), z) + z.i() * (2.0 * real_inner(x, &y.i()))
}

fn common3(x: &TangentRep, y: &TangentRep, z: &TangentRep) -> Result<(AmbientVector, AmbientVector, AmbientVector)> {
    Ok((x.vec, align(x, y)?.vec, align(x, z)?.vec))
}

pub fn wedge_a(a: f64, x: &TangentRep, y: &TangentRep, z: &TangentRep) -> Result<TangentRep> {
    let (xv, yv, zv) = common3(x, y, z)?;
    Ok(x.with_vec(wedge_vec(a, &x.base, &xv, &yv, &zv)))
}

pub fn riemann_closed(a: f64, x: &TangentRep, y: &TangentRep, z: &TangentRep) -> Result<TangentRep> {
    let (xv, yv, zv) = common3(x, y, z)?;
    Ok(x.with_vec(riemann_closed_vec(a, &x.base, &xv, &yv, &zv)))
}

pub fn riemann_fs(x: &TangentRep, y: &TangentRep, z: &TangentRep) -> Result<TangentRep> {
    let (xv, yv, zv) = common3(x, y, z)?;
    Ok(x.with_vec(riemann_fs_vec(&x.base, &xv, &yv, &zv)))
}

/// How [`riemann_numeric_with`] differentiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvatureMode {
    /// Commutator of covariant derivatives along the two-parameter map
    /// `(s, t) -> (q + sX + tY)/|q + sX + tY|` with `Z` horizontalized.
    Direct,
    /// Fubini-Study tensor plus the covariant derivative of the difference
    /// tensor `D_a`, minus the commutator of `D_a`.
    DifferenceTensor,
}

/// `nabla^a_t` of the horizontalized `z` along `t -> p + t w` (normalized), at `t = 0`.
fn nabla_t(a: f64, p: &AmbientVector, w: &AmbientVector, z: &AmbientVector) -> AmbientVector {
    let n = p.norm();
    let phi = *p * (1.0 / n);
    let dphi = (*w - phi * real_inner(&phi, w)) * (1.0 / n);
    let (iphi, idphi) = (phi.i(), dphi.i());
    let dz = -(dphi * real_inner(z, &phi) + phi * real_inner(z, &dphi) + idphi * real_inner(z, &iphi) + iphi * real_inner(z, &idphi));
    covariant_kernel(a, &phi, &dphi, &horizontal(&phi, z), &dz)
}

fn direct_vec(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector, z: &AmbientVector, h: f64, rich: bool) -> AmbientVector {
    let outer = |u: &AmbientVector, v: &AmbientVector| {
        let dv = central_diff(|s| nabla_t(a, &(*q + *u * s), v, z), h, rich);
        covariant_kernel(a, q, u, &nabla_t(a, q, v, z), &dv)
    };
    outer(x, y) - outer(y, x)
}

fn difference_tensor_vec(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector, z: &AmbientVector, cfg: &ConnectionConfig) -> AmbientVector {
    let d = |u: &AmbientVector, v: &AmbientVector| d_a_vec(a, q, u, v);
    let nabla_d = |u: &AmbientVector, v: &AmbientVector, w: &AmbientVector| {
        let whole = nabla_point(a, q, u, |p| d_a_vec(a, p, &horizontal(p, v), &horizontal(p, w)), cfg);
        let nv = nabla_point(a, q, u, |p| horizontal(p, v), cfg);
        let nw = nabla_point(a, q, u, |p| horizontal(p, w), cfg);
        whole - d(&nv, w) - d(v, &nw)
    };
    riemann_fs_vec(q, x, y, z) + nabla_d(x, y, z) - nabla_d(y, x, z) - (d(x, &d(y, z)) - d(y, &d(x, z)))
}

/// A numeric curvature value with the gap between the extrapolated and the
/// plain central-difference estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericCurvature {
    pub value: AmbientVector,
    pub richardson_gap: f64,
}

pub fn riemann_numeric_vec(
    a: f64,
    q: &AmbientVector,
    x: &AmbientVector,
    y: &AmbientVector,
    z: &AmbientVector,
    cfg: &ConnectionConfig,
    mode: CurvatureMode,
) -> NumericCurvature {
    let eval = |rich: bool| {
        let c = ConnectionConfig { richardson: rich, ..*cfg };
        match mode {
            CurvatureMode::Direct => direct_vec(a, q, x, y, z, cfg.fd_step, rich),
            CurvatureMode::DifferenceTensor => difference_tensor_vec(a, q, x, y, z, &c),
        }
    };
    let value = eval(cfg.richardson);
    let other = eval(!cfg.richardson);
    NumericCurvature { value, richardson_gap: (value - other).norm() }
}

/// Direct-mode FD curvature; fails when the two step estimates disagree by
/// more than ten times [`CURVATURE_FD_TOL`].
pub fn riemann_numeric(a: f64, x: &TangentRep, y: &TangentRep, z: &TangentRep, cfg: &ConnectionConfig) -> Result<TangentRep> {
    riemann_numeric_with(a, x, y, z, cfg, CurvatureMode::Direct)
}

pub fn riemann_numeric_with(
    a: f64,
    x: &TangentRep,
    y: &TangentRep,
    z: &TangentRep,
    cfg: &ConnectionConfig,
    mode: CurvatureMode,
) -> Result<TangentRep> {
    cfg.validate()?;
    let (xv, yv, zv) = common3(x, y, z)?;
    let r = riemann_numeric_vec(a, &x.base, &xv, &yv, &zv, cfg, mode);
    let scale = 1.0 + xv.norm() * yv.norm() * zv.norm();
    if r.richardson_gap > 10.0 * CURVATURE_FD_TOL * scale {
        return Err(GeomError::FdInstability(r.richardson_gap));
    }
    Ok(x.with_vec(r.value))
}

/// Ricci eigenvalues `(on D1, on D2)` as operators for g_a.
pub fn ricci_eigenvalues(a: f64) -> (f64, f64) {
    (4.0 * (1.0 + 1.0 / (a * a)), 4.0 * (3.0 * a - 1.0) / (a * a))
}

pub fn ricci_vec(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector) -> f64 {
    let (l1, l2) = ricci_eigenvalues(a);
    l1 * metric_vec(a, q, &d12(q, x), y) + l2 * metric_vec(a, q, &d24(q, x), y)
}

pub fn ricci(a: f64, x: &TangentRep, y: &TangentRep) -> Result<f64> {
    let y = align(x, y)?;
    Ok(ricci_vec(a, &x.base, &x.vec, &y.vec))
}

/// `8 (a^2 + 6a - 1) / a^2`.
pub fn scalar(a: f64) -> f64 {
    8.0 * (a * a + 6.0 * a - 1.0) / (a * a)
}

/// Ricci as the trace `sum_k g_a(R(e_k, X) Y, e_k)` of the closed-form tensor.
pub fn ricci_trace_vec(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector) -> f64 {
    metric_basis(a, q)
        .iter()
        .map(|e| metric_vec(a, q, &riemann_closed_vec(a, q, e, x, y), e))
        .sum()
}

/// Scalar curvature as the double trace of the closed-form tensor at `q`.
pub fn scalar_trace(a: f64, q: &AmbientVector) -> f64 {
    metric_basis(a, q).iter().map(|e| ricci_trace_vec(a, q, e, e)).sum()
}

pub fn sectional_vec(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector) -> f64 {
    let g = |u: &AmbientVector, v: &AmbientVector| metric_vec(a, q, u, v);
    let p = |v: &AmbientVector| almost_product(q, v);
    let gyy = g(y, &p(y));
    let gxx = g(&p(x), x);
    let gxy = g(x, &p(y));
    (a * a + a - 1.0) / (a * a) + 3.0 / a * g(x, &y.i()).powi(2) + 3.0 * (1.0 - a) / (a * a) * g(x, &nk_j(q, y)).powi(2)
        + (1.0 - a) / a * (gyy + gxx - (a + 2.0) / a * (gyy * gxx - gxy * gxy))
}

/// Sectional curvature of a g_a-orthonormal pair.
pub fn sectional(a: f64, x: &TangentRep, y: &TangentRep) -> Result<f64> {
    let y = align(x, y)?;
    let q = &x.base;
    let gram = (metric_vec(a, q, &x.vec, &x.vec) - 1.0)
        .abs()
        .max((metric_vec(a, q, &y.vec, &y.vec) - 1.0).abs())
        .max(metric_vec(a, q, &x.vec, &y.vec).abs());
    if !(gram <= ORTHONORMAL_TOL) {
        return Err(GeomError::NotOrthonormal(gram));
    }
    Ok(sectional_vec(a, q, &x.vec, &y.vec))
}

/// `g_a(R(X,Y)Y, X)` from the closed-form tensor.
pub fn sectional_from_tensor(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector) -> f64 {
    metric_vec(a, q, &riemann_closed_vec(a, q, x, y, y), x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{random_sphere_point, SpherePoint};
    use crate::hopf::random_horizontal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const AS: [f64; 4] = [0.5, 1.0, 2.0, 3.0];

    fn sample(seed: u64) -> (SpherePoint, [AmbientVector; 4]) {
        let q = random_sphere_point(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1 << 40));
        let v = [0; 4].map(|_| random_horizontal(&mut rng, &q).vec);
        (q, v)
    }

    #[test]
    fn wedge_examples() {
        let (q, [x, y, _, _]) = sample(1);
        let a = 2.0;
        let b = metric_basis(a, &q);
        assert!(wedge_vec(a, &q, &b[0], &b[1], &b[2]).norm() < 1e-15);
        let r = wedge_vec(a, &q, &b[3], &b[4], &b[3]) + b[4];
        assert!(r.norm() < 1e-14);
        let s = wedge_vec(a, &q, &x, &y, &b[0]) + wedge_vec(a, &q, &y, &x, &b[0]);
        assert!(s.norm() < 1e-14);
    }

    #[test]
    fn closed_form_symmetries() {
        for s in 0..10 {
            let (q, [x, y, z, w]) = sample(s);
            for a in AS {
                let r = |x: &AmbientVector, y: &AmbientVector, z: &AmbientVector| riemann_closed_vec(a, &q, x, y, z);
                let rr = |x, y, z, w: &AmbientVector| metric_vec(a, &q, &r(x, y, z), w);
                assert!((r(&x, &y, &z) + r(&y, &x, &z)).norm() < 1e-10);
                assert!((rr(&x, &y, &z, &w) - rr(&z, &w, &x, &y)).abs() < 1e-10);
                assert!((rr(&x, &y, &z, &w) + rr(&x, &y, &w, &z)).abs() < 1e-10);
                assert!((r(&x, &y, &z) + r(&y, &z, &x) + r(&z, &x, &y)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn fubini_study_at_a_one() {
        for s in 0..10 {
            let (q, [x, y, z, _]) = sample(s);
            let d = riemann_closed_vec(1.0, &q, &x, &y, &z) - riemann_fs_vec(&q, &x, &y, &z);
            assert!(d.norm() < 1e-10);
        }
    }

    #[test]
    fn numeric_matches_closed_form() {
        let cfg = ConnectionConfig::default();
        for s in 0..3 {
            let (q, [x, y, z, _]) = sample(100 + s);
            for a in AS {
                let want = riemann_closed_vec(a, &q, &x, &y, &z);
                for mode in [CurvatureMode::Direct, CurvatureMode::DifferenceTensor] {
                    let got = riemann_numeric_vec(a, &q, &x, &y, &z, &cfg, mode);
                    let r = (got.value - want).norm();
                    assert!(r < CURVATURE_FD_TOL, "a={a} {mode:?} {r:e}");
                }
            }
        }
    }

    #[test]
    fn numeric_bianchi() {
        let cfg = ConnectionConfig::default();
        let (q, [x, y, z, _]) = sample(7);
        let r = |x: &AmbientVector, y: &AmbientVector, z: &AmbientVector| {
            riemann_numeric_vec(2.0, &q, x, y, z, &cfg, CurvatureMode::Direct).value
        };
        assert!((r(&x, &y, &z) + r(&y, &z, &x) + r(&z, &x, &y)).norm() < 1e-4);
    }

    #[test]
    fn scalar_and_ricci() {
        assert_eq!(scalar(2.0), 30.0);
        assert_eq!(scalar(1.0), 48.0);
        assert_eq!(scalar(0.5), 72.0);
        assert_eq!(ricci_eigenvalues(2.0), (5.0, 5.0));
        assert_eq!(ricci_eigenvalues(1.0), (8.0, 8.0));
        assert_eq!(ricci_eigenvalues(0.5), (20.0, 8.0));
        let (q, [x, y, _, _]) = sample(3);
        for a in AS {
            assert!((scalar_trace(a, &q) - scalar(a)).abs() < 1e-9);
            assert!((ricci_trace_vec(a, &q, &x, &y) - ricci_vec(a, &q, &x, &y)).abs() < 1e-9);
        }
    }

    #[test]
    fn sectional_examples() {
        let (q, [x, _, _, _]) = sample(5);
        let x1 = x * (1.0 / x.norm());
        assert!((sectional_vec(1.0, &q, &x1, &x1.i()) - 4.0).abs() < 1e-12);
        let x2 = d24(&q, &x);
        let x2 = x2 * (1.0 / metric_vec(2.0, &q, &x2, &x2).sqrt());
        assert!((sectional_vec(2.0, &q, &x2, &x2.i()) - 2.0).abs() < 1e-12);
        let t = |v: AmbientVector| TangentRep::new_unchecked(q, v);
        assert!(matches!(sectional(2.0, &t(x), &t(x.i())), Err(GeomError::NotOrthonormal(_))));
    }

    #[test]
    fn sectional_matches_tensor() {
        for s in 0..10 {
            let (q, [x, y, _, _]) = sample(200 + s);
            for a in AS {
                let g = |u: &AmbientVector, v: &AmbientVector| metric_vec(a, &q, u, v);
                let e1 = x * (1.0 / g(&x, &x).sqrt());
                let y2 = y - e1 * g(&y, &e1);
                let e2 = y2 * (1.0 / g(&y2, &y2).sqrt());
                let t = |v: AmbientVector| TangentRep::new_unchecked(q, v);
                let sec = sectional(a, &t(e1), &t(e2)).unwrap();
                assert!((sec - sectional_from_tensor(a, &q, &e1, &e2)).abs() < 1e-9);
            }
        }
    }
}
