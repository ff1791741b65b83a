//! Levi-Civita connections of g_a on horizontal lifts.
//!
//! `nabla^1` comes from the Riemannian submersion S^7 -> CP^3: differentiate
//! the lifted field in R^8, keep the horizontal part, and correct for the
//! fibre component of the velocity of the underlying map. `nabla^a` adds the
//! closed-form difference tensor `D_a`.
//!
//! Tensor derivatives at a point extend vectors by horizontalizing a constant
//! ambient vector and differentiate along `s -> (q + s X)/|q + s X|`.

use crate::ambient::{real_inner, AmbientVector, SpherePoint};
use crate::error::{GeomError, Result};
use crate::hopf::{align, d12, d24, horizontal, metric_vec, nk_j, TangentRep};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectionConfig {
    pub fd_step: f64,
    /// Richardson extrapolation over steps h and h/2.
    pub richardson: bool,
}

impl Default for ConnectionConfig {
    fn default() -> Self {
        ConnectionConfig { fd_step: 1e-5, richardson: true }
    }
}

impl ConnectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fd_step.is_finite() && self.fd_step > 0.0 && self.fd_step < 0.1 {
            Ok(())
        } else {
            Err(GeomError::InvalidInput(format!("fd_step {} out of range", self.fd_step)))
        }
    }
}

/// Central difference of `f` at 0, optionally Richardson-extrapolated.
pub fn central_diff<F>(f: F, h: f64, richardson: bool) -> AmbientVector
where
    F: Fn(f64) -> AmbientVector,
{
    let d = |h: f64| (f(h) - f(-h)) * (0.5 / h);
    if richardson {
        (d(h / 2.0) * 4.0 - d(h)) * (1.0 / 3.0)
    } else {
        d(h)
    }
}

/// Scalar version of [`central_diff`].
pub fn central_diff_scalar<F>(f: F, h: f64, richardson: bool) -> f64
where
    F: Fn(f64) -> f64,
{
    let d = |h: f64| (f(h) - f(-h)) * (0.5 / h);
    if richardson {
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    } else {
        d(h)
    }
}

/// The point of S^7 reached from `q` in direction `x` after normalization.
pub fn curve_point(q: &AmbientVector, x: &AmbientVector, s: f64) -> AmbientVector {
    (*q + *x * s).normalized()
}

/// The tensor G on lifts at `q`.
///
/// This is the skew part of `nabla^1 J`; the numerical definition is
/// [`g_numeric`], against which this expression is tested.
pub fn g_closed(q: &AmbientVector, x: &AmbientVector, y: &AmbientVector) -> AmbientVector {
    let jq = q.j();
    let kq = q.k();
    let (jx, kx, jy, ky) = (x.j(), x.k(), y.j(), y.k());
    let w = jq * (2.0 * real_inner(y, &jx))
        + kq * (2.0 * real_inner(y, &kx))
        + jx * real_inner(y, &jq)
        - jy * real_inner(x, &jq)
        + kx * real_inner(y, &kq)
        - ky * real_inner(x, &kq);
    -horizontal(q, &w).i()
}

/// `D_a(X, Y) = (a-1)/a (id+P)/2 G(J1 X, Y)`.
pub fn d_a_vec(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector) -> AmbientVector {
    if a == 1.0 {
        return AmbientVector::ZERO;
    }
    d24(q, &g_closed(q, &x.i(), y)) * ((a - 1.0) / a)
}

/// Symmetric part of `nabla^a J`: `(2-a)/a J (id+P)/2 G(J1 X, Y)`.
pub fn g_a_plus_vec(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector) -> AmbientVector {
    nk_j(q, &d24(q, &g_closed(q, &x.i(), y))) * ((2.0 - a) / a)
}

/// `(nabla^a J1)(X, Y) = 2(a-1)/a G((id-P)/2 X, (id+P)/2 Y)`.
pub fn nabla_a_j1_vec(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector) -> AmbientVector {
    g_closed(q, &d12(q, x), &d24(q, y)) * (2.0 * (a - 1.0) / a)
}

/// Covariant derivative of a horizontal field along a map, from ambient data.
///
/// `c` is the map value, `dc` its derivative, `y` the lifted field and `dy`
/// its ambient derivative, all in the same parameter direction.
pub fn covariant_kernel(
    a: f64,
    c: &AmbientVector,
    dc: &AmbientVector,
    y: &AmbientVector,
    dy: &AmbientVector,
) -> AmbientVector {
    let lam = real_inner(dc, &c.i());
    let out = horizontal(c, dy) - y.i() * lam;
    if a == 1.0 {
        out
    } else {
        out + d_a_vec(a, c, &horizontal(c, dc), y)
    }
}

/// `nabla^a_X` of the field `q' -> field(q')` at `q`, where `field` returns a
/// horizontal vector at `q'` and `x` is horizontal at `q`.
pub fn nabla_point<F>(a: f64, q: &AmbientVector, x: &AmbientVector, field: F, cfg: &ConnectionConfig) -> AmbientVector
where
    F: Fn(&AmbientVector) -> AmbientVector,
{
    let dy = central_diff(|s| field(&curve_point(q, x, s)), cfg.fd_step, cfg.richardson);
    covariant_kernel(a, q, x, &field(q), &dy)
}

/// `(nabla^a_X J) Y` by finite differences with the constant extension of `y`.
pub fn nabla_j_numeric(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector, cfg: &ConnectionConfig) -> AmbientVector {
    let jy = nabla_point(a, q, x, |p| nk_j(p, &horizontal(p, y)), cfg);
    let ny = nabla_point(a, q, x, |p| horizontal(p, y), cfg);
    jy - nk_j(q, &ny)
}

/// `(nabla^a_X J1) Y` by finite differences.
pub fn nabla_j1_numeric(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector, cfg: &ConnectionConfig) -> AmbientVector {
    let jy = nabla_point(a, q, x, |p| horizontal(p, y).i(), cfg);
    let ny = nabla_point(a, q, x, |p| horizontal(p, y), cfg);
    jy - ny.i()
}

/// G as the skew part of `nabla^1 J`.
pub fn g_numeric(q: &AmbientVector, x: &AmbientVector, y: &AmbientVector, cfg: &ConnectionConfig) -> AmbientVector {
    (nabla_j_numeric(1.0, q, x, y, cfg) - nabla_j_numeric(1.0, q, y, x, cfg)) * 0.5
}

/// Symmetric part of `nabla^a J` by finite differences.
pub fn g_a_plus_numeric(a: f64, q: &AmbientVector, x: &AmbientVector, y: &AmbientVector, cfg: &ConnectionConfig) -> AmbientVector {
    (nabla_j_numeric(a, q, x, y, cfg) + nabla_j_numeric(a, q, y, x, cfg)) * 0.5
}

/// `G(X, Y)` from its numerical definition; the arguments must share a fibre.
pub fn g_tensor(x: &TangentRep, y: &TangentRep, cfg: &ConnectionConfig) -> Result<TangentRep> {
    let y = align(x, y)?;
    Ok(x.with_vec(g_numeric(&x.base, &x.vec, &y.vec, cfg)))
}

pub fn g_tensor_closed(x: &TangentRep, y: &TangentRep) -> Result<TangentRep> {
    let y = align(x, y)?;
    Ok(x.with_vec(g_closed(&x.base, &x.vec, &y.vec)))
}

pub fn d_a(a: f64, x: &TangentRep, y: &TangentRep) -> Result<TangentRep> {
    let y = align(x, y)?;
    Ok(x.with_vec(d_a_vec(a, &x.base, &x.vec, &y.vec)))
}

pub fn g_a_plus(a: f64, x: &TangentRep, y: &TangentRep) -> Result<TangentRep> {
    let y = align(x, y)?;
    Ok(x.with_vec(g_a_plus_vec(a, &x.base, &x.vec, &y.vec)))
}

pub fn nabla_a_j1(a: f64, x: &TangentRep, y: &TangentRep) -> Result<TangentRep> {
    let y = align(x, y)?;
    Ok(x.with_vec(nabla_a_j1_vec(a, &x.base, &x.vec, &y.vec)))
}

/// A horizontal field along a map from a parameter domain into S^7.
pub struct VectorFieldAlongMap<'a> {
    pub chart: &'a (dyn Fn(&[f64]) -> AmbientVector + Sync),
    /// Lifted field at `chart(u)`.
    pub field: &'a (dyn Fn(&[f64]) -> AmbientVector + Sync),
}

impl VectorFieldAlongMap<'_> {
    fn shifted(&self, at: &[f64], du: &[f64], s: f64) -> Vec<f64> {
        at.iter().zip(du).map(|(u, d)| u + s * d).collect()
    }

    /// Horizontal parts of the chart's partial derivatives at `at`.
    pub fn tangent_columns(&self, at: &[f64], cfg: &ConnectionConfig) -> Vec<AmbientVector> {
        let c = (self.chart)(at);
        (0..at.len())
            .map(|k| {
                let mut du = vec![0.0; at.len()];
                du[k] = 1.0;
                let d = central_diff(|s| (self.chart)(&self.shifted(at, &du, s)), cfg.fd_step, cfg.richardson);
                horizontal(&c, &d)
            })
            .collect()
    }
}

/// `nabla^a` of the field in the parameter direction `du`.
pub fn nabla_along(a: f64, f: &VectorFieldAlongMap, at: &[f64], du: &[f64], cfg: &ConnectionConfig) -> Result<TangentRep> {
    cfg.validate()?;
    if du.len() != at.len() {
        return Err(GeomError::InvalidInput("direction has wrong dimension".into()));
    }
    let c = (f.chart)(at);
    let dc = central_diff(|s| (f.chart)(&f.shifted(at, du, s)), cfg.fd_step, cfg.richardson);
    let dy = central_diff(|s| (f.field)(&f.shifted(at, du, s)), cfg.fd_step, cfg.richardson);
    let y = (f.field)(at);
    let out = covariant_kernel(a, &c, &dc, &y, &dy);
    if !out.is_finite() {
        return Err(GeomError::FdInstability(f64::INFINITY));
    }
    Ok(TangentRep::new_unchecked(SpherePoint::from_unnormalized(c)?, out))
}

/// Parameter direction whose pushforward is `x`, by least squares on the
/// horizontal Jacobian. Fails if `x` is not tangent to the image or the chart
/// is rank deficient at `at`.
pub fn param_direction(f: &VectorFieldAlongMap, at: &[f64], x: &TangentRep, cfg: &ConnectionConfig) -> Result<Vec<f64>> {
    let cols = f.tangent_columns(at, cfg);
    let c = (f.chart)(at);
    let base = SpherePoint::from_unnormalized(c)?;
    let xv = align(&TangentRep::new_unchecked(base, AmbientVector::ZERO), x)?.vec;
    let m = nalgebra::DMatrix::from_fn(8, cols.len(), |r, k| cols[k].to_reals()[r]);
    let b = nalgebra::DVector::from_row_slice(&xv.to_reals());
    let svd = m.clone().svd(true, true);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin < 1e-8 {
        return Err(GeomError::DegeneratePoint(format!("chart Jacobian singular value {smin:e}")));
    }
    let sol = svd.solve(&b, 1e-12).map_err(|e| GeomError::Structural(e.to_string()))?;
    let resid = (&m * &sol - &b).norm();
    if resid > 1e-6 * (1.0 + b.norm()) {
        return Err(GeomError::InvalidInput(format!("vector not tangent to the chart image (residual {resid:e})")));
    }
    Ok(sol.iter().cloned().collect())
}

/// `nabla^1_X Y` for `x` tangent to the chart image at `at`.
pub fn nabla1(x: &TangentRep, f: &VectorFieldAlongMap, at: &[f64], cfg: &ConnectionConfig) -> Result<TangentRep> {
    let du = param_direction(f, at, x, cfg)?;
    nabla_along(1.0, f, at, &du, cfg)
}

pub fn nabla_a(a: f64, x: &TangentRep, f: &VectorFieldAlongMap, at: &[f64], cfg: &ConnectionConfig) -> Result<TangentRep> {
    let du = param_direction(f, at, x, cfg)?;
    nabla_along(a, f, at, &du, cfg)
}

/// Basic field `q' -> H(q', v <q', q>)`, equivariant under the circle action
/// and equal to `v` at `q`.
pub fn basic_field(q: &AmbientVector, v: &AmbientVector) -> impl Fn(&AmbientVector) -> AmbientVector {
    let (q, v) = (*q, *v);
    move |p: &AmbientVector| horizontal(p, &v.scale_c(crate::ambient::herm_inner(p, &q)))
}

/// Independent oracle for `nabla^a` through the Koszul formula on
/// equivariant lifted fields. Lie brackets and directional derivatives are
/// taken by finite differences.
pub fn koszul_nabla(
    a: f64,
    q: &AmbientVector,
    xf: &dyn Fn(&AmbientVector) -> AmbientVector,
    yf: &dyn Fn(&AmbientVector) -> AmbientVector,
    cfg: &ConnectionConfig,
) -> AmbientVector {
    let h = cfg.fd_step;
    let r = cfg.richardson;
    let dir = |f: &dyn Fn(&AmbientVector) -> AmbientVector, x: &AmbientVector| central_diff(|s| f(&curve_point(q, x, s)), h, r);
    let dir_s = |f: &dyn Fn(&AmbientVector) -> f64, x: &AmbientVector| central_diff_scalar(|s| f(&curve_point(q, x, s)), h, r);
    let bracket = |f: &dyn Fn(&AmbientVector) -> AmbientVector, g: &dyn Fn(&AmbientVector) -> AmbientVector| {
        horizontal(q, &(dir(g, &f(q)) - dir(f, &g(q))))
    };
    let g = |x: &AmbientVector, y: &AmbientVector, p: &AmbientVector| metric_vec(a, p, x, y);
    let (x0, y0) = (xf(q), yf(q));
    let mut out = AmbientVector::ZERO;
    for b in metric_basis(a, q) {
        let zf = basic_field(q, &b);
        let t = dir_s(&|p| g(&yf(p), &zf(p), p), &x0) + dir_s(&|p| g(&zf(p), &xf(p), p), &y0)
            - dir_s(&|p| g(&xf(p), &yf(p), p), &b)
            + g(&bracket(xf, yf), &b, q)
            - g(&bracket(yf, &zf), &x0, q)
            + g(&bracket(&zf, xf), &y0, q);
        out += b * (0.5 * t);
    }
    out
}

/// A g_a-orthonormal basis of the horizontal space at `q`: `jq, kq`, then an
/// orthonormalized D2 basis scaled by `1/sqrt(a)`.
pub fn metric_basis(a: f64, q: &AmbientVector) -> Vec<AmbientVector> {
    let mut d2: Vec<AmbientVector> = Vec::with_capacity(4);
    for k in 0..8 {
        if d2.len() == 4 {
            break;
        }
        let mut x = [0.0; 8];
        x[k] = 1.0;
        let mut w = d24(q, &horizontal(q, &AmbientVector::from_reals(x)));
        for b in &d2 {
            w -= *b * real_inner(&w, b);
        }
        let n = w.norm();
        if n > 1e-3 {
            d2.push(w * (1.0 / n));
        }
    }
    let mut out = vec![q.j(), q.k()];
    out.extend(d2.into_iter().map(|w| w * (1.0 / a.sqrt())));
    out
}
