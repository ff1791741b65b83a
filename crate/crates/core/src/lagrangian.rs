//! Lagrangian submanifolds of the nearly Kähler CP^3 (metric g_2) given by
//! charts `R^3 -> S^7`.
//!
//! Charts are written once, generically over dual numbers, so that first and
//! second partial derivatives are exact. Frame fields that are only defined
//! through an eigen-decomposition (the canonical frame) are differentiated by
//! central differences after aligning them to the frame at the centre point.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix3, SymmetricEigen, Vector3};
use num_dual::{DualNum, HyperDual64};
use rand::Rng;

use crate::ambient::{real_inner, AmbientVector, SpherePoint, C64};
use crate::connection::{central_diff, covariant_kernel, g_closed, nabla_point, ConnectionConfig};
use crate::curvature::riemann_closed_vec;
use crate::error::{GeomError, Result};
use crate::frames::phi_vec;
use crate::hopf::{almost_product, d12, d24, horizontal, metric_vec, nk_j, TangentRep};
use crate::isometry::sample_rng;

pub type Params = [f64; 3];

/// Chart values must lie on S^7 to this accuracy.
pub const CHART_NORM_TOL: f64 = 1e-10;
/// Minimum singular value of the horizontal Jacobian.
pub const RANK_TOL: f64 = 1e-6;
/// Sampling rejects points whose horizontal Jacobian is worse conditioned
/// than this, to keep finite differences of frame fields accurate.
pub const SAMPLE_RANK_MARGIN: f64 = 1e-2;
pub const LAGRANGIAN_TOL: f64 = 1e-7;
/// Allowed deviation of the spectrum of `A` from `{1, c, -c}`.
pub const PATTERN_TOL: f64 = 1e-5;
/// Distance of `c = cos 2 theta` from 1 or 0 below which an eigenspace is
/// treated as degenerate.
pub const DEGENERATE_TOL: f64 = 1e-4;

// ---------------------------------------------------------------------------
// Complex numbers over dual numbers

/// A complex number whose parts are (possibly dual) reals.
#[derive(Clone, Copy, Debug)]
pub struct Cx<D> {
    pub re: D,
    pub im: D,
}

impl<D: DualNum<Primitive = f64> + Copy> Cx<D> {
    pub fn new(re: D, im: D) -> Self {
        Cx { re, im }
    }

    pub fn real(re: D) -> Self {
        Cx { re, im: D::zero() }
    }

    pub fn constant(c: C64) -> Self {
        Cx { re: D::from(c.re), im: D::from(c.im) }
    }

    pub fn zero() -> Self {
        Self::constant(C64::new(0.0, 0.0))
    }

    /// `e^{i t}`.
    pub fn cis(t: D) -> Self {
        let (s, c) = t.sin_cos();
        Cx { re: c, im: s }
    }

    pub fn conj(self) -> Self {
        Cx { re: self.re, im: -self.im }
    }

    pub fn mul_i(self) -> Self {
        Cx { re: -self.im, im: self.re }
    }

    pub fn scale(self, s: D) -> Self {
        Cx { re: self.re * s, im: self.im * s }
    }

    pub fn scale_f(self, s: f64) -> Self {
        Cx { re: self.re * s, im: self.im * s }
    }

    pub fn add_f(self, s: f64) -> Self {
        Cx { re: self.re + s, im: self.im }
    }
}

impl<D: DualNum<Primitive = f64> + Copy> Add for Cx<D> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Cx { re: self.re + o.re, im: self.im + o.im }
    }
}

impl<D: DualNum<Primitive = f64> + Copy> Sub for Cx<D> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Cx { re: self.re - o.re, im: self.im - o.im }
    }
}

impl<D: DualNum<Primitive = f64> + Copy> Mul for Cx<D> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Cx { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

impl<D: DualNum<Primitive = f64> + Copy> Neg for Cx<D> {
    type Output = Self;
    fn neg(self) -> Self {
        Cx { re: -self.re, im: -self.im }
    }
}

/// A chart `R^3 -> C^4` written generically over dual numbers.
pub trait AnalyticChart {
    fn map<D: DualNum<Primitive = f64> + Copy>(u: [D; 3]) -> [Cx<D>; 4];
}

/// Value, first and second partial derivatives of a chart at a point.
#[derive(Clone, Copy, Debug)]
pub struct ChartJet {
    pub value: AmbientVector,
    pub d1: [AmbientVector; 3],
    pub d2: [[AmbientVector; 3]; 3],
}

pub fn analytic_value<C: AnalyticChart>(u: &Params) -> AmbientVector {
    let z = C::map(*u);
    AmbientVector(z.map(|c| C64::new(c.re, c.im)))
}

/// Exact 2-jet from six hyper-dual evaluations.
pub fn analytic_jet<C: AnalyticChart>(u: &Params) -> ChartJet {
    let mut jet = ChartJet {
        value: AmbientVector::ZERO,
        d1: [AmbientVector::ZERO; 3],
        d2: [[AmbientVector::ZERO; 3]; 3],
    };
    for a in 0..3 {
        for b in a..3 {
            let args: [HyperDual64; 3] = std::array::from_fn(|k| {
                let e1 = if k == a { 1.0 } else { 0.0 };
                let e2 = if k == b { 1.0 } else { 0.0 };
                HyperDual64::new(u[k], e1, e2, 0.0)
            });
            let z = C::map(args);
            let pick = |f: fn(&HyperDual64) -> f64| AmbientVector(z.map(|c| C64::new(f(&c.re), f(&c.im))));
            jet.value = pick(|x| x.re);
            jet.d1[a] = pick(|x| x.eps1);
            jet.d1[b] = pick(|x| x.eps2);
            jet.d2[a][b] = pick(|x| x.eps1eps2);
            jet.d2[b][a] = jet.d2[a][b];
        }
    }
    jet
}

/// 2-jet of an arbitrary chart by central differences.
pub fn numeric_jet(f: &dyn Fn(&Params) -> AmbientVector, u: &Params) -> ChartJet {
    let shift = |d: &[(usize, f64)]| {
        let mut v = *u;
        for &(k, s) in d {
            v[k] += s;
        }
        f(&v)
    };
    let h1 = 1e-3;
    let h2 = 1e-4;
    let value = f(u);
    let d1 = std::array::from_fn(|k| {
        (shift(&[(k, -2.0 * h1)]) - shift(&[(k, 2.0 * h1)]) + (shift(&[(k, h1)]) - shift(&[(k, -h1)])) * 8.0)
            * (1.0 / (12.0 * h1))
    });
    let d2 = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            if a == b {
                (shift(&[(a, h2)]) + shift(&[(a, -h2)]) - value * 2.0) * (1.0 / (h2 * h2))
            } else {
                (shift(&[(a, h2), (b, h2)]) - shift(&[(a, h2), (b, -h2)]) - shift(&[(a, -h2), (b, h2)])
                    + shift(&[(a, -h2), (b, -h2)]))
                    * (1.0 / (4.0 * h2 * h2))
            }
        })
    });
    ChartJet { value, d1, d2 }
}

// ---------------------------------------------------------------------------
// Immersions

type ValueFn = Arc<dyn Fn(&Params) -> AmbientVector + Send + Sync>;
type JetFn = Arc<dyn Fn(&Params) -> ChartJet + Send + Sync>;

/// A chart of a candidate Lagrangian, with a parameter box for sampling.
#[derive(Clone)]
pub struct Immersion {
    pub name: String,
    /// Sampling box, one interval per parameter.
    pub domain: [(f64, f64); 3],
    pub rank_tol: f64,
    /// True when the 2-jet is exact.
    pub analytic: bool,
    value: ValueFn,
    jet: JetFn,
}

impl fmt::Debug for Immersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Immersion")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("analytic", &self.analytic)
            .finish()
    }
}

impl Immersion {
    pub fn analytic<C: AnalyticChart + 'static>(name: &str, domain: [(f64, f64); 3]) -> Self {
        Immersion {
            name: name.to_string(),
            domain,
            rank_tol: RANK_TOL,
            analytic: true,
            value: Arc::new(analytic_value::<C>),
            jet: Arc::new(analytic_jet::<C>),
        }
    }

    /// An immersion differentiated numerically.
    pub fn from_fn<F>(name: &str, domain: [(f64, f64); 3], f: F) -> Self
    where
        F: Fn(&Params) -> AmbientVector + Send + Sync + 'static,
    {
        let f: ValueFn = Arc::new(f);
        let g = f.clone();
        Immersion {
            name: name.to_string(),
            domain,
            rank_tol: RANK_TOL,
            analytic: false,
            value: f,
            jet: Arc::new(move |u| numeric_jet(&*g, u)),
        }
    }

    pub fn chart(&self, u: &Params) -> AmbientVector {
        (self.value)(u)
    }

    pub fn jet(&self, u: &Params) -> ChartJet {
        (self.jet)(u)
    }

    pub fn point(&self, u: &Params) -> Result<SpherePoint> {
        let v = self.chart(u);
        if (v.norm() - 1.0).abs() > CHART_NORM_TOL {
            return Err(GeomError::InvalidInput(format!(
                "{} chart leaves the sphere: |F| - 1 = {:e}",
                self.name,
                v.norm() - 1.0
            )));
        }
        SpherePoint::from_unnormalized(v)
    }

    fn uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Params {
        std::array::from_fn(|k| {
            let (lo, hi) = self.domain[k];
            lo + (hi - lo) * rng.random::<f64>()
        })
    }

    /// `n` samples from the box, each drawn from its own stream and
    /// rejected until the horizontal Jacobian is well conditioned.
    pub fn admissible_samples(&self, seed: u64, n: usize) -> Result<Vec<Params>> {
        (0..n as u64)
            .map(|i| {
                let mut rng = sample_rng(seed, i);
                for _ in 0..200 {
                    let u = self.uniform(&mut rng);
                    if let Ok(s) = min_singular_value(self, &u) {
                        if s > SAMPLE_RANK_MARGIN {
                            return Ok(u);
                        }
                    }
                }
                Err(GeomError::DegeneratePoint(format!("{}: no admissible sample found", self.name)))
            })
            .collect()
    }
}

/// Chart data at one parameter value.
#[derive(Clone, Copy, Debug)]
struct Local {
    jet: ChartJet,
    q: AmbientVector,
    /// Horizontal coordinate fields `H(d_b F)`.
    t: [AmbientVector; 3],
}

fn raw_local(imm: &Immersion, u: &Params) -> Result<Local> {
    let jet = imm.jet(u);
    let q = jet.value;
    if !q.is_finite() || (q.norm() - 1.0).abs() > CHART_NORM_TOL {
        return Err(GeomError::InvalidInput(format!(
            "{} chart leaves the sphere at {:?} (|F| = {})",
            imm.name,
            u,
            q.norm()
        )));
    }
    let t = jet.d1.map(|d| horizontal(&q, &d));
    Ok(Local { jet, q, t })
}

fn singular_values(t: &[AmbientVector; 3]) -> Vec<f64> {
    let m = DMatrix::from_fn(8, 3, |r, k| t[k].to_reals()[r]);
    m.singular_values().iter().cloned().collect()
}

/// Smallest singular value of the horizontal Jacobian.
pub fn min_singular_value(imm: &Immersion, u: &Params) -> Result<f64> {
    let l = raw_local(imm, u)?;
    Ok(singular_values(&l.t).into_iter().fold(f64::INFINITY, f64::min))
}

fn local(imm: &Immersion, u: &Params) -> Result<Local> {
    let l = raw_local(imm, u)?;
    let smin = singular_values(&l.t).into_iter().fold(f64::INFINITY, f64::min);
    if !(smin > imm.rank_tol) {
        return Err(GeomError::DegeneratePoint(format!(
            "{} at {:?}: horizontal Jacobian singular value {:e}",
            imm.name, u, smin
        )));
    }
    Ok(l)
}

/// Gram–Schmidt for `g_a`, always taking the remaining vector of largest norm.
fn gram_schmidt(a: f64, q: &AmbientVector, vs: &[AmbientVector; 3]) -> [AmbientVector; 3] {
    let mut rest: Vec<AmbientVector> = vs.to_vec();
    let mut out: Vec<AmbientVector> = Vec::with_capacity(3);
    while !rest.is_empty() {
        let norms: Vec<f64> = rest.iter().map(|v| metric_vec(a, q, v, v)).collect();
        let k = (0..rest.len()).fold(0, |b, i| if norms[i] > norms[b] { i } else { b });
        let v = rest.remove(k);
        let v = v * (1.0 / metric_vec(a, q, &v, &v).sqrt());
        for r in rest.iter_mut() {
            *r -= v * metric_vec(a, q, r, &v);
        }
        out.push(v);
    }
    [out[0], out[1], out[2]]
}

fn tangent_reps(q: &AmbientVector, e: &[AmbientVector; 3]) -> Result<[TangentRep; 3]> {
    let base = SpherePoint::from_unnormalized(*q)?;
    Ok(e.map(|v| TangentRep::new_unchecked(base, v)))
}

/// Horizontal lifts of the chart's partial derivatives, `g_2`-orthonormalized.
pub fn tangent_frame(imm: &Immersion, u: &Params) -> Result<[TangentRep; 3]> {
    let l = local(imm, u)?;
    tangent_reps(&l.q, &gram_schmidt(2.0, &l.q, &l.t))
}

fn lagrangian_residual_at(q: &AmbientVector, e: &[AmbientVector; 3]) -> f64 {
    let mut r: f64 = 0.0;
    for x in e {
        for y in e {
            r = r.max(metric_vec(2.0, q, x, &nk_j(q, y)).abs());
        }
    }
    r
}

/// `max |g_2(X_i, J X_j)|` over an orthonormal tangent frame.
pub fn is_lagrangian(imm: &Immersion, u: &Params, tol: f64) -> Result<(bool, f64)> {
    let l = local(imm, u)?;
    let r = lagrangian_residual_at(&l.q, &gram_schmidt(2.0, &l.q, &l.t));
    Ok((r < tol, r))
}

/// `A_ij = g(P e_j, e_i)` and `B_ij = g(P e_j, J e_i)`.
fn ab_matrices(q: &AmbientVector, e: &[AmbientVector; 3]) -> (Matrix3<f64>, Matrix3<f64>) {
    let pe = e.map(|v| almost_product(q, &v));
    let je = e.map(|v| nk_j(q, &v));
    let a = Matrix3::from_fn(|i, j| metric_vec(2.0, q, &pe[j], &e[i]));
    let b = Matrix3::from_fn(|i, j| metric_vec(2.0, q, &pe[j], &je[i]));
    (a, b)
}

/// `A` and `B` in a tangent frame.
#[derive(Clone, Debug)]
pub struct AbTensors {
    pub frame: [TangentRep; 3],
    pub a: Matrix3<f64>,
    pub b: Matrix3<f64>,
}

impl AbTensors {
    /// Residuals of: A symmetric, B skew, AB + BA = 0, A^2 - B^2 = id.
    pub fn residuals(&self) -> [f64; 4] {
        let (a, b) = (&self.a, &self.b);
        [
            (a - a.transpose()).amax(),
            (b + b.transpose()).amax(),
            (a * b + b * a).amax(),
            (a * a - b * b - Matrix3::identity()).amax(),
        ]
    }
}

pub fn ab_tensors(imm: &Immersion, u: &Params) -> Result<AbTensors> {
    let l = local(imm, u)?;
    let e = gram_schmidt(2.0, &l.q, &l.t);
    let (a, b) = ab_matrices(&l.q, &e);
    Ok(AbTensors { frame: tangent_reps(&l.q, &e)?, a, b })
}

/// Eigen-decomposition of `A` matched to the pattern `{1, c, -c}`.
#[derive(Clone, Copy, Debug)]
struct Spectrum {
    vectors: Matrix3<f64>,
    /// Indices of the eigenvalues 1, c and -c.
    idx: [usize; 3],
    c: f64,
}

fn spectrum(a: &Matrix3<f64>) -> Result<Spectrum> {
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let w = eig.eigenvalues;
    let i1 = (0..3).fold(0, |b, i| if (w[i] - 1.0).abs() < (w[b] - 1.0).abs() { i } else { b });
    let rest: Vec<usize> = (0..3).filter(|&i| i != i1).collect();
    let (i2, i3) = if w[rest[0]] >= w[rest[1]] { (rest[0], rest[1]) } else { (rest[1], rest[0]) };
    let residual = (w[i1] - 1.0).abs().max((w[i2] + w[i3]).abs());
    if !(residual <= PATTERN_TOL) {
        return Err(GeomError::Structural(format!(
            "spectrum of A is ({:.6}, {:.6}, {:.6}), not of the form {{1, c, -c}} (residual {residual:e})",
            w[i1], w[i2], w[i3]
        )));
    }
    let c = ((w[i2].abs() + w[i3].abs()) / 2.0).clamp(0.0, 1.0);
    Ok(Spectrum { vectors: eig.eigenvectors, idx: [i1, i2, i3], c })
}

fn theta_from(c: f64) -> f64 {
    0.5 * c.clamp(0.0, 1.0).acos()
}

/// The angle `theta` in `[0, pi/4]` with spectrum of `A` equal to
/// `{1, cos 2 theta, -cos 2 theta}`.
pub fn angle(imm: &Immersion, u: &Params) -> Result<f64> {
    let ab = ab_tensors(imm, u)?;
    Ok(theta_from(spectrum(&ab.a)?.c))
}

// ---------------------------------------------------------------------------
// Canonical frame

/// How the eigenvalue degeneracy of `A` was resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleRegime {
    /// Simple spectrum.
    Generic,
    /// `theta = 0`: the eigenvalue 1 is double.
    Zero,
    /// `theta = pi/4`: the eigenvalue 0 is double.
    QuarterPi,
}

/// Choices made at the centre point and reused at nearby points so that the
/// frame depends smoothly on the parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FramePivots {
    pub regime: AngleRegime,
    /// Coordinate field projected onto the degenerate eigenspace.
    pub eigen_pivot: usize,
    /// Coordinate field fixing the remaining free sign.
    pub sign_pivot: usize,
}

#[derive(Clone, Debug)]
pub struct LagrangianFrameData {
    pub u: Params,
    pub theta: f64,
    pub regime: AngleRegime,
    /// Canonical frame `(e1, e2, e3)`, orthonormal for `g_2`.
    pub e: [TangentRep; 3],
    /// `A` and `B` in the canonical frame.
    pub a: Matrix3<f64>,
    pub b: Matrix3<f64>,
    pub u_dir: TangentRep,
    pub w_dir: TangentRep,
    pub pivots: FramePivots,
}

impl LagrangianFrameData {
    pub fn q(&self) -> AmbientVector {
        *self.e[0].base.vec()
    }

    pub fn vecs(&self) -> [AmbientVector; 3] {
        self.e.map(|t| t.vec)
    }

    /// `max |g_2(G(e_i, e_j), J e_k) - eps_ijk|`.
    pub fn g_residual(&self) -> f64 {
        let q = self.q();
        let e = self.vecs();
        let mut r: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let g = g_closed(&q, &e[i], &e[j]);
                for k in 0..3 {
                    let target = levi_civita(i, j, k);
                    r = r.max((metric_vec(2.0, &q, &g, &nk_j(&q, &e[k])) - target).abs());
                }
            }
        }
        r
    }

    /// `|e1 - P e1|`: how far `e1` is from D2.
    pub fn e1_d24_residual(&self) -> f64 {
        let q = self.q();
        (d12(&q, &self.e[0].vec)).norm()
    }

    /// Residuals of `e2 = cos(theta) W + sin(theta) U` and `W = -Phi_U e1`.
    pub fn uw_residuals(&self) -> (f64, f64) {
        let q = self.q();
        let (s, c) = self.theta.sin_cos();
        let u = self.u_dir.vec;
        let w = self.w_dir.vec;
        let r1 = (self.e[1].vec - (w * c + u * s)).norm();
        let coef = (real_inner(&u, &q.j()), real_inner(&u, &q.k()));
        let r2 = (w + phi_vec(&q, coef, &self.e[0].vec)).norm();
        (r1, r2)
    }

    /// Residuals of the spectral normal form: `A` symmetric, `B` skew,
    /// `AB + BA = 0`, `A^2 - B^2 = id`, and `A = diag(1, c, -c)`.
    pub fn normal_form_residuals(&self) -> [f64; 5] {
        let ab = AbTensors { frame: self.e, a: self.a, b: self.b };
        let r = ab.residuals();
        let c = (2.0 * self.theta).cos();
        let diag = Matrix3::from_diagonal(&Vector3::new(1.0, c, -c));
        [r[0], r[1], r[2], r[3], (self.a - diag).amax()]
    }
}

pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn normalize2(q: &AmbientVector, v: AmbientVector) -> AmbientVector {
    v * (1.0 / metric_vec(2.0, q, &v, &v).sqrt())
}

/// `g_2`-orthogonal projection onto the span of orthonormal `basis`.
fn project(q: &AmbientVector, basis: &[AmbientVector], v: &AmbientVector) -> AmbientVector {
    basis.iter().fold(AmbientVector::ZERO, |acc, b| acc + *b * metric_vec(2.0, q, v, b))
}

fn argmax_abs(vals: &[f64]) -> usize {
    (0..vals.len()).fold(0, |b, i| if vals[i].abs() > vals[b].abs() { i } else { b })
}

/// `B X` for tangent `X`: minus `J` of the normal part of `P X`.
fn b_apply(q: &AmbientVector, e: &[AmbientVector; 3], x: &AmbientVector) -> AmbientVector {
    let px = almost_product(q, x);
    -nk_j(q, &(px - project(q, e, &px)))
}

fn canonical_at(
    imm: &Immersion,
    u: &Params,
    pivots: Option<FramePivots>,
    reference: Option<&[AmbientVector; 3]>,
) -> Result<(Local, [AmbientVector; 3], f64, FramePivots)> {
    let l = local(imm, u)?;
    let q = l.q;
    let f = gram_schmidt(2.0, &q, &l.t);
    let lag = lagrangian_residual_at(&q, &f);
    if lag > 1e3 * LAGRANGIAN_TOL {
        return Err(GeomError::Structural(format!("{} is not Lagrangian at {:?} (residual {lag:e})", imm.name, u)));
    }
    let (am, _) = ab_matrices(&q, &f);
    let sp = spectrum(&am)?;
    let ev = |k: usize| -> AmbientVector {
        let col = sp.vectors.column(k);
        f[0] * col[0] + f[1] * col[1] + f[2] * col[2]
    };
    let regime = match pivots {
        Some(p) => p.regime,
        None if (sp.c - 1.0).abs() < DEGENERATE_TOL => AngleRegime::Zero,
        None if sp.c < DEGENERATE_TOL => AngleRegime::QuarterPi,
        None => AngleRegime::Generic,
    };
    let pick_pivot = |space: &[AmbientVector]| -> usize {
        let n: Vec<f64> = l
            .t
            .iter()
            .map(|t| {
                let p = project(&q, space, t);
                metric_vec(2.0, &q, &p, &p)
            })
            .collect();
        argmax_abs(&n)
    };
    let sign_by = |v: AmbientVector, k: usize| if metric_vec(2.0, &q, &v, &l.t[k]) < 0.0 { -v } else { v };
    let [i1, i2, i3] = sp.idx;
    let (mut e, eigen_pivot, sign_pivot) = match regime {
        AngleRegime::Generic => {
            let e2 = ev(i2);
            let sp_k = pivots.map(|p| p.sign_pivot).unwrap_or_else(|| {
                argmax_abs(&l.t.map(|t| metric_vec(2.0, &q, &e2, &t)))
            });
            let e2 = sign_by(e2, sp_k);
            let mut e3 = ev(i3);
            if metric_vec(2.0, &q, &b_apply(&q, &f, &e2), &e3) > 0.0 {
                e3 = -e3;
            }
            ([ev(i1), e2, e3], 0, sp_k)
        }
        AngleRegime::Zero => {
            let space = [ev(i1), ev(i2)];
            let k = pivots.map(|p| p.eigen_pivot).unwrap_or_else(|| pick_pivot(&space));
            let e1 = normalize2(&q, project(&q, &space, &l.t[k]));
            let other = if metric_vec(2.0, &q, &space[0], &e1).abs() < metric_vec(2.0, &q, &space[1], &e1).abs() {
                space[0]
            } else {
                space[1]
            };
            let e2 = normalize2(&q, other - e1 * metric_vec(2.0, &q, &other, &e1));
            let e3 = ev(i3);
            let sp_k = pivots.map(|p| p.sign_pivot).unwrap_or_else(|| {
                argmax_abs(&l.t.map(|t| metric_vec(2.0, &q, &e3, &t)))
            });
            ([e1, e2, sign_by(e3, sp_k)], k, sp_k)
        }
        AngleRegime::QuarterPi => {
            let space = [ev(i2), ev(i3)];
            let k = pivots.map(|p| p.eigen_pivot).unwrap_or_else(|| pick_pivot(&space));
            let e2 = normalize2(&q, project(&q, &space, &l.t[k]));
            let e3 = normalize2(&q, -b_apply(&q, &f, &e2));
            ([ev(i1), e2, e3], k, k)
        }
    };
    // Orientation from G(e2, e3) = J e1; the free index depends on which
    // vectors were already pinned.
    let gsign = metric_vec(2.0, &q, &g_closed(&q, &e[1], &e[2]), &nk_j(&q, &e[0]));
    if gsign < 0.0 {
        match regime {
            AngleRegime::Zero => e[1] = -e[1],
            _ => e[0] = -e[0],
        }
    }
    if let Some(r) = reference {
        for i in 0..3 {
            if real_inner(&e[i], &r[i]) < 0.0 {
                e[i] = -e[i];
            }
        }
    }
    let piv = FramePivots { regime, eigen_pivot, sign_pivot };
    Ok((l, e, theta_from(sp.c), piv))
}

/// The frame of the normal form: `A e1 = e1`, `A e2 = cos(2 theta) e2`,
/// `A e3 = -cos(2 theta) e3`, `G(e_i, e_j) = eps_ijk J e_k`.
pub fn canonical_frame(imm: &Immersion, u: &Params) -> Result<LagrangianFrameData> {
    let (l, e, theta, pivots) = canonical_at(imm, u, None, None)?;
    frame_data(u, &l.q, e, theta, pivots)
}

fn frame_data(u: &Params, q: &AmbientVector, e: [AmbientVector; 3], theta: f64, pivots: FramePivots) -> Result<LagrangianFrameData> {
    let (a, b) = ab_matrices(q, &e);
    let (s, c) = theta.sin_cos();
    let je3 = nk_j(q, &e[2]);
    let u_dir = je3 * c + e[1] * s;
    let w_dir = je3 * (-s) + e[1] * c;
    let reps = tangent_reps(q, &e)?;
    let base = reps[0].base;
    Ok(LagrangianFrameData {
        u: *u,
        theta,
        regime: pivots.regime,
        e: reps,
        a,
        b,
        u_dir: TangentRep::new_unchecked(base, u_dir),
        w_dir: TangentRep::new_unchecked(base, w_dir),
        pivots,
    })
}

// ---------------------------------------------------------------------------
// Second fundamental form

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricChoice {
    /// Nearly Kähler metric g_2 with its Levi-Civita connection.
    NearlyKahler,
    /// Fubini–Study metric g_1.
    FubiniStudy,
}

impl MetricChoice {
    pub fn a(self) -> f64 {
        match self {
            MetricChoice::NearlyKahler => 2.0,
            MetricChoice::FubiniStudy => 1.0,
        }
    }
}

/// Coordinates of tangent `v` on the coordinate fields.
fn coords(a: f64, q: &AmbientVector, t: &[AmbientVector; 3], v: &AmbientVector) -> Vector3<f64> {
    let gram = Matrix3::from_fn(|x, y| metric_vec(a, q, &t[x], &t[y]));
    let rhs = Vector3::from_fn(|b, _| metric_vec(a, q, v, &t[b]));
    gram.lu().solve(&rhs).unwrap_or_else(Vector3::zeros)
}

/// `nabla^a_{T_x} T_y` for the coordinate fields, exact from the 2-jet.
fn coordinate_nabla(a: f64, l: &Local) -> [[AmbientVector; 3]; 3] {
    let q = &l.q;
    std::array::from_fn(|x| {
        std::array::from_fn(|y| {
            let lam = real_inner(&l.jet.d1[y], &q.i());
            let dy = l.jet.d2[x][y] - l.jet.d1[x].i() * lam;
            covariant_kernel(a, q, &l.jet.d1[x], &l.t[y], &dy)
        })
    })
}

#[derive(Clone, Debug)]
pub struct SecondFundamentalData {
    pub metric_choice: MetricChoice,
    /// Orthonormal frame used for the components.
    pub frame: [TangentRep; 3],
    /// `h[k][i][j] = g(h(e_i, e_j), J e_k)`.
    pub h: [[[f64; 3]; 3]; 3],
    /// `omega[k][i][j] = g(nabla_{e_i} e_j, e_k)`; only for the canonical frame.
    pub omega: Option<[[[f64; 3]; 3]; 3]>,
    /// `h(e_i, e_j)` as lifted normal vectors.
    pub h_vec: [[AmbientVector; 3]; 3],
    /// Mean curvature vector `sum_i h(e_i, e_i)`.
    pub mean: TangentRep,
}

impl SecondFundamentalData {
    pub fn mean_norm(&self) -> f64 {
        let q = *self.mean.base.vec();
        metric_vec(self.metric_choice.a(), &q, &self.mean.vec, &self.mean.vec).sqrt()
    }

    /// Largest deviation of `h^k_ij` from total symmetry in `(i, j, k)`.
    pub fn cubic_symmetry_residual(&self) -> f64 {
        let h = &self.h;
        let mut r: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    r = r.max((h[k][i][j] - h[k][j][i]).abs());
                    r = r.max((h[k][i][j] - h[i][k][j]).abs());
                    r = r.max((h[k][i][j] - h[j][i][k]).abs());
                }
            }
        }
        r
    }

    pub fn norm_sq(&self) -> f64 {
        self.h.iter().flatten().flatten().map(|x| x * x).sum()
    }
}

fn sff_from_frame(a: f64, l: &Local, e: &[AmbientVector; 3]) -> [[AmbientVector; 3]; 3] {
    let q = &l.q;
    let nab = coordinate_nabla(a, l);
    let cf = e.map(|v| coords(a, q, &l.t, &v));
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut v = AmbientVector::ZERO;
            for x in 0..3 {
                for y in 0..3 {
                    v += nab[x][y] * (cf[i][x] * cf[j][y]);
                }
            }
            e.iter().fold(v, |acc, f| acc - *f * metric_vec(a, q, &v, f))
        })
    })
}

fn components(a: f64, q: &AmbientVector, e: &[AmbientVector; 3], hv: &[[AmbientVector; 3]; 3]) -> [[[f64; 3]; 3]; 3] {
    let je = e.map(|v| nk_j(q, &v));
    std::array::from_fn(|k| std::array::from_fn(|i| std::array::from_fn(|j| metric_vec(a, q, &hv[i][j], &je[k]))))
}

/// Canonical frame at parameters shifted by `s * du`, aligned to `center`.
fn shifted_frame(imm: &Immersion, u: &Params, du: &Vector3<f64>, s: f64, center: &LagrangianFrameData) -> Result<[AmbientVector; 3]> {
    let v: Params = std::array::from_fn(|k| u[k] + s * du[k]);
    let r = center.vecs();
    Ok(canonical_at(imm, &v, Some(center.pivots), Some(&r))?.1)
}

/// `omega[k][i][j]` and the full `nabla_{e_i} e_j` of the canonical frame.
fn frame_derivatives(
    imm: &Immersion,
    l: &Local,
    fd: &LagrangianFrameData,
    cfg: &ConnectionConfig,
) -> Result<[[AmbientVector; 3]; 3]> {
    let q = &l.q;
    let e = fd.vecs();
    let mut out = [[AmbientVector::ZERO; 3]; 3];
    for i in 0..3 {
        let du = coords(2.0, q, &l.t, &e[i]);
        let dc = (0..3).fold(AmbientVector::ZERO, |acc, b| acc + l.jet.d1[b] * du[b]);
        let mut frames: Vec<(f64, [AmbientVector; 3])> = Vec::new();
        let hs = if cfg.richardson { vec![cfg.fd_step, cfg.fd_step / 2.0] } else { vec![cfg.fd_step] };
        for h in &hs {
            for s in [*h, -*h] {
                frames.push((s, shifted_frame(imm, &fd.u, &du, s, fd)?));
            }
        }
        for j in 0..3 {
            let get = |s: f64| frames.iter().find(|(x, _)| *x == s).map(|(_, f)| f[j]).unwrap_or(AmbientVector::ZERO);
            let dy = central_diff(get, cfg.fd_step, cfg.richardson);
            out[i][j] = covariant_kernel(2.0, q, &dc, &e[j], &dy);
        }
    }
    Ok(out)
}

/// Second fundamental form. For `g_2` the canonical frame is used and the
/// connection forms are included; for `g_1` a Gram–Schmidt frame is used.
pub fn second_fundamental_form(
    imm: &Immersion,
    u: &Params,
    metric_choice: MetricChoice,
    cfg: &ConnectionConfig,
) -> Result<SecondFundamentalData> {
    cfg.validate()?;
    match metric_choice {
        MetricChoice::NearlyKahler => Ok(analyze(imm, u, cfg)?.sff),
        MetricChoice::FubiniStudy => {
            let l = local(imm, u)?;
            let e = gram_schmidt(1.0, &l.q, &l.t);
            let hv = sff_from_frame(1.0, &l, &e);
            let reps = tangent_reps(&l.q, &e)?;
            let mean = hv[0][0] + hv[1][1] + hv[2][2];
            Ok(SecondFundamentalData {
                metric_choice,
                frame: reps,
                h: components(1.0, &l.q, &e, &hv),
                omega: None,
                h_vec: hv,
                mean: reps[0].with_vec(mean),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Full local analysis

/// Everything computed at one admissible sample, in the canonical frame.
#[derive(Clone, Debug)]
pub struct LagrangianAnalysis {
    pub frame: LagrangianFrameData,
    pub sff: SecondFundamentalData,
    /// `g(R^L(e_i, e_j) e_k, e_l)` from the Gauss equation.
    pub riemann: [[[[f64; 3]; 3]; 3]; 3],
    /// `(nabla^perp G)(e_i, e_j, e_l)`.
    pub nabla_perp_g: [[[AmbientVector; 3]; 3]; 3],
    /// Normal part of `nabla_{e_i} e_j` computed from the frame derivatives;
    /// agrees with `h` when the frame fields are differentiated correctly.
    pub h_from_frame: [[AmbientVector; 3]; 3],
}

/// `(nabla^2_X G)(Y, Z)` at `q` for horizontal `x, y, z`, with `Y, Z`
/// extended by horizontal projection.
pub fn nabla_g_numeric(q: &AmbientVector, x: &AmbientVector, y: &AmbientVector, z: &AmbientVector, cfg: &ConnectionConfig) -> AmbientVector {
    let gyz = nabla_point(2.0, q, x, |p| g_closed(p, &horizontal(p, y), &horizontal(p, z)), cfg);
    let ny = nabla_point(2.0, q, x, |p| horizontal(p, y), cfg);
    let nz = nabla_point(2.0, q, x, |p| horizontal(p, z), cfg);
    gyz - g_closed(q, &ny, z) - g_closed(q, y, &nz)
}

pub fn analyze(imm: &Immersion, u: &Params, cfg: &ConnectionConfig) -> Result<LagrangianAnalysis> {
    cfg.validate()?;
    let (l, e, theta, pivots) = canonical_at(imm, u, None, None)?;
    let q = l.q;
    let frame = frame_data(u, &q, e, theta, pivots)?;
    let hv = sff_from_frame(2.0, &l, &e);
    let h = components(2.0, &q, &e, &hv);
    let nab = frame_derivatives(imm, &l, &frame, cfg)?;
    let omega = std::array::from_fn(|k| {
        std::array::from_fn(|i| std::array::from_fn(|j| metric_vec(2.0, &q, &nab[i][j], &e[k])))
    });
    let h_from_frame = nab.map(|row| row.map(|v| v - project(&q, &e, &v)));
    let mean = hv[0][0] + hv[1][1] + hv[2][2];
    let sff = SecondFundamentalData {
        metric_choice: MetricChoice::NearlyKahler,
        frame: frame.e,
        h,
        omega: Some(omega),
        h_vec: hv,
        mean: frame.e[0].with_vec(mean),
    };
    let riemann = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                let r = riemann_closed_vec(2.0, &q, &e[i], &e[j], &e[k]);
                std::array::from_fn(|m| {
                    metric_vec(2.0, &q, &r, &e[m]) + metric_vec(2.0, &q, &hv[j][k], &hv[i][m])
                        - metric_vec(2.0, &q, &hv[i][k], &hv[j][m])
                })
            })
        })
    });
    let nabla_perp_g = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            std::array::from_fn(|m| {
                let v = nabla_g_numeric(&q, &e[i], &e[j], &e[m], cfg)
                    + g_closed(&q, &hv[i][j], &e[m])
                    + g_closed(&q, &e[j], &hv[i][m]);
                v - project(&q, &e, &v)
            })
        })
    });
    Ok(LagrangianAnalysis { frame, sff, riemann, nabla_perp_g, h_from_frame })
}

// ---------------------------------------------------------------------------
// Intrinsic curvature

#[derive(Clone, Debug)]
pub struct InducedCurvature {
    /// `sec(e1, e2)`, `sec(e1, e3)`, `sec(e2, e3)`.
    pub sectional: [f64; 3],
    pub ricci: Matrix3<f64>,
    pub scalar: f64,
}

impl LagrangianAnalysis {
    pub fn q(&self) -> AmbientVector {
        self.frame.q()
    }

    pub fn curvature(&self) -> InducedCurvature {
        let r = &self.riemann;
        let sec = |i: usize, j: usize| r[i][j][j][i];
        let ricci = Matrix3::from_fn(|i, k| (0..3).map(|j| r[j][i][k][j]).sum());
        InducedCurvature { sectional: [sec(0, 1), sec(0, 2), sec(1, 2)], scalar: ricci.trace(), ricci }
    }

    /// Sectional curvature of the plane spanned by tangent vectors with frame
    /// coordinates `x` and `y`.
    pub fn sectional_of(&self, x: &Vector3<f64>, y: &Vector3<f64>) -> f64 {
        let mut num = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for m in 0..3 {
                        num += self.riemann[i][j][k][m] * x[i] * y[j] * y[k] * x[m];
                    }
                }
            }
        }
        let area = x.norm_squared() * y.norm_squared() - x.dot(y).powi(2);
        num / area
    }

    /// Max minus min of the sectional curvature over `n` random planes.
    pub fn sectional_spread(&self, seed: u64, n: usize) -> f64 {
        let secs: Vec<f64> = random_planes(seed, n).iter().map(|(x, y)| self.sectional_of(x, y)).collect();
        let max = secs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = secs.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Residual of `sec(X, Y) = 1/2 sum_{i != j} sec(e_i, e_j) g(G(e_i, e_j), G(X, Y))^2`
    /// over `n` random orthonormal pairs.
    pub fn reconstruction_residual(&self, seed: u64, n: usize) -> f64 {
        let q = self.q();
        let e = self.frame.vecs();
        let to_vec = |c: &Vector3<f64>| e[0] * c[0] + e[1] * c[1] + e[2] * c[2];
        let r = &self.riemann;
        random_planes(seed, n)
            .iter()
            .map(|(x, y)| {
                let gxy = g_closed(&q, &to_vec(x), &to_vec(y));
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        if i != j {
                            let gij = g_closed(&q, &e[i], &e[j]);
                            s += r[i][j][j][i] * metric_vec(2.0, &q, &gij, &gxy).powi(2);
                        }
                    }
                }
                (self.sectional_of(x, y) - 0.5 * s).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Shape operator coefficients: `g(A_{J e_l} e_i, e_k) = h^l_{ik}`.
    fn shape(&self, l: usize) -> Matrix3<f64> {
        Matrix3::from_fn(|i, k| self.sff.h[l][i][k])
    }

    /// Residual of the normal-curvature identity
    /// `R^perp(X, Y) J Z = (nabla^perp G)(X, Y, Z) - (nabla^perp G)(Y, X, Z) + J R^L(X, Y) Z`
    /// on the canonical frame. The left side comes from the Ricci equation.
    pub fn normal_curvature_residual(&self) -> f64 {
        let q = self.q();
        let e = self.frame.vecs();
        let je = e.map(|v| nk_j(&q, &v));
        let mut r: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    let ambient = riemann_closed_vec(2.0, &q, &e[i], &e[j], &je[l]);
                    let al = self.shape(l);
                    for m in 0..3 {
                        let am = self.shape(m);
                        // g([A_xi, A_eta] X, Y) with xi = J e_l, eta = J e_m.
                        // A_xi A_eta e_i has coefficients (S_eta S_xi)_{ij}.
                        let comm = (am * al - al * am)[(i, j)];
                        let lhs = metric_vec(2.0, &q, &ambient, &je[m]) + comm;
                        let npg = self.nabla_perp_g[i][j][l] - self.nabla_perp_g[j][i][l];
                        let rhs = metric_vec(2.0, &q, &npg, &je[m]) + self.riemann[i][j][l][m];
                        r = r.max((lhs - rhs).abs());
                    }
                }
            }
        }
        r
    }

    /// `(nabla^perp G)(e_w, e_x, Z)` for tangent `Z` with frame coordinates `z`.
    fn npg_at(&self, w: usize, x: usize, z: &[f64; 3]) -> AmbientVector {
        (0..3).fold(AmbientVector::ZERO, |acc, m| acc + self.nabla_perp_g[w][x][m] * z[m])
    }

    /// Coordinates of `h_hat(e_y, e_z) = -J h(e_y, e_z)`.
    fn h_hat(&self, y: usize, z: usize) -> [f64; 3] {
        std::array::from_fn(|m| self.sff.h[m][y][z])
    }

    /// Max over frame quadruples of the cyclic sum over `(W, X, Y)` of
    /// `(nabla^perp G)(W, X, h_hat(Y, Z)) - (nabla^perp G)(X, W, h_hat(Y, Z))`.
    pub fn cyclic_nabla_g_residual(&self) -> f64 {
        let q = self.q();
        let mut r: f64 = 0.0;
        for w in 0..3 {
            for x in 0..3 {
                for y in 0..3 {
                    for z in 0..3 {
                        let mut s = AmbientVector::ZERO;
                        for (a, b, c) in [(w, x, y), (x, y, w), (y, w, x)] {
                            let hh = self.h_hat(c, z);
                            s += self.npg_at(a, b, &hh) - self.npg_at(b, a, &hh);
                        }
                        r = r.max(metric_vec(2.0, &q, &s, &s).sqrt());
                    }
                }
            }
        }
        r
    }

    /// `h(e_u, V)` for tangent `V` with frame coordinates `v`.
    fn h_with(&self, u: usize, v: &[f64; 3]) -> AmbientVector {
        (0..3).fold(AmbientVector::ZERO, |acc, m| acc + self.sff.h_vec[u][m] * v[m])
    }

    /// Max over frame tuples of
    /// `sum_cyc(U,X,Y) g(R(X,Y) h(U,Z) - h(U, (R(X,Y)Z)^T), J W)` with the
    /// ambient curvature `R` of g_2. It vanishes for Lagrangians of constant
    /// sectional curvature.
    pub fn constant_curvature_identity_residual(&self) -> f64 {
        let q = self.q();
        let e = self.frame.vecs();
        let je = e.map(|v| nk_j(&q, &v));
        let mut r: f64 = 0.0;
        for u in 0..3 {
            for x in 0..3 {
                for y in 0..3 {
                    for z in 0..3 {
                        let mut s = AmbientVector::ZERO;
                        for (a, b, c) in [(u, x, y), (x, y, u), (y, u, x)] {
                            let t1 = riemann_closed_vec(2.0, &q, &e[b], &e[c], &self.sff.h_vec[a][z]);
                            let rz = riemann_closed_vec(2.0, &q, &e[b], &e[c], &e[z]);
                            let tan: [f64; 3] = std::array::from_fn(|m| metric_vec(2.0, &q, &rz, &e[m]));
                            s += t1 - self.h_with(a, &tan);
                        }
                        for w in 0..3 {
                            r = r.max(metric_vec(2.0, &q, &s, &je[w]).abs());
                        }
                    }
                }
            }
        }
        r
    }

    /// Quantities that must be constant along an extrinsically homogeneous
    /// Lagrangian: `theta`, `|h|^2`, sorted Ricci eigenvalues, scalar curvature.
    pub fn homogeneity_invariants(&self) -> [f64; 6] {
        let c = self.curvature();
        let mut ev: Vec<f64> = SymmetricEigen::new((c.ricci + c.ricci.transpose()) * 0.5).eigenvalues.iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        [self.frame.theta, self.sff.norm_sq(), ev[0], ev[1], ev[2], c.scalar]
    }

    /// Largest difference between `h` from the exact jet and the normal part
    /// of the differentiated frame.
    pub fn frame_consistency_residual(&self) -> f64 {
        let q = self.q();
        let mut r: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let d = self.h_from_frame[i][j] - self.sff.h_vec[i][j];
                r = r.max(metric_vec(2.0, &q, &d, &d).sqrt());
            }
        }
        r
    }
}

/// Random orthonormal coordinate pairs in R^3.
pub fn random_planes(seed: u64, n: usize) -> Vec<(Vector3<f64>, Vector3<f64>)> {
    (0..n as u64)
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let mut g = || -> Vector3<f64> { Vector3::from_fn(|_, _| rng.sample::<f64, _>(rand_distr::StandardNormal)) };
            let x = g().normalize();
            let y = g();
            let y = (y - x * x.dot(&y)).normalize();
            (x, y)
        })
        .collect()
}

pub fn induced_curvature(imm: &Immersion, u: &Params, cfg: &ConnectionConfig) -> Result<InducedCurvature> {
    Ok(analyze(imm, u, cfg)?.curvature())
}

pub fn normal_curvature_check(imm: &Immersion, u: &Params, cfg: &ConnectionConfig) -> Result<f64> {
    Ok(analyze(imm, u, cfg)?.normal_curvature_residual())
}

/// Spread of sectional curvature below which the induced metric is treated
/// as constant-curvature.
pub const CONSTANT_CURVATURE_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CyclicResiduals {
    pub nabla_g: f64,
    /// Only evaluated when the induced curvature is constant at the point.
    pub constant_curvature: Option<f64>,
}

pub fn cyclic_identity_checks(imm: &Immersion, u: &Params, cfg: &ConnectionConfig) -> Result<CyclicResiduals> {
    let an = analyze(imm, u, cfg)?;
    Ok(cyclic_from(&an, 0, 20))
}

pub fn cyclic_from(an: &LagrangianAnalysis, seed: u64, planes: usize) -> CyclicResiduals {
    let constant = an.sectional_spread(seed, planes) < CONSTANT_CURVATURE_TOL;
    CyclicResiduals {
        nabla_g: an.cyclic_nabla_g_residual(),
        constant_curvature: constant.then(|| an.constant_curvature_identity_residual()),
    }
}

/// `|D1 part|` and `|D2 part|` of a lifted vector, for diagnostics.
pub fn distribution_parts(q: &AmbientVector, v: &AmbientVector) -> (f64, f64) {
    (d12(q, v).norm(), d24(q, v).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    struct Torus;

    // A Clifford-type torus times a circle: not Lagrangian in general.
    impl AnalyticChart for Torus {
        fn map<D: DualNum<Primitive = f64> + Copy>(u: [D; 3]) -> [Cx<D>; 4] {
            let h = 0.5f64.sqrt();
            [
                Cx::cis(u[0]).scale_f(h),
                Cx::cis(u[1]).scale(u[2].cos() * h),
                Cx::zero(),
                Cx::zero(),
            ]
        }
    }

    fn rp3() -> Immersion {
        Immersion::from_fn("rp3-numeric", [(0.2, 1.2), (0.0, 6.0), (0.0, 6.0)], |u| {
            let (a, b, c) = (u[0], u[1], u[2]);
            AmbientVector::from_reals([a.cos() * b.cos(), 0.0, a.cos() * b.sin(), 0.0, a.sin() * c.cos(), 0.0, a.sin() * c.sin(), 0.0])
        })
    }

    #[test]
    fn hyperdual_jet_matches_finite_differences() {
        struct Poly;
        impl AnalyticChart for Poly {
            fn map<D: DualNum<Primitive = f64> + Copy>(u: [D; 3]) -> [Cx<D>; 4] {
                let a = Cx::new(u[0] * u[1], u[2].sin());
                [a * a, Cx::cis(u[0] * u[2]), Cx::real(u[1].powi(3)), a.conj().mul_i()]
            }
        }
        let u = [0.3, -0.7, 1.1];
        let ex = analytic_jet::<Poly>(&u);
        let nu = numeric_jet(&analytic_value::<Poly>, &u);
        for a in 0..3 {
            assert!((ex.d1[a] - nu.d1[a]).norm() < 1e-9);
            for b in 0..3 {
                assert!((ex.d2[a][b] - nu.d2[a][b]).norm() < 1e-6, "{a}{b}");
            }
        }
    }

    #[test]
    fn real_slice_is_totally_geodesic() {
        let imm = rp3();
        let cfg = ConnectionConfig::default();
        let u = [0.7, 1.3, 2.1];
        let (ok, r) = is_lagrangian(&imm, &u, 1e-7).unwrap();
        assert!(ok, "{r}");
        let an = analyze(&imm, &u, &cfg).unwrap();
        assert!(an.sff.h_vec.iter().flatten().all(|v| v.norm() < 1e-5));
        assert!(an.frame.theta < 1e-6);
        assert!(an.frame.g_residual() < 1e-6);
    }

    #[test]
    fn frame_is_orthonormal() {
        let imm = rp3();
        let f = tangent_frame(&imm, &[0.5, 0.1, 0.2]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let g = metric_vec(2.0, f[i].base.vec(), &f[i].vec, &f[j].vec);
                assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn degenerate_chart_is_rejected() {
        let imm = Immersion::analytic::<Torus>("torus", [(0.0, PI), (0.0, PI), (0.0, PI)]);
        // Torus lands off the sphere unless cos u2 = 1; at u2 = 0 it is on
        // the sphere but the third column vanishes.
        let e = tangent_frame(&imm, &[0.3, 0.4, 0.0]).unwrap_err();
        assert!(matches!(e, GeomError::DegeneratePoint(_)), "{e}");
        assert!(matches!(tangent_frame(&imm, &[0.3, 0.4, 0.5]), Err(GeomError::InvalidInput(_))));
    }

    #[test]
    fn levi_civita_symbol() {
        assert_eq!(levi_civita(0, 1, 2), 1.0);
        assert_eq!(levi_civita(1, 0, 2), -1.0);
        assert_eq!(levi_civita(1, 1, 2), 0.0);
    }

    #[test]
    fn random_planes_are_orthonormal() {
        for (x, y) in random_planes(3, 10) {
            assert!((x.norm() - 1.0).abs() < 1e-12 && (y.norm() - 1.0).abs() < 1e-12 && x.dot(&y).abs() < 1e-12);
        }
    }
}
