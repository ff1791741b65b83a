//! The homogeneous Lagrangians of the nearly Kähler CP^3 as explicit charts,
//! and the matrix `M(alpha, beta)` generating the last of them.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix4};
use num_dual::DualNum;

use crate::ambient::{herm_inner, AmbientVector, C64, I};
use crate::error::{GeomError, Result};
use crate::hopf::{horizontal, metric_vec};
use crate::isometry::{Mat4, UnitaryMatrix};
use crate::lagrangian::{AnalyticChart, Cx, Immersion, Params};

/// Constants the catalog entries are expected to reproduce.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Expected {
    pub theta: f64,
    pub totally_geodesic: bool,
    /// `h^1_11` in the canonical frame (only for `theta = pi/4`).
    pub h111: Option<f64>,
    /// `sec(e1, e2)`, `sec(e1, e3)`, `sec(e2, e3)`.
    pub sectional: Option<[f64; 3]>,
    pub ricci_diag: Option<[f64; 3]>,
    /// Coefficient of `J e1` in the Fubini–Study mean curvature.
    pub mean_curvature_fs: Option<f64>,
    /// `g_2(E_i, E_i)` for the Berger fields.
    pub berger_lengths: Option<[f64; 3]>,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub immersion: Immersion,
    pub expected: Expected,
}

pub const NAMES: [&str; 5] = ["rp3", "chiang", "s2xs1", "berger", "ehl"];

pub fn entry(name: &str) -> Result<CatalogEntry> {
    match name {
        "rp3" => Ok(rp3()),
        "chiang" => Ok(chiang()),
        "s2xs1" => Ok(s2xs1()),
        "berger" => Ok(berger()),
        "ehl" => Ok(ehl()),
        _ => Err(GeomError::InvalidInput(format!("unknown catalog entry {name:?}"))),
    }
}

pub fn all() -> Vec<CatalogEntry> {
    NAMES.iter().map(|n| entry(n).expect("catalog name")).collect()
}

fn c<D: DualNum<Primitive = f64> + Copy>(x: f64) -> D {
    D::from(x)
}

// ---------------------------------------------------------------------------
// RP^3

pub struct Rp3Chart;

/// Hopf-type coordinates on the real unit sphere S^3 in R^4.
impl AnalyticChart for Rp3Chart {
    fn map<D: DualNum<Primitive = f64> + Copy>(u: [D; 3]) -> [Cx<D>; 4] {
        let (sa, ca) = u[0].sin_cos();
        let (sb, cb) = u[1].sin_cos();
        let (sc, cc) = u[2].sin_cos();
        [Cx::real(ca * cb), Cx::real(ca * sb), Cx::real(sa * cc), Cx::real(sa * sc)]
    }
}

pub fn rp3() -> CatalogEntry {
    CatalogEntry {
        name: "rp3",
        immersion: Immersion::analytic::<Rp3Chart>("rp3", [(0.1, PI / 2.0 - 0.1), (0.0, 2.0 * PI), (0.0, 2.0 * PI)]),
        expected: Expected { theta: 0.0, totally_geodesic: true, ..Default::default() },
    }
}

// ---------------------------------------------------------------------------
// Chiang

pub struct ChiangChart;

/// Parameters `(t, phi, psi)` with `alpha = (sin phi cos psi, sin phi sin psi, cos phi)`.
impl AnalyticChart for ChiangChart {
    fn map<D: DualNum<Primitive = f64> + Copy>(u: [D; 3]) -> [Cx<D>; 4] {
        let (st, ct) = u[0].sin_cos();
        let (sp, cp) = u[1].sin_cos();
        let (ss, cs) = u[2].sin_cos();
        let (a1, a2, a3) = (sp * cs, sp * ss, cp);
        let s3 = 3f64.sqrt();
        let one: D = c(1.0);
        let t2 = u[0] * 2.0;
        let t3 = u[0] * 3.0;
        let q = a2 * a2 * 2.0 + a3 * a3 - one;
        let re = [
            st * st * s3 * (a1 * a2 * ct * 2.0 + a3 * (a2 * a2 * 2.0 + a3 * a3 - one) * st),
            st * s3 * (a3 * st * (a2 * ct * 2.0 - a1 * a3 * st) + a1 * ct * ct),
            (a3 * a3 * st * t2.sin() * (-6.0) + ct * 3.0 + t3.cos()) * 0.25,
            a2 * (a2 * a2 * (-4.0) - a3 * a3 * 3.0 + 3.0) * st * st * st,
        ];
        let im = [
            st * s3 * (a3 * st * (a1 * ct * 2.0 + a2 * a3 * st) - a2 * ct * ct),
            st * st * s3 * (q * ct - a1 * a2 * a3 * st * 2.0),
            -st * st * st * a1 * (a2 * a2 * 4.0 + a3 * a3 - one),
            st * (a3 * a3 * a3 * st * st - a3 * ct * ct * 3.0),
        ];
        std::array::from_fn(|k| Cx::new(re[k], im[k]))
    }
}

pub fn chiang() -> CatalogEntry {
    CatalogEntry {
        name: "chiang",
        immersion: Immersion::analytic::<ChiangChart>("chiang", [(0.2, PI - 0.2), (0.2, PI - 0.2), (0.0, 2.0 * PI)]),
        expected: Expected { theta: 0.0, ..Default::default() },
    }
}

// ---------------------------------------------------------------------------
// S^2 x S^1

/// `p0(u, v)` and `f(u, v)` of the product example.
pub fn s2xs1_parts<D: DualNum<Primitive = f64> + Copy>(u: D, v: D) -> ([Cx<D>; 4], [Cx<D>; 4]) {
    let s3 = 3f64.sqrt();
    let s6 = 6f64.sqrt();
    let (su, cu) = u.sin_cos();
    let ev = Cx::cis(v);
    let p0 = [
        Cx::real(cu * ((3.0 + s3) / 6.0)),
        ev.mul_i().scale(su * (s6 / 6.0)),
        Cx::real(cu * (s6 / 6.0)).mul_i(),
        ev.scale(su * ((3.0 + s3) / 6.0)),
    ];
    let f = [
        Cx::real(cu * ((3.0 - s3) / 6.0)),
        ev.mul_i().scale(su * (s6 / 6.0)),
        -Cx::real(cu * (s6 / 6.0)).mul_i(),
        -ev.scale(su * ((3.0 - s3) / 6.0)),
    ];
    (p0, f)
}

pub struct S2xS1Chart;

/// `(t, u, v) -> p0(u, v) + e^{it} f(u, v)` followed by `z4 -> -z4`.
impl AnalyticChart for S2xS1Chart {
    fn map<D: DualNum<Primitive = f64> + Copy>(u: [D; 3]) -> [Cx<D>; 4] {
        let (p0, f) = s2xs1_parts(u[1], u[2]);
        let e = Cx::cis(u[0]);
        let mut z: [Cx<D>; 4] = std::array::from_fn(|k| p0[k] + e * f[k]);
        z[3] = -z[3];
        z
    }
}

pub fn s2xs1() -> CatalogEntry {
    CatalogEntry {
        name: "s2xs1",
        immersion: Immersion::analytic::<S2xS1Chart>("s2xs1", [(0.0, 2.0 * PI), (0.2, PI - 0.2), (0.0, 2.0 * PI)]),
        expected: Expected { theta: PI / 4.0, h111: Some(1.0), ..Default::default() },
    }
}

// ---------------------------------------------------------------------------
// Berger sphere

pub struct BergerChart;

/// `(t, eta, xi) -> sqrt(2/3) (z, w, e^{it}/sqrt 2, 0)` with
/// `(z, w) = (cos eta, sin eta e^{i xi})` on S^3.
impl AnalyticChart for BergerChart {
    fn map<D: DualNum<Primitive = f64> + Copy>(u: [D; 3]) -> [Cx<D>; 4] {
        let r = (2.0f64 / 3.0).sqrt();
        let (se, ce) = u[1].sin_cos();
        [
            Cx::real(ce * r),
            Cx::cis(u[2]).scale(se * r),
            Cx::cis(u[0]).scale_f(r / 2f64.sqrt()),
            Cx::zero(),
        ]
    }
}

pub fn berger() -> CatalogEntry {
    CatalogEntry {
        name: "berger",
        immersion: Immersion::analytic::<BergerChart>("berger", [(0.0, 2.0 * PI), (0.2, PI / 2.0 - 0.2), (0.0, 2.0 * PI)]),
        expected: Expected {
            theta: PI / 4.0,
            h111: Some(-0.5),
            berger_lengths: Some([4.0 / 9.0, 8.0 / 9.0, 8.0 / 9.0]),
            ..Default::default()
        },
    }
}

/// The fields `E1 = d_t F - iF/3`, `E2 = dF(X2)`, `E3 = dF(X3)` of the
/// Berger example, where `X2 = (-conj w, conj z)` and `X3 = i X2` on S^3.
pub fn berger_fields(u: &Params) -> (AmbientVector, [AmbientVector; 3]) {
    let imm = berger().immersion;
    let jet = imm.jet(u);
    let f = jet.value;
    let r = (2.0f64 / 3.0).sqrt();
    let (z, w) = (f.0[0] / r, f.0[1] / r);
    let zero = C64::new(0.0, 0.0);
    let x2 = AmbientVector([-w.conj() * r, z.conj() * r, zero, zero]);
    (f, [jet.d1[0] - f.i() * (1.0 / 3.0), x2, x2.i()])
}

/// `g_2(E_i, E_i)` of the horizontal parts of the Berger fields.
pub fn berger_lengths(u: &Params) -> [f64; 3] {
    let (f, e) = berger_fields(u);
    e.map(|v| {
        let h = horizontal(&f, &v);
        metric_vec(2.0, &f, &h, &h)
    })
}

/// `|dF(X1) - iF + d_t F|` with `X1 = (iz, iw)`.
pub fn berger_x1_residual(u: &Params) -> f64 {
    let imm = berger().immersion;
    let jet = imm.jet(u);
    let f = jet.value;
    let zero = C64::new(0.0, 0.0);
    let dx1 = AmbientVector([f.0[0] * I, f.0[1] * I, zero, zero]);
    (dx1 - f.i() + jet.d1[0]).norm()
}

// ---------------------------------------------------------------------------
// The orbit example

/// Entries of `M(alpha, beta)` over dual numbers.
pub fn m_entries<D: DualNum<Primitive = f64> + Copy>(alpha: D, beta: D) -> [[Cx<D>; 4]; 4] {
    let s3 = 3f64.sqrt();
    let s5 = 5f64.sqrt();
    let s15 = 15f64.sqrt();
    let (sa, ca) = alpha.sin_cos();
    let e = Cx::cis(beta);
    let em = Cx::cis(-beta);
    // f(beta) = 1 + e^{2 i beta} sqrt 15 and f(-beta).
    let fb = Cx::cis(beta * 2.0).scale_f(s15).add_f(1.0);
    let fbm = Cx::cis(beta * (-2.0)).scale_f(s15).add_f(1.0);
    let ica = Cx::real(ca).mul_i();
    let rca = Cx::real(ca * (2.0 * s5));
    let m = [
        [
            ica.scale_f(-7.0),
            em * fb.scale(sa),
            -(fbm.add_f(5.0) * e).mul_i().scale(sa / s3),
            rca,
        ],
        [
            -(e * fbm).scale(sa),
            ica.scale_f(7.0),
            -rca,
            (fb.add_f(5.0) * em).mul_i().scale(sa / s3),
        ],
        [
            -(em * fb.add_f(5.0)).mul_i().scale(sa / s3),
            rca,
            -ica,
            (e * fbm.add_f(-6.0)).scale(sa),
        ],
        [
            -rca,
            (e * fbm.add_f(5.0)).mul_i().scale(sa / s3),
            -(em * fb.add_f(-6.0)).scale(sa),
            ica,
        ],
    ];
    m.map(|row| row.map(|x| x.scale_f(1.0 / 3.0)))
}

fn mat_vec_cx<D: DualNum<Primitive = f64> + Copy>(m: &[[Cx<D>; 4]; 4], v: &[Cx<D>; 4]) -> [Cx<D>; 4] {
    std::array::from_fn(|r| (0..4).fold(Cx::zero(), |acc, k| acc + m[r][k] * v[k]))
}

/// Coefficients of `e^{tM} = c0 + c1 M + c2 M^2 + c3 M^3` obtained by
/// expanding `((M^2 + 9)(sin t M + cos t) - (M^2 + 1)/3 (sin 3t M + 3 cos 3t)) / 8`.
pub fn exp_coefficients<D: DualNum<Primitive = f64> + Copy>(t: D) -> [D; 4] {
    let (s, co) = t.sin_cos();
    let (s3, c3) = (t * 3.0).sin_cos();
    [
        (co * 9.0 - c3) / 8.0,
        (s * 9.0 - s3 / 3.0) / 8.0,
        (co - c3) / 8.0,
        (s - s3 / 3.0) / 8.0,
    ]
}

/// `e^{t M(alpha, beta)} e1`.
pub fn ehl_point<D: DualNum<Primitive = f64> + Copy>(t: D, alpha: D, beta: D) -> [Cx<D>; 4] {
    let m = m_entries(alpha, beta);
    let e1 = [Cx::real(c(1.0)), Cx::zero(), Cx::zero(), Cx::zero()];
    let v1 = mat_vec_cx(&m, &e1);
    let v2 = mat_vec_cx(&m, &v1);
    let v3 = mat_vec_cx(&m, &v2);
    let k = exp_coefficients(t);
    std::array::from_fn(|r| e1[r].scale(k[0]) + v1[r].scale(k[1]) + v2[r].scale(k[2]) + v3[r].scale(k[3]))
}

pub struct EhlChart;

impl AnalyticChart for EhlChart {
    fn map<D: DualNum<Primitive = f64> + Copy>(u: [D; 3]) -> [Cx<D>; 4] {
        ehl_point(u[0], u[1], u[2])
    }
}

/// The generator `M(alpha, beta)` in sp(2).
pub fn m_matrix(alpha: f64, beta: f64) -> Mat4 {
    let m = m_entries(alpha, beta);
    Matrix4::from_fn(|r, k| C64::new(m[r][k].re, m[r][k].im))
}

/// `e^{t M(alpha, beta)}` from the closed form.
pub fn exp_m(t: f64, alpha: f64, beta: f64) -> UnitaryMatrix {
    let m = m_matrix(alpha, beta);
    let m2 = m * m;
    let k = exp_coefficients(t).map(|x| C64::new(x, 0.0));
    UnitaryMatrix(Mat4::identity() * k[0] + m * k[1] + m2 * k[2] + m2 * m * k[3])
}

pub fn ehl_expected_theta() -> f64 {
    (7.0 / (76.0 + 15.0 * 15f64.sqrt()).sqrt()).atan()
}

pub fn ehl() -> CatalogEntry {
    let s15 = 15f64.sqrt();
    CatalogEntry {
        name: "ehl",
        immersion: Immersion::analytic::<EhlChart>("ehl", [(0.0, 2.0 * PI), (0.2, PI - 0.2), (0.0, 2.0 * PI)]),
        expected: Expected {
            theta: ehl_expected_theta(),
            sectional: Some([0.09 * (6.0 * s15 - 11.0), -0.09 * (6.0 * s15 + 11.0), 2.07]),
            ricci_diag: Some([-99.0 / 50.0, 27.0 / 50.0 * (s15 + 2.0), -27.0 / 50.0 * (s15 - 2.0)]),
            mean_curvature_fs: Some(224.0 / 61.0 * 0.4f64.sqrt()),
            ..Default::default()
        },
    }
}

/// Distance from `F(u)` to the complex line through `p`.
fn line_residual(imm: &Immersion, u: &Params, p: &AmbientVector) -> AmbientVector {
    let f = imm.chart(u);
    f - p.scale_c(herm_inner(&f, p))
}

/// Parameters `u` with `F(u)` on the complex line through `p`, by a grid
/// search followed by Gauss–Newton. Returns the parameters and the residual.
pub fn resolve_parameters(imm: &Immersion, p: &AmbientVector, box_: [(f64, f64); 3], grid: usize) -> (Params, f64) {
    let mut starts: Vec<(f64, Params)> = Vec::with_capacity(grid * grid * grid);
    for i in 0..grid {
        for j in 0..grid {
            for k in 0..grid {
                let u: Params = std::array::from_fn(|d| {
                    let idx = [i, j, k][d] as f64 + 0.5;
                    box_[d].0 + (box_[d].1 - box_[d].0) * idx / grid as f64
                });
                starts.push((line_residual(imm, &u, p).norm(), u));
            }
        }
    }
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = (starts[0].1, starts[0].0);
    for (_, u0) in starts.iter().take(8) {
        let (u, r) = gauss_newton(imm, p, *u0);
        if r < best.1 {
            best = (u, r);
        }
        if r < 1e-12 {
            break;
        }
    }
    best
}

fn gauss_newton(imm: &Immersion, p: &AmbientVector, mut u: Params) -> (Params, f64) {
    let mut r = line_residual(imm, &u, p);
    for _ in 0..50 {
        let jet = imm.jet(&u);
        // Derivative of f - <f, p> p.
        let cols: Vec<AmbientVector> = jet.d1.iter().map(|d| *d - p.scale_c(herm_inner(d, p))).collect();
        let jm = DMatrix::from_fn(8, 3, |row, k| cols[k].to_reals()[row]);
        let b = nalgebra::DVector::from_row_slice(&r.to_reals());
        let Ok(step) = jm.svd(true, true).solve(&b, 1e-12) else { break };
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let cand: Params = std::array::from_fn(|k| u[k] - lambda * step[k]);
            let rc = line_residual(imm, &cand, p);
            if rc.norm() < r.norm() {
                u = cand;
                r = rc;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved || r.norm() < 1e-14 {
            break;
        }
    }
    (u, r.norm())
}

/// Composes two random group elements `e^{s M}` and checks that the image
/// of a chart point is again a chart point. Returns the re-solve residual.
pub fn ehl_orbit_residual(u: &Params, s: f64, alpha: f64, beta: f64) -> f64 {
    let imm = ehl().immersion;
    let x = imm.chart(u);
    let g = exp_m(s, alpha, beta);
    let y = AmbientVector(std::array::from_fn(|r| (0..4).map(|k| g.0[(r, k)] * x.0[k]).sum()));
    resolve_parameters(&imm, &y, [(0.0, 2.0 * PI), (0.0, PI), (0.0, 2.0 * PI)], 12).1
}

/// Eigenvalues of `M(alpha, beta)`, sorted by imaginary part.
pub fn m_eigenvalues(alpha: f64, beta: f64) -> Vec<C64> {
    let m = m_matrix(alpha, beta);
    let mut ev: Vec<C64> = m.schur().eigenvalues().map(|v| v.iter().cloned().collect()).unwrap_or_default();
    ev.sort_by(|a, b| a.im.total_cmp(&b.im));
    ev
}

/// `|M + M^*|` and `|M J - J conj(M)|`: skew-Hermitian and quaternionic.
pub fn m_algebra_residuals(alpha: f64, beta: f64) -> (f64, f64) {
    let m = m_matrix(alpha, beta);
    let skew = (m + m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    (skew, crate::isometry::sp2_residual(&m))
}
