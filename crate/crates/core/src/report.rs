//! Verification suites and the machine-readable report.
//!
//! A suite is an ordered list of [`CheckItem`]s. Samples are evaluated in
//! parallel with one RNG stream per sample index and collected in order, so
//! the report does not depend on the thread count.

use std::f64::consts::{FRAC_PI_4, PI};
use std::str::FromStr;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde_json::{Map, Number, Value};

use crate::ambient::{left_mul, real_inner, sphere_point_from_rng, AmbientVector, SpherePoint, Unit, C64};
use crate::catalog::{self, berger_lengths, berger_x1_residual, ehl_orbit_residual, exp_m, m_algebra_residuals, m_eigenvalues, m_matrix, CatalogEntry};
use crate::connection::{
    basic_field, d_a_vec, g_a_plus_numeric, g_a_plus_vec, g_closed, g_numeric, koszul_nabla, nabla_a_j1_vec, nabla_j1_numeric,
    nabla_j_numeric, nabla_point, ConnectionConfig,
};
use crate::curvature::{
    ricci_eigenvalues, ricci_trace_vec, ricci_vec, riemann_closed_vec, riemann_fs_vec, riemann_numeric_vec, scalar, scalar_trace,
    sectional_from_tensor, sectional_vec, wedge_vec, CurvatureMode,
};
use crate::error::{GeomError, Result};
use crate::frames::{contact_frame, contact_residuals, frame_derivative_residuals, normalized_frame, FrameExtension, PHI_SIGN};
use crate::hopf::{
    almost_product, apply_j, apply_j1, apply_p, d12, d24, g1_from_metric, gauge_transport, horizontal, metric, metric_from_g1,
    metric_vec, nk_j, random_horizontal, MetricParam, TangentRep,
};
use crate::isometry::{
    is_sp2, random_sp2, random_su4, sample_rng, sp2_residual, structure_transport, isometry_residual, IsometryElement, Mat4,
};
use crate::lagrangian::{
    ab_tensors, analyze, angle, is_lagrangian, min_singular_value, second_fundamental_form, AngleRegime, LagrangianAnalysis,
    MetricChoice, Params, CONSTANT_CURVATURE_TOL,
};

/// Number of random planes per sample for sectional-curvature statistics.
pub const PLANES: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub a_values: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
    /// Multiplies every tolerance.
    pub tol_scale: f64,
    pub fd_step: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { a_values: vec![0.5, 1.0, 2.0, 3.0], seed: 42, samples: 25, tol_scale: 1.0, fd_step: 1e-5 }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.a_values.is_empty() {
            return Err(GeomError::InvalidInput("no metric parameters given".into()));
        }
        for &a in &self.a_values {
            MetricParam::new(a)?;
        }
        if self.samples == 0 {
            return Err(GeomError::InvalidInput("samples must be positive".into()));
        }
        if !(self.tol_scale.is_finite() && self.tol_scale > 0.0) {
            return Err(GeomError::InvalidInput(format!("tol_scale {} must be positive", self.tol_scale)));
        }
        self.connection().validate()
    }

    pub fn connection(&self) -> ConnectionConfig {
        ConnectionConfig { fd_step: self.fd_step, ..ConnectionConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SuiteName {
    Structure,
    Connection,
    Curvature,
    Isometry,
    Lagrangian(String),
    All,
}

impl FromStr for SuiteName {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structure" => Ok(SuiteName::Structure),
            "connection" => Ok(SuiteName::Connection),
            "curvature" => Ok(SuiteName::Curvature),
            "isometry" => Ok(SuiteName::Isometry),
            "all" => Ok(SuiteName::All),
            _ => match s.strip_prefix("lagrangian:") {
                Some(n) if catalog::NAMES.contains(&n) => Ok(SuiteName::Lagrangian(n.to_string())),
                _ => Err(GeomError::InvalidInput(format!(
                    "unknown suite {s:?}; expected structure, connection, curvature, isometry, all or lagrangian:<{}>",
                    catalog::NAMES.join("|")
                ))),
            },
        }
    }
}

impl std::fmt::Display for SuiteName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SuiteName::Structure => write!(f, "structure"),
            SuiteName::Connection => write!(f, "connection"),
            SuiteName::Curvature => write!(f, "curvature"),
            SuiteName::Isometry => write!(f, "isometry"),
            SuiteName::Lagrangian(n) => write!(f, "lagrangian:{n}"),
            SuiteName::All => write!(f, "all"),
        }
    }
}

pub fn suite_names() -> Vec<String> {
    let mut out: Vec<String> = ["structure", "connection", "curvature", "isometry"].iter().map(|s| s.to_string()).collect();
    out.extend(catalog::NAMES.iter().map(|n| format!("lagrangian:{n}")));
    out.push("all".into());
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckItem {
    pub check_id: String,
    /// What the check verifies, or "plumbing" for internal consistency.
    pub paper_ref: String,
    pub residual: f64,
    /// Already multiplied by the tolerance scale.
    pub tolerance: f64,
    pub pass: bool,
    pub details: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub suite: String,
    pub items: Vec<CheckItem>,
    pub config: SuiteConfig,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|i| !i.pass)
    }

    pub fn item(&self, check_id: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.check_id == check_id)
    }

    pub fn to_json_value(&self) -> Value {
        let items = self
            .items
            .iter()
            .map(|it| {
                let mut m = Map::new();
                m.insert("check_id".into(), Value::String(it.check_id.clone()));
                m.insert("paper_ref".into(), Value::String(it.paper_ref.clone()));
                m.insert("residual".into(), num(it.residual));
                m.insert("tolerance".into(), num(it.tolerance));
                m.insert("pass".into(), Value::Bool(it.pass));
                m.insert("details".into(), Value::String(it.details.clone()));
                Value::Object(m)
            })
            .collect();
        let mut config = Map::new();
        config.insert("a_values".into(), Value::Array(self.config.a_values.iter().map(|a| num(*a)).collect()));
        config.insert("seed".into(), Value::Number(self.config.seed.into()));
        config.insert("samples".into(), Value::Number(self.config.samples.into()));
        config.insert("tol_scale".into(), num(self.config.tol_scale));
        config.insert("fd_step".into(), num(self.config.fd_step));
        let mut conventions = Map::new();
        conventions.insert("mean_curvature_normalization".into(), Value::String("trace: H = sum_i h(e_i, e_i)".into()));
        conventions.insert("phi_sign".into(), num(PHI_SIGN));
        conventions.insert("curvature_sign".into(), Value::String("R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]".into()));
        let mut top = Map::new();
        top.insert("suite".into(), Value::String(self.suite.clone()));
        top.insert("all_pass".into(), Value::Bool(self.all_pass()));
        top.insert("config".into(), Value::Object(config));
        top.insert("conventions".into(), Value::Object(conventions));
        top.insert("notes".into(), Value::Array(self.notes.iter().cloned().map(Value::String).collect()));
        top.insert("items".into(), Value::Array(items));
        Value::Object(top)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("report serializes");
        s.push('\n');
        s
    }
}

/// 17 significant digits; non-finite values become strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&format!("{x:.16e}")).expect("formatted float parses"))
    } else {
        Value::String(format!("{x}"))
    }
}

/// Max that propagates NaN, so a broken sample cannot hide.
fn worst<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, |m, x| if m.is_nan() || x.is_nan() { f64::NAN } else { m.max(x) })
}

fn least<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(f64::INFINITY, |m, x| if m.is_nan() || x.is_nan() { f64::NAN } else { m.min(x) })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn std_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

fn par_map<T: Send, F: Fn(u64) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n as u64).into_par_iter().map(f).collect()
}

/// Seeds for the k-th group element of a family, independent of the point streams.
fn element_seed(seed: u64, family: u64, k: u64) -> u64 {
    sample_rng(seed ^ (family << 48), k).next_u64()
}

struct Builder {
    items: Vec<CheckItem>,
    scale: f64,
}

impl Builder {
    fn new(scale: f64) -> Self {
        Builder { items: Vec::new(), scale }
    }

    /// Passes when `residual < tol`.
    fn below(&mut self, id: impl Into<String>, what: &str, residual: f64, tol: f64, details: impl Into<String>) {
        let tolerance = tol * self.scale;
        self.items.push(CheckItem {
            check_id: id.into(),
            paper_ref: what.into(),
            residual,
            tolerance,
            pass: residual < tolerance,
            details: details.into(),
        });
    }

    /// Passes when `value > bound`; the residual is the shortfall `bound - value`.
    fn above(&mut self, id: impl Into<String>, what: &str, value: f64, bound: f64, details: impl Into<String>) {
        let residual = bound - value;
        self.items.push(CheckItem {
            check_id: id.into(),
            paper_ref: what.into(),
            residual,
            tolerance: 0.0,
            pass: residual < 0.0,
            details: format!("value {value:.6e} must exceed {bound:e}; {}", details.into()),
        });
    }

    fn failed(&mut self, id: impl Into<String>, what: &str, err: &GeomError) {
        self.items.push(CheckItem {
            check_id: id.into(),
            paper_ref: what.into(),
            residual: f64::INFINITY,
            tolerance: 0.0,
            pass: false,
            details: format!("structural failure: {err}"),
        });
    }
}

/// A random point with four horizontal vectors, from stream `i`.
fn point_sample(seed: u64, i: u64) -> (SpherePoint, [AmbientVector; 4]) {
    let mut rng = sample_rng(seed, i);
    let q = sphere_point_from_rng(&mut rng);
    let v = [0; 4].map(|_| random_horizontal(&mut rng, &q).vec);
    (q, v)
}

fn a_label(a: f64) -> String {
    format!("a={a}")
}

fn g_norm(a: f64, q: &AmbientVector, v: &AmbientVector) -> f64 {
    metric_vec(a, q, v, v).max(0.0).sqrt()
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let suite: SuiteName = name.parse()?;
    cfg.validate()?;
    let mut b = Builder::new(cfg.tol_scale);
    let mut notes = Vec::new();
    match &suite {
        SuiteName::Structure => structure_suite(&mut b, cfg),
        SuiteName::Connection => connection_suite(&mut b, cfg),
        SuiteName::Curvature => curvature_suite(&mut b, cfg),
        SuiteName::Isometry => isometry_suite(&mut b, cfg),
        SuiteName::Lagrangian(n) => lagrangian_suite(&mut b, &mut notes, cfg, &catalog::entry(n)?),
        SuiteName::All => {
            structure_suite(&mut b, cfg);
            connection_suite(&mut b, cfg);
            curvature_suite(&mut b, cfg);
            isometry_suite(&mut b, cfg);
            for e in catalog::all() {
                lagrangian_suite(&mut b, &mut notes, cfg, &e);
            }
        }
    }
    Ok(VerificationReport { suite: suite.to_string(), items: b.items, config: cfg.clone(), notes })
}

/// Check ids and descriptions of a suite, from a single-sample pass.
pub fn list_checks(name: &str, cfg: &SuiteConfig) -> Result<Vec<(String, String)>> {
    let quick = SuiteConfig { samples: 1, ..cfg.clone() };
    Ok(run_suite(name, &quick)?.items.into_iter().map(|i| (i.check_id, i.paper_ref)).collect())
}

// ---------------------------------------------------------------------------
// structure

fn structure_suite(b: &mut Builder, cfg: &SuiteConfig) {
    let n = cfg.samples;
    let c = cfg.connection();
    let pts = par_map(n, |i| point_sample(cfg.seed, i));

    let quat = worst(pts.iter().map(|(_, [x, _, _, _])| {
        let (i, j, k) = (left_mul(Unit::I, x), left_mul(Unit::J, x), left_mul(Unit::K, x));
        worst([
            (left_mul(Unit::I, &i) + *x).norm(),
            (left_mul(Unit::J, &j) + *x).norm(),
            (left_mul(Unit::K, &k) + *x).norm(),
            (left_mul(Unit::I, &j) - k).norm(),
            (left_mul(Unit::J, &i) + k).norm(),
            (j.norm() - x.norm()).abs(),
        ])
    }));
    b.below("structure.quaternion_units", "quaternionic structure of C^4: i^2 = j^2 = k^2 = -1, ij = -ji = k", quat, 1e-14, "left multiplication on random vectors");

    let hz = worst(pts.iter().map(|(q, [x, _, _, _])| {
        let w = *x + q.i() * 0.3 - **q * 1.7;
        let h = horizontal(q, &w);
        worst([
            real_inner(&h, q).abs(),
            real_inner(&h, &q.i()).abs(),
            (d12(q, &h) + d24(q, &h) - h).norm(),
            (d12(q, &d12(q, &h)) - d12(q, &h)).norm(),
            real_inner(&d12(q, &h), &d24(q, &h)).abs(),
        ])
    }));
    b.below("structure.horizontal_split", "horizontal space orthogonal to q, iq splits as D1 + D2", hz, 1e-12, "");

    let gauge = worst(pts.iter().enumerate().map(|(k, (q, [x, y, _, _]))| {
        let th = 0.37 + k as f64;
        let (tx, ty) = (TangentRep::new_unchecked(*q, *x), TangentRep::new_unchecked(*q, *y));
        let (gx, gy) = (gauge_transport(&tx, th), gauge_transport(&ty, th));
        let mut r = worst([
            (apply_j(&gx).vec - gauge_transport(&apply_j(&tx), th).vec).norm(),
            (apply_j1(&gx).vec - gauge_transport(&apply_j1(&tx), th).vec).norm(),
            (apply_p(&gx).vec - gauge_transport(&apply_p(&tx), th).vec).norm(),
            (g_closed(&gx.base, &gx.vec, &gy.vec) - gauge_transport(&ty.with_vec(g_closed(q, x, y)), th).vec).norm(),
        ]);
        for &a in &cfg.a_values {
            r = r.max((metric_vec(a, &gx.base, &gx.vec, &gy.vec) - metric_vec(a, q, x, y)).abs());
        }
        r
    }));
    b.below("structure.gauge_equivariance", "operations on lifts commute with the circle action", gauge, 1e-9, "J, J1, P, G and g_a");

    for &a in &cfg.a_values {
        let ap = MetricParam::new(a).expect("validated");
        let r = worst(pts.iter().map(|(q, [x, y, _, _])| {
            let (tx, ty) = (TangentRep::new_unchecked(*q, *x), TangentRep::new_unchecked(*q, *y));
            let ga = metric(ap, &tx, &ty).unwrap_or(f64::NAN);
            let from = metric_from_g1(ap, &tx, &ty).unwrap_or(f64::NAN);
            let back = g1_from_metric(ap, &tx, &ty).unwrap_or(f64::NAN);
            (from - ga).abs().max((back - real_inner(x, y)).abs())
        }));
        b.below(format!("structure.metric_roundtrip.{}", a_label(a)), "g_a through g1 and P, and g1 back from g_a", r, 1e-12, "");
    }

    let ap = worst(pts.iter().map(|(q, [x, y, _, _])| {
        let p = |v: &AmbientVector| almost_product(q, v);
        let mut r = worst([
            (p(&p(x)) - *x).norm(),
            (p(&x.i()) - p(x).i()).norm(),
            (p(x) + nk_j(q, &x.i())).norm(),
            (nk_j(q, &nk_j(q, x)) + *x).norm(),
            (nk_j(q, x) - p(x).i()).norm(),
        ]);
        for a in [0.5, 1.0, 2.0, 3.0] {
            r = r.max((metric_vec(a, q, &p(x), &p(y)) - metric_vec(a, q, x, y)).abs());
            r = r.max((metric_vec(a, q, &nk_j(q, x), &nk_j(q, y)) - metric_vec(a, q, x, y)).abs());
        }
        r
    }));
    b.below(
        "structure.almost_product",
        "P^2 = id, P commutes with J1, P = -J J1, J^2 = -1; P and J are g_a-orthogonal",
        ap,
        1e-12,
        "",
    );

    let frames = par_map(n, |i| {
        let mut rng = sample_rng(cfg.seed ^ 0xF0, i);
        let q = sphere_point_from_rng(&mut rng);
        let t: f64 = rng.random::<f64>() * 2.0 * PI;
        let u = q.j() * t.cos() + q.k() * t.sin();
        let chi = d24(&q, &random_horizontal(&mut rng, &q).vec).normalized();
        let f = contact_frame(&q, &TangentRep::new_unchecked(q, u), &TangentRep::new_unchecked(q, chi))?;
        let tw = crate::ambient::gaussian_vector(&mut rng);
        let x = random_horizontal(&mut rng, &q).vec;
        let y = random_horizontal(&mut rng, &q).vec;
        let mut gram: f64 = 0.0;
        for a in [1.0, 0.5, 2.0, 3.0] {
            let nf = normalized_frame(&f, a);
            for r in 0..6 {
                for s in 0..6 {
                    let want = if r == s { 1.0 } else { 0.0 };
                    gram = gram.max((metric_vec(a, &q, &nf.e[r], &nf.e[s]) - want).abs());
                }
            }
        }
        let ext = FrameExtension::new(f).with_twist(tw);
        let cr = contact_residuals(&ext, &x, &y, &c);
        let fr = frame_derivative_residuals(&ext, &c);
        Ok::<_, GeomError>((gram, cr.max_algebraic(), cr.max_differential(), fr.zeta_relations.max(fr.nabla_e5).max(fr.nabla_e6)))
    });
    let frames: Result<Vec<_>> = frames.into_iter().collect();
    match frames {
        Ok(f) => {
            b.below("structure.frame_orthonormal", "contact frame orthonormal for g1, rescaled frame orthonormal for g_a", worst(f.iter().map(|r| r.0)), 1e-9, "");
            b.below(
                "structure.contact_algebraic",
                "Phi^2 = Psi^2 = -id + u U + v V, Phi and Psi skew, Phi J1 = -J1 Phi",
                worst(f.iter().map(|r| r.1)),
                1e-9,
                "",
            );
            b.below(
                "structure.contact_derivatives",
                "covariant derivatives of U, V, Psi, Phi in the complex contact structure",
                worst(f.iter().map(|r| r.2)),
                1e-5,
                "finite-difference nabla^1 with a twisted frame extension",
            );
            b.below(
                "structure.frame_derivatives",
                "derivatives of E3, E5, E6 along the contact frame",
                worst(f.iter().map(|r| r.3)),
                1e-5,
                "",
            );
        }
        Err(e) => b.failed("structure.frames", "contact frame construction", &e),
    }
}

// ---------------------------------------------------------------------------
// connection

fn connection_suite(b: &mut Builder, cfg: &SuiteConfig) {
    let n = cfg.samples;
    let c = cfg.connection();
    let pts = par_map(n, |i| point_sample(cfg.seed, i));

    let gcn = worst(pts.par_iter().map(|(q, [x, y, _, _])| (g_numeric(q, x, y, &c) - g_closed(q, x, y)).norm()).collect::<Vec<_>>());
    b.below("connection.g_closed_vs_numeric", "G as the skew part of nabla^1 J: closed form", gcn, 1e-4, "finite-difference oracle");

    let ext = worst(
        pts.par_iter()
            .map(|(q, [x, y, _, _])| {
                let bf = basic_field(q, y);
                let jy = nabla_point(1.0, q, x, |p| nk_j(p, &bf(p)), &c);
                let ny = nabla_point(1.0, q, x, &bf, &c);
                let skew_b = {
                    let bx = basic_field(q, x);
                    let jx = nabla_point(1.0, q, y, |p| nk_j(p, &bx(p)), &c);
                    let nx = nabla_point(1.0, q, y, &bx, &c);
                    jx - nk_j(q, &nx)
                };
                let g_basic = (jy - nk_j(q, &ny) - skew_b) * 0.5;
                (g_basic - g_numeric(q, x, y, &c)).norm()
            })
            .collect::<Vec<_>>(),
    );
    b.below("connection.extension_independence", "G is tensorial: two extensions of its arguments agree", ext, 1e-5, "horizontalized constant vs basic field");

    let rel = pts
        .par_iter()
        .map(|(q, [x, y, _, _])| {
            let g = |u: &AmbientVector, v: &AmbientVector| g_numeric(q, u, v, &c);
            let p = |v: &AmbientVector| almost_product(q, v);
            [
                (p(&g(x, y)) + g(&p(x), &p(y))).norm(),
                (g(&p(x), y) + p(&g(x, &p(y)))).norm(),
                (g(&x.i(), y) + p(&g(x, &y.i()))).norm(),
                (g(&x.i(), &y.i()) - p(&g(x, y))).norm(),
                (g(x, &nk_j(q, y)) + nk_j(q, &g(x, y))).norm(),
            ]
        })
        .collect::<Vec<_>>();
    let rel_names = [
        ("connection.g_relation.pg", "P G(X,Y) = -G(PX, PY)"),
        ("connection.g_relation.gp", "G(PX, Y) = -P G(X, PY)"),
        ("connection.g_relation.j1_left", "G(J1 X, Y) = -P G(X, J1 Y)"),
        ("connection.g_relation.j1_both", "G(J1 X, J1 Y) = P G(X, Y)"),
        ("connection.g_relation.j", "G(X, JY) = -J G(X, Y)"),
    ];
    for (k, (id, what)) in rel_names.iter().enumerate() {
        b.below(*id, what, worst(rel.iter().map(|r| r[k])), 1e-5, "numerical G");
    }

    let dist = worst(pts.iter().map(|(q, [x, y, _, _])| {
        let (a1, b1) = (d12(q, x), d12(q, y));
        let (x2, y2) = (d24(q, x).normalized(), d24(q, y));
        let y2 = y2 - x2 * real_inner(&y2, &x2) - x2.i() * real_inner(&y2, &x2.i());
        let gxy = g_closed(q, &x2, &y2);
        g_closed(q, &a1, &b1).norm().max(d24(q, &gxy).norm())
    }));
    b.below("connection.g_on_distributions", "G(D1, D1) = 0 and G(X, Y) in D1 for X, Y in D2 with Y orthogonal to X, J1 X", dist, 1e-6, "");

    for &a in &cfg.a_values {
        let al = a_label(a);
        let per = pts
            .par_iter()
            .map(|(q, [x, y, z, _])| {
                let (xf, yf) = (basic_field(q, x), basic_field(q, y));
                let oracle = koszul_nabla(a, q, &xf, &yf, &c) - koszul_nabla(1.0, q, &xf, &yf, &c);
                let da = (oracle - d_a_vec(a, q, x, y)).norm();
                let gp = (g_a_plus_numeric(a, q, x, y, &c) - g_a_plus_vec(a, q, x, y)).norm();
                let j1 = (nabla_j1_numeric(a, q, x, y, &c) - nabla_a_j1_vec(a, q, x, y)).norm();
                let nj = |u: &AmbientVector, v: &AmbientVector| nabla_j_numeric(a, q, u, v, &c);
                let qk = (nj(x, y) + nj(&nk_j(q, x), &nk_j(q, y))).norm();
                // metric compatibility along X of g_a(Y, Z) with horizontalized extensions
                let dg = crate::connection::central_diff_scalar(
                    |s| {
                        let p = crate::connection::curve_point(q, x, s);
                        metric_vec(a, &p, &horizontal(&p, y), &horizontal(&p, z))
                    },
                    c.fd_step,
                    c.richardson,
                );
                let ny = nabla_point(a, q, x, |p| horizontal(p, y), &c);
                let nz = nabla_point(a, q, x, |p| horizontal(p, z), &c);
                let compat = (dg - metric_vec(a, q, &ny, z) - metric_vec(a, q, y, &nz)).abs();
                let (ux, uy) = (*x * (1.0 / g_norm(a, q, x)), *y * (1.0 / g_norm(a, q, y)));
                let sym = g_norm(a, q, &g_a_plus_numeric(a, q, &ux, &uy, &c));
                [da, gp, j1, qk, compat, sym]
            })
            .collect::<Vec<_>>();
        b.below(format!("connection.d_a_vs_koszul.{al}"), "difference tensor D_a = nabla^a - nabla^1: closed form", worst(per.iter().map(|r| r[0])), 1e-4, "Koszul-formula oracle");
        b.below(format!("connection.g_a_plus.{al}"), "symmetric part of nabla^a J: closed form", worst(per.iter().map(|r| r[1])), 1e-4, "finite-difference oracle");
        b.below(format!("connection.nabla_j1.{al}"), "nabla^a J1: closed form", worst(per.iter().map(|r| r[2])), 1e-4, "finite differences; the nabla^1 parts cancel exactly, so this reduces to D_a");
        b.below(
            format!("connection.quasi_kahler.{al}"),
            "(nabla^a_X J) Y + (nabla^a_JX J) JY = 0",
            worst(per.iter().map(|r| r[3])),
            1e-4,
            "finite-difference nabla^a J",
        );
        b.below(format!("connection.metric_compatible.{al}"), "plumbing", worst(per.iter().map(|r| r[4])), 1e-5, "X g_a(Y,Z) = g_a(nabla Y, Z) + g_a(Y, nabla Z)");
        let m = mean(&per.iter().map(|r| r[5]).collect::<Vec<_>>());
        let what = "nearly Kaehler exactly at a = 2: symmetric part of nabla^a J";
        let id = format!("connection.nearly_kahler.{al}");
        let det = "mean g_a-norm over unit arguments";
        if a == 2.0 {
            b.below(id, what, m, 1e-6, det);
        } else {
            // the 0.1 margin is specific to a in {0.5, 1, 3}; elsewhere the part only has to be nonzero
            let bound = if [0.5, 1.0, 3.0].contains(&a) { 0.1 } else { 1e-6 };
            b.above(id, what, m, bound, det);
        }
    }

    let ct = pts
        .par_iter()
        .map(|(q, [x, y, z, _])| {
            let g2 = |u: &AmbientVector, v: &AmbientVector| metric_vec(2.0, q, u, v);
            let gn = |u: &AmbientVector, v: &AmbientVector| nabla_j_numeric(2.0, q, u, v, &c);
            let gxy = gn(x, y);
            let bracket = g2(x, x) * g2(y, y) - g2(x, y).powi(2) - g2(x, &nk_j(q, y)).powi(2);
            let norm_r = (g2(&gxy, &gxy) - bracket).abs();
            let lhs = g_closed(q, x, &g_closed(q, y, z));
            let rhs = wedge_vec(2.0, q, y, z, x) + nk_j(q, &wedge_vec(2.0, q, y, z, &nk_j(q, x)));
            let closed = (gxy - g_closed(q, x, y)).norm();
            [norm_r, (lhs - rhs).norm(), closed]
        })
        .collect::<Vec<_>>();
    b.below(
        "connection.constant_type.norm",
        "constant type 1 at a = 2: |G(X,Y)|^2 = |X|^2|Y|^2 - g(X,Y)^2 - g(X,JY)^2",
        worst(ct.iter().map(|r| r[0])),
        1e-4,
        "G = nabla^2 J by finite differences, g = g_2",
    );
    b.below(
        "connection.constant_type.double_g",
        "constant type 1 at a = 2: G(X, G(Y,Z)) = (Y^Z)X + J (Y^Z) JX",
        worst(ct.iter().map(|r| r[1])),
        1e-4,
        "wedge in g_2",
    );
    b.below("connection.nabla2_j_is_g", "nabla^2 J = G", worst(ct.iter().map(|r| r[2])), 1e-4, "finite-difference oracle");
}

// ---------------------------------------------------------------------------
// curvature

fn curvature_suite(b: &mut Builder, cfg: &SuiteConfig) {
    let n = cfg.samples;
    let c = cfg.connection();
    let pts = par_map(n, |i| point_sample(cfg.seed, i));

    for (a, want) in [(2.0, 30.0), (1.0, 48.0), (0.5, 72.0)] {
        b.below(
            format!("curvature.scalar_value.{}", a_label(a)),
            "scalar curvature 8(a^2 + 6a - 1)/a^2",
            (scalar(a) - want).abs(),
            1e-12,
            format!("scalar = {}, expected {want}", scalar(a)),
        );
    }
    for &a in &cfg.a_values {
        let al = a_label(a);
        let tr = worst(pts.iter().map(|(q, _)| (scalar_trace(a, q) - scalar(a)).abs()));
        b.below(format!("curvature.scalar_trace.{al}"), "scalar curvature equals the trace of the closed-form curvature", tr, 1e-9, "");
        let rt = worst(pts.iter().map(|(q, [x, y, _, _])| (ricci_trace_vec(a, q, x, y) - ricci_vec(a, q, x, y)).abs()));
        b.below(format!("curvature.ricci_trace.{al}"), "Ricci eigenvalues 4(1 + 1/a^2) on D1 and 4(3a - 1)/a^2 on D2", rt, 1e-9, "trace of the closed-form tensor");
        let (l1, l2) = ricci_eigenvalues(a);
        let gap = (l1 - l2).abs();
        let det = format!("Ricci eigenvalues {l1} (D1), {l2} (D2)");
        let what = "Einstein exactly for a = 1 and a = 2";
        if a == 1.0 || a == 2.0 {
            b.below(format!("curvature.einstein.{al}"), what, gap, 1e-12, det);
            let common = if a == 1.0 { 8.0 } else { 5.0 };
            b.below(format!("curvature.einstein_constant.{al}"), "Einstein constant 8 at a = 1 and 5 at a = 2", (l1 - common).abs(), 1e-12, "");
        } else {
            // the 0.5 margin is specific to a = 0.5 and a = 3; elsewhere the gap only has to be nonzero
            let bound = if a == 0.5 || a == 3.0 { 0.5 } else { 1e-12 };
            b.above(format!("curvature.einstein.{al}"), what, gap, bound, det);
        }

        let sym = worst(pts.iter().map(|(q, [x, y, z, w])| {
            let r = |x: &AmbientVector, y: &AmbientVector, z: &AmbientVector| riemann_closed_vec(a, q, x, y, z);
            let g = |u: &AmbientVector, v: &AmbientVector| metric_vec(a, q, u, v);
            worst([
                (r(x, y, z) + r(y, x, z)).norm(),
                (r(x, y, z) + r(y, z, x) + r(z, x, y)).norm(),
                (g(&r(x, y, z), w) - g(&r(z, w, x), y)).abs(),
                (g(&r(x, y, z), w) + g(&r(x, y, w), z)).abs(),
            ])
        }));
        b.below(format!("curvature.symmetries.{al}"), "curvature tensor symmetries and first Bianchi identity", sym, 1e-10, "closed form");

        let sec = worst(pts.iter().map(|(q, [x, y, _, _])| {
            let ux = *x * (1.0 / g_norm(a, q, x));
            let y = *y - ux * metric_vec(a, q, y, &ux);
            let uy = y * (1.0 / g_norm(a, q, &y));
            (sectional_vec(a, q, &ux, &uy) - sectional_from_tensor(a, q, &ux, &uy)).abs()
        }));
        b.below(format!("curvature.sectional_consistency.{al}"), "sectional curvature formula", sec, 1e-9, "against the closed-form tensor");

        for (mode, tag) in [(CurvatureMode::Direct, "direct"), (CurvatureMode::DifferenceTensor, "difference_tensor")] {
            let r = worst(
                pts.par_iter()
                    .map(|(q, [x, y, z, _])| (riemann_numeric_vec(a, q, x, y, z, &c, mode).value - riemann_closed_vec(a, q, x, y, z)).norm())
                    .collect::<Vec<_>>(),
            );
            b.below(format!("curvature.fd_oracle.{tag}.{al}"), "closed-form curvature tensor of g_a", r, 1e-4, format!("{tag} finite-difference oracle, {n} samples"));
        }
    }
    let fs = worst(pts.iter().map(|(q, [x, y, z, _])| (riemann_closed_vec(1.0, q, x, y, z) - riemann_fs_vec(q, x, y, z)).norm()));
    b.below("curvature.fubini_study", "Fubini-Study curvature at a = 1", fs, 1e-10, "");
}

// ---------------------------------------------------------------------------
// isometry

const SP2_FAMILY: u64 = 1;
const SU4_FAMILY: u64 = 2;
const ISO_ELEMENTS: u64 = 20;

fn isometry_suite(b: &mut Builder, cfg: &SuiteConfig) {
    let n = cfg.samples;
    let sp: Vec<Mat4> = (0..ISO_ELEMENTS).map(|k| random_sp2(element_seed(cfg.seed, SP2_FAMILY, k))).collect();
    let su: Vec<Mat4> = (0..ISO_ELEMENTS).map(|k| random_su4(element_seed(cfg.seed, SU4_FAMILY, k))).collect();

    let member = worst(sp.iter().map(sp2_residual));
    b.below("isometry.sp2_membership", "plumbing", member, 1e-9, "random Sp(2) elements commute with j");
    let closure = worst((0..ISO_ELEMENTS as usize).map(|k| {
        let (x, y) = (&sp[k], &sp[(k + 1) % sp.len()]);
        let inv = x.try_inverse().unwrap_or_else(Mat4::zeros);
        sp2_residual(&(x * y)).max(sp2_residual(&inv))
    }));
    b.below("isometry.sp2_closure", "Sp(2) closed under products and inverses", closure, 1e-8, "");
    let not_sp = least(su.iter().map(sp2_residual));
    b.above("isometry.su4_not_sp2", "plumbing", not_sp, 1e-6, "random SU(4) elements lie outside Sp(2)");

    let metric_as: Vec<f64> = cfg.a_values.iter().cloned().filter(|a| *a != 1.0).collect();
    for &a in &metric_as {
        let r = worst(
            sp.par_iter()
                .enumerate()
                .map(|(k, m)| isometry_residual(&IsometryElement::new(*m, false), a, n, cfg.seed.wrapping_add(k as u64)))
                .collect::<Vec<_>>(),
        );
        b.below(format!("isometry.sp2_preserves_metric.{}", a_label(a)), "Sp(2) acts by isometries of g_a", r, 1e-8, format!("{ISO_ELEMENTS} elements"));
    }
    let st: Vec<_> = sp
        .par_iter()
        .enumerate()
        .map(|(k, m)| {
            let id = structure_transport(&IsometryElement::new(*m, false), n, cfg.seed.wrapping_add(k as u64));
            let conj = structure_transport(&IsometryElement::new(*m, true), n, cfg.seed.wrapping_add(k as u64));
            (id, conj)
        })
        .collect();
    let mut p_res: f64 = 0.0;
    let mut j_id: f64 = 0.0;
    let mut j_conj: f64 = 0.0;
    let mut signs = (0, 0);
    for (id, conj) in &st {
        match (id, conj) {
            (Ok(i), Ok(c)) => {
                p_res = p_res.max(i.p_residual).max(c.p_residual);
                j_id = j_id.max(if i.j_sign == 1 { i.j_residual } else { f64::INFINITY });
                j_conj = j_conj.max(if c.j_sign == -1 { c.j_residual } else { f64::INFINITY });
                signs.0 += (i.j_sign == 1) as usize;
                signs.1 += (c.j_sign == -1) as usize;
            }
            _ => {
                p_res = f64::INFINITY;
            }
        }
    }
    b.below("isometry.preserves_p", "isometries preserve the almost product structure P", p_res, 1e-8, "both components");
    b.below("isometry.j_sign_identity", "J is preserved on the identity component", j_id, 1e-8, format!("{}/{ISO_ELEMENTS} report J_sign = +1", signs.0));
    b.below("isometry.j_sign_conjugation", "J is reversed on the conjugation component", j_conj, 1e-8, format!("{}/{ISO_ELEMENTS} report J_sign = -1", signs.1));
    let conj_iso = worst(
        sp.par_iter()
            .enumerate()
            .map(|(k, m)| isometry_residual(&IsometryElement::new(*m, true), 2.0, n, cfg.seed.wrapping_add(k as u64)))
            .collect::<Vec<_>>(),
    );
    b.below("isometry.conjugation_component", "conjugation composed with Sp(2) is an isometry of g_2", conj_iso, 1e-8, "");

    let su_res: Vec<(f64, f64)> = su
        .par_iter()
        .enumerate()
        .map(|(k, m)| {
            let el = IsometryElement::new(*m, false);
            let s = cfg.seed.wrapping_add(k as u64);
            (isometry_residual(&el, 2.0, n, s), isometry_residual(&el, 1.0, n, s))
        })
        .collect();
    b.above(
        "isometry.su4_breaks_g2",
        "isometries of g_a, a != 1, are exactly the P-preserving Fubini-Study isometries",
        least(su_res.iter().map(|r| r.0)),
        1e-3,
        format!("minimum over {ISO_ELEMENTS} SU(4) elements outside Sp(2)"),
    );
    b.below("isometry.su4_fubini_study", "every SU(4) element is an isometry of g_1", worst(su_res.iter().map(|r| r.1)), 1e-9, "");
}

// ---------------------------------------------------------------------------
// lagrangian

fn lagrangian_suite(b: &mut Builder, notes: &mut Vec<String>, cfg: &SuiteConfig, entry: &CatalogEntry) {
    let name = entry.name;
    let imm = &entry.immersion;
    let exp = &entry.expected;
    let id = |s: &str| format!("lagrangian.{name}.{s}");
    let c = cfg.connection();
    let samples = match imm.admissible_samples(cfg.seed, cfg.samples) {
        Ok(s) => s,
        Err(e) => {
            b.failed(id("samples"), "admissible samples", &e);
            return;
        }
    };

    struct Sample {
        u: Params,
        chart_norm: f64,
        smin: f64,
        lag: f64,
        ab: [f64; 4],
        theta: f64,
        an: LagrangianAnalysis,
        spread: f64,
        fs: Option<(f64, f64)>,
    }

    let computed: Vec<Result<Sample>> = samples
        .par_iter()
        .enumerate()
        .map(|(k, u)| {
            let chart_norm = (imm.chart(u).norm() - 1.0).abs();
            let smin = min_singular_value(imm, u)?;
            let (_, lag) = is_lagrangian(imm, u, crate::lagrangian::LAGRANGIAN_TOL)?;
            let ab = ab_tensors(imm, u)?.residuals();
            let theta = angle(imm, u)?;
            let an = analyze(imm, u, &c)?;
            let spread = an.sectional_spread(cfg.seed.wrapping_add(k as u64), PLANES);
            let fs = match exp.mean_curvature_fs {
                Some(_) => {
                    let sff = second_fundamental_form(imm, u, MetricChoice::FubiniStudy, &c)?;
                    let q = an.q();
                    let je1 = nk_j(&q, &an.frame.e[0].vec);
                    let coef = metric_vec(2.0, &q, &sff.mean.vec, &je1);
                    let cross = sff.mean.vec - je1 * coef;
                    Some((coef, g_norm(2.0, &q, &cross)))
                }
                None => None,
            };
            Ok(Sample { u: *u, chart_norm, smin, lag, ab, theta, an, spread, fs })
        })
        .collect();
    let s: Vec<Sample> = match computed.into_iter().collect::<Result<Vec<_>>>() {
        Ok(s) => s,
        Err(e) => {
            b.failed(id("analysis"), "local analysis at admissible samples", &e);
            return;
        }
    };
    let ns = s.len();

    b.below(id("chart_on_sphere"), "plumbing", worst(s.iter().map(|x| x.chart_norm)), 1e-10, "");
    b.above(id("immersion_rank"), "plumbing", least(s.iter().map(|x| x.smin)), 1e-6, "minimum singular value of the horizontal Jacobian");
    b.below(id("lagrangian"), "J maps tangent spaces to normal spaces: max |g(X_i, J X_j)|", worst(s.iter().map(|x| x.lag)), 1e-7, format!("{ns} samples"));
    b.below(id("minimal"), "Lagrangians of the nearly Kaehler CP^3 are minimal: |H| in g_2", worst(s.iter().map(|x| x.an.sff.mean_norm())), 1e-5, "trace normalization");
    b.below(id("cubic_form_symmetric"), "g(h(X,Y), JZ) is totally symmetric", worst(s.iter().map(|x| x.an.sff.cubic_symmetry_residual())), 1e-5, "");
    b.below(id("ab_symmetry"), "A symmetric and B skew", worst(s.iter().map(|x| x.ab[0].max(x.ab[1]))), 1e-8, "");
    b.below(id("ab_algebra"), "AB + BA = 0 and A^2 - B^2 = id", worst(s.iter().map(|x| x.ab[2].max(x.ab[3]))), 1e-7, "");

    let thetas: Vec<f64> = s.iter().map(|x| x.theta).collect();
    let th_tol = if name == "ehl" { 1e-5 } else { 1e-6 };
    b.below(
        id("angle"),
        "angle function value",
        worst(thetas.iter().map(|t| (t - exp.theta).abs())),
        th_tol,
        format!("expected {:.10}, mean {:.10}", exp.theta, mean(&thetas)),
    );
    b.below(id("angle_constant"), "angle function is constant", std_dev(&thetas), 1e-5, "standard deviation over samples");

    b.below(id("frame_g_normal_form"), "G(e_i, e_j) = sum_k eps_ijk J e_k in the canonical frame", worst(s.iter().map(|x| x.an.frame.g_residual())), 1e-5, "");
    b.below(id("frame_e1_in_d2"), "e_1 lies in D2", worst(s.iter().map(|x| x.an.frame.e1_d24_residual())), 1e-7, "");
    b.below(
        id("frame_uw"),
        "e_2 = cos(theta) W + sin(theta) U with W = -Phi_U e_1",
        worst(s.iter().map(|x| {
            let (r1, r2) = x.an.frame.uw_residuals();
            r1.max(r2)
        })),
        1e-5,
        "Phi sign -1",
    );
    b.below(
        id("frame_normal_form"),
        "A e_1 = e_1, A e_2 = cos(2 theta) e_2, B e_2 = -sin(2 theta) e_3",
        worst(s.iter().map(|x| worst(x.an.frame.normal_form_residuals()))),
        1e-7,
        "",
    );
    b.below(id("frame_derivatives"), "plumbing", worst(s.iter().map(|x| x.an.frame_consistency_residual())), 1e-5, "normal part of the differentiated canonical frame equals h");
    b.below(
        id("normal_curvature"),
        "R^perp(X,Y) JZ = (nabla^perp G)(X,Y,Z) - (nabla^perp G)(Y,X,Z) + J R^L(X,Y) Z",
        worst(s.iter().map(|x| x.an.normal_curvature_residual())),
        1e-4,
        "Ricci equation against the ambient curvature",
    );
    b.below(
        id("cyclic_nabla_g"),
        "cyclic identity for nabla^perp G contracted with h",
        worst(s.iter().map(|x| x.an.cyclic_nabla_g_residual())),
        1e-4,
        "",
    );

    let spread = least(s.iter().map(|x| x.spread));
    b.above(
        id("not_constant_curvature"),
        "no Lagrangian of the nearly Kaehler CP^3 has constant sectional curvature",
        spread,
        0.1,
        format!("minimum over samples of the sectional spread over {PLANES} random planes"),
    );
    let constant: Vec<&Sample> = s.iter().filter(|x| x.spread < CONSTANT_CURVATURE_TOL).collect();
    if !constant.is_empty() {
        b.below(
            id("cyclic_constant_curvature"),
            "cyclic second fundamental form condition for constant sectional curvature",
            worst(constant.iter().map(|x| x.an.constant_curvature_identity_residual())),
            1e-4,
            format!("{} constant-curvature samples", constant.len()),
        );
    }

    let inv: Vec<Vec<f64>> = s
        .iter()
        .map(|x| {
            let mut v = x.an.homogeneity_invariants().to_vec();
            if x.an.frame.regime != AngleRegime::Zero {
                let mut h: Vec<f64> = x.an.sff.h.iter().flatten().flatten().cloned().collect();
                h.sort_by(f64::total_cmp);
                v.extend(h);
            }
            v
        })
        .collect();
    let width = inv.iter().map(Vec::len).min().unwrap_or(0);
    let hom = worst((0..width).map(|k| std_dev(&inv.iter().map(|v| v[k]).collect::<Vec<_>>())));
    b.below(
        id("homogeneous_invariants"),
        "extrinsically homogeneous: pointwise invariants are constant",
        hom,
        1e-4,
        "theta, |h|^2, Ricci eigenvalues, scalar curvature, and the h components when the canonical frame is rigid",
    );

    if exp.totally_geodesic {
        b.below(id("totally_geodesic"), "totally geodesic", worst(s.iter().map(|x| x.an.sff.h.iter().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs())))), 1e-6, "max |h^k_ij|");
    }
    if exp.theta == 0.0 {
        let bmax = worst(s.iter().map(|x| x.an.frame.b.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
        b.below(id("b_vanishes"), "B = 0 when the angle vanishes", bmax, 1e-7, "");
    }
    if let Some(h111) = exp.h111 {
        b.below(
            id("h111"),
            "h^1_11 = 1 for S^2 x S^1 and -1/2 for the Berger sphere",
            worst(s.iter().map(|x| (x.an.sff.h[0][0][0] - h111).abs())),
            1e-4,
            format!("expected {h111}"),
        );
        b.below(id("quarter_pi_pattern"), "second fundamental form pattern at angle pi/4", worst(s.iter().map(|x| quarter_pi_pattern(&x.an.sff.h))), 1e-4, "h^1_22 = h^1_33 = -h^1_11/2, others vanish up to symmetry");
        b.below(
            id("quarter_pi_omega"),
            "connection form omega^2_31 = (h^1_11 - 1)/2 at angle pi/4",
            worst(s.iter().map(|x| x.an.sff.omega.map_or(f64::NAN, |om| (om[1][2][0] - (h111 - 1.0) / 2.0).abs()))),
            1e-4,
            "",
        );
        debug_assert!((exp.theta - FRAC_PI_4).abs() < 1e-15);
    }
    if let Some(lengths) = exp.berger_lengths {
        let r = worst(s.iter().map(|x| {
            let l = berger_lengths(&x.u);
            worst((0..3).map(|k| (l[k] - lengths[k]).abs()))
        }));
        b.below(id("berger_lengths"), "Berger sphere: g(E_1, E_1) = 4/9, g(E_2, E_2) = g(E_3, E_3) = 8/9", r, 1e-9, "squared-length reading");
        b.below(id("berger_x1"), "plumbing", worst(s.iter().map(|x| berger_x1_residual(&x.u))), 1e-10, "left-invariant field X_1 along the chart");
        notes.push(
            "berger: the stated relation 2 sqrt(g1(E1,E1)) = sqrt(g(E1,E1)) = 4/9 is inconsistent as written; \
             verified reading: g(E1,E1) = 4/9, g(E2,E2) = g(E3,E3) = 8/9"
                .into(),
        );
    }
    if let Some(sec) = exp.sectional {
        let r = worst(s.iter().map(|x| {
            let c = x.an.curvature();
            worst((0..3).map(|k| (c.sectional[k] - sec[k]).abs()))
        }));
        b.below(id("sectional"), "sec(e1,e2) = 0.09(6 sqrt15 - 11), sec(e1,e3) = -0.09(6 sqrt15 + 11), sec(e2,e3) = 2.07", r, 1e-3, "");
    }
    if let Some(ric) = exp.ricci_diag {
        let r = worst(s.iter().map(|x| {
            let c = x.an.curvature();
            worst((0..3).map(|k| (c.ricci[(k, k)] - ric[k]).abs()))
        }));
        b.below(id("ricci"), "Ric(e1,e1) = -99/50, Ric(e2,e2) = 27/50(sqrt15 + 2), Ric(e3,e3) = -27/50(sqrt15 - 2)", r, 1e-3, "");
    }
    if let Some(hfs) = exp.mean_curvature_fs {
        let coef = worst(s.iter().map(|x| x.fs.map_or(f64::NAN, |(c, _)| (c - hfs).abs())));
        let cross = worst(s.iter().map(|x| x.fs.map_or(f64::NAN, |(_, r)| r)));
        b.below(id("mean_curvature_fs"), "Fubini-Study mean curvature H = (224/61) sqrt(2/5) J e1", coef, 1e-3, "coefficient g_2(H, J e1), trace normalization");
        b.below(id("mean_curvature_fs_cross"), "Fubini-Study mean curvature is parallel to J e1", cross, 1e-3, "g_2-norm of the component orthogonal to J e1");
    }
    if name == "ehl" {
        b.below(
            id("sectional_reconstruction"),
            "sec(X,Y) = 1/2 sum_{i != j} sec(e_i, e_j) g(G(e_i,e_j), G(X,Y))^2",
            worst(s.iter().enumerate().map(|(k, x)| x.an.reconstruction_residual(cfg.seed.wrapping_add(k as u64), PLANES))),
            1e-3,
            "",
        );
        ehl_group_checks(b, cfg, &s.iter().map(|x| x.u).collect::<Vec<_>>());
        notes.push(format!(
            "ehl: the angle arctan(7/sqrt(76 + 15 sqrt15)) evaluates to {:.7}; the rounded value 0.5440 quoted alongside it is not used",
            catalog::ehl_expected_theta()
        ));
    }
}

/// Deviation of `h` from the pattern at angle pi/4: `h^1_11 = c`,
/// `h^1_22 = h^1_33 = h^2_12 = h^3_13 = -c/2` (with symmetric copies), all else 0.
fn quarter_pi_pattern(h: &[[[f64; 3]; 3]; 3]) -> f64 {
    let c = h[0][0][0];
    let mut r: f64 = 0.0;
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let mut idx = [k, i, j];
                idx.sort();
                let want = match idx {
                    [0, 0, 0] => c,
                    [0, 1, 1] | [0, 2, 2] => -c / 2.0,
                    _ => 0.0,
                };
                r = r.max((h[k][i][j] - want).abs());
            }
        }
    }
    r
}

fn ehl_group_checks(b: &mut Builder, cfg: &SuiteConfig, us: &[Params]) {
    let id = |s: &str| format!("lagrangian.ehl.{s}");
    let mut rng = sample_rng(cfg.seed ^ 0xE41, 0);
    let draws: Vec<(f64, f64, f64)> = (0..10).map(|_| (rng.random::<f64>() * 2.0 * PI, rng.random::<f64>() * PI, rng.random::<f64>() * 2.0 * PI)).collect();
    let alg = worst(draws.iter().map(|&(_, a, bb)| {
        let (skew, sp) = m_algebra_residuals(a, bb);
        skew.max(sp)
    }));
    b.below(id("m_in_sp2_algebra"), "M(alpha, beta) lies in sp(2)", alg, 1e-9, "");
    let spec = worst(draws.iter().map(|&(_, a, bb)| {
        let ev = m_eigenvalues(a, bb);
        if ev.len() != 4 {
            return f64::INFINITY;
        }
        worst(ev.iter().zip([-3.0, -1.0, 1.0, 3.0]).map(|(z, t)| (*z - C64::new(0.0, t)).norm()))
    }));
    b.below(id("m_spectrum"), "M(alpha, beta) has eigenvalues +-i, +-3i", spec, 1e-9, "");
    let per = worst(draws.iter().map(|&(_, a, bb)| {
        let full = exp_m(2.0 * PI, a, bb).0 - Mat4::identity();
        let zero = exp_m(0.0, a, bb).0 - Mat4::identity();
        full.iter().chain(zero.iter()).fold(0.0f64, |m, z| m.max(z.norm()))
    }));
    b.below(id("exp_periodic"), "exp(2 pi M) = id and exp(0) = id", per, 1e-9, "");
    let orc = worst(draws.iter().map(|&(t, a, bb)| {
        let oracle = (m_matrix(a, bb) * C64::new(t, 0.0)).exp();
        (exp_m(t, a, bb).0 - oracle).iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }));
    b.below(id("exp_closed_form"), "plumbing", orc, 1e-9, "closed-form exponential against scaling and squaring");
    let grp = worst(draws.iter().map(|&(t, a, bb)| {
        let g = exp_m(t, a, bb).0;
        if is_sp2(&g) { sp2_residual(&g) } else { f64::INFINITY }
    }));
    b.below(id("exp_in_sp2"), "exp(t M) lies in Sp(2)", grp, 1e-9, "");
    let orbit = worst(
        draws
            .par_iter()
            .enumerate()
            .map(|(k, &(t, a, bb))| ehl_orbit_residual(&us[k % us.len()], t, a, bb))
            .collect::<Vec<_>>(),
    );
    b.below(id("orbit"), "the image is invariant under exp(s M(alpha, beta))", orbit, 1e-6, "moved chart points re-solved on the chart by Gauss-Newton");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        let x = 0.1 + 0.2;
        let v = num(x);
        let s = v.to_string();
        assert_eq!(s, "3.0000000000000004e-1");
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
        assert_eq!(num(f64::NAN), Value::String("NaN".into()));
    }

    #[test]
    fn worst_propagates_nan() {
        assert_eq!(worst([1.0, 3.0, 2.0]), 3.0);
        assert!(worst([1.0, f64::NAN, 2.0]).is_nan());
        assert!(least([1.0, f64::NAN]).is_nan());
        assert_eq!(least([4.0, 0.5]), 0.5);
    }

    #[test]
    fn suite_names_round_trip() {
        for n in suite_names() {
            assert_eq!(n.parse::<SuiteName>().unwrap().to_string(), n);
        }
        assert!("lagrangian:torus".parse::<SuiteName>().is_err());
        assert!("Curvature".parse::<SuiteName>().is_err());
    }

    #[test]
    fn builder_semantics() {
        let mut b = Builder::new(2.0);
        b.below("x", "plumbing", 1.5, 1.0, "");
        b.above("y", "plumbing", 0.2, 0.1, "");
        b.above("z", "plumbing", 0.1, 0.1, "");
        b.below("w", "plumbing", f64::NAN, 1.0, "");
        let pass: Vec<bool> = b.items.iter().map(|i| i.pass).collect();
        assert_eq!(pass, [true, true, false, false]);
        assert_eq!(b.items[0].tolerance, 2.0);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            SuiteConfig { a_values: vec![], ..Default::default() },
            SuiteConfig { a_values: vec![-1.0], ..Default::default() },
            SuiteConfig { samples: 0, ..Default::default() },
            SuiteConfig { tol_scale: 0.0, ..Default::default() },
            SuiteConfig { fd_step: 0.5, ..Default::default() },
        ];
        for cfg in bad {
            assert!(run_suite("curvature", &cfg).is_err(), "{cfg:?}");
        }
        assert!(run_suite("nope", &SuiteConfig::default()).is_err());
    }

    #[test]
    fn quarter_pi_pattern_detects_deviation() {
        let mut h = [[[0.0; 3]; 3]; 3];
        h[0][0][0] = 1.0;
        for (k, i, j) in [(0, 1, 1), (0, 2, 2), (1, 0, 1), (1, 1, 0), (2, 0, 2), (2, 2, 0)] {
            h[k][i][j] = -0.5;
        }
        assert_eq!(quarter_pi_pattern(&h), 0.0);
        h[1][2][2] = 1e-3;
        assert_eq!(quarter_pi_pattern(&h), 1e-3);
    }
}
