//! Contact frames `(E1, ..., E6)` built from a unit `U` in D1 and a unit
//! `chi` in D2, together with the structures `Phi`, `Psi` and the one-form
//! `sigma`.
//!
//! With `U = alpha jq + beta kq` write `u = alpha j + beta k`. Then
//! `Phi = -L(i u)` and `Psi = -L(u)` on D2 (left quaternion multiplication),
//! both vanishing on D1. This sign makes the derivative relations for `U`
//! and `V` hold simultaneously; it forces `Psi = -J1 Phi`.

use crate::ambient::{real_inner, AmbientVector, SpherePoint};
use crate::connection::{nabla_point, ConnectionConfig};
use crate::error::{GeomError, Result};
use crate::hopf::{align, d12, d24, horizontal, TangentRep};

/// Sign of `Phi` relative to left multiplication by `i u`.
pub const PHI_SIGN: f64 = -1.0;

/// Tolerance for unit length and distribution membership of the inputs.
pub const INPUT_TOL: f64 = 1e-9;

/// `u = alpha j + beta k` acting from the left.
fn left_u(coef: (f64, f64), w: &AmbientVector) -> AmbientVector {
    w.j() * coef.0 + w.k() * coef.1
}

/// `i u` acting from the left.
fn left_iu(coef: (f64, f64), w: &AmbientVector) -> AmbientVector {
    w.k() * coef.0 - w.j() * coef.1
}

pub fn phi_vec(q: &AmbientVector, coef: (f64, f64), w: &AmbientVector) -> AmbientVector {
    left_iu(coef, &d24(q, w)) * PHI_SIGN
}

pub fn psi_vec(q: &AmbientVector, coef: (f64, f64), w: &AmbientVector) -> AmbientVector {
    left_u(coef, &d24(q, w)) * PHI_SIGN
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactFrame {
    pub q: SpherePoint,
    /// `e[0] = E1 = V`, `e[1] = E2 = U`, `e[2] = E3 = chi`, `e[3] = J1 chi`,
    /// `e[4] = Phi chi`, `e[5] = Psi chi`.
    pub e: [AmbientVector; 6],
    /// Coordinates of `U` on `(jq, kq)`.
    pub u_coef: (f64, f64),
    /// Metric parameter for which the frame is orthonormal.
    pub a: f64,
}

impl ContactFrame {
    fn build(q: SpherePoint, u_coef: (f64, f64), chi: AmbientVector) -> Self {
        let u = q.j() * u_coef.0 + q.k() * u_coef.1;
        let e = [
            u.i(),
            u,
            chi,
            chi.i(),
            phi_vec(&q, u_coef, &chi),
            psi_vec(&q, u_coef, &chi),
        ];
        ContactFrame { q, e, u_coef, a: 1.0 }
    }

    pub fn tangent(&self, k: usize) -> TangentRep {
        TangentRep::new_unchecked(self.q, self.e[k])
    }

    pub fn u(&self) -> AmbientVector {
        self.e[1] * self.a_scale_inv(1)
    }

    pub fn v(&self) -> AmbientVector {
        self.e[0] * self.a_scale_inv(0)
    }

    fn a_scale_inv(&self, k: usize) -> f64 {
        if k >= 2 {
            self.a.sqrt()
        } else {
            1.0
        }
    }

    pub fn phi(&self, w: &AmbientVector) -> AmbientVector {
        phi_vec(&self.q, self.u_coef, w)
    }

    pub fn psi(&self, w: &AmbientVector) -> AmbientVector {
        psi_vec(&self.q, self.u_coef, w)
    }

    /// The one-forms `u = g1(U, .)` and `v = g1(V, .)`.
    pub fn u_form(&self, w: &AmbientVector) -> f64 {
        real_inner(&self.u(), w)
    }

    pub fn v_form(&self, w: &AmbientVector) -> f64 {
        real_inner(&self.v(), w)
    }
}

/// Builds the contact frame from `U` in D1 and `chi` in D2, both g1-unit.
pub fn contact_frame(q: &SpherePoint, u_lift: &TangentRep, chi_lift: &TangentRep) -> Result<ContactFrame> {
    let here = TangentRep::new_unchecked(*q, AmbientVector::ZERO);
    let u = align(&here, u_lift)?.vec;
    let chi = align(&here, chi_lift)?.vec;
    for (name, w) in [("U", u), ("chi", chi)] {
        if (w.norm() - 1.0).abs() > INPUT_TOL {
            return Err(GeomError::InvalidInput(format!("{name} is not g1-unit")));
        }
    }
    let off_u = (u - d12(q, &u)).norm();
    if off_u > INPUT_TOL {
        return Err(GeomError::InvalidInput(format!("U leaves D1 by {off_u:e}")));
    }
    let off_chi = (chi - d24(q, &horizontal(q, &chi))).norm();
    if off_chi > INPUT_TOL {
        return Err(GeomError::InvalidInput(format!("chi leaves D2 by {off_chi:e}")));
    }
    let coef = (real_inner(&u, &q.j()), real_inner(&u, &q.k()));
    Ok(ContactFrame::build(*q, coef, chi))
}

/// Rescales `E3..E6` by `1/sqrt(a)`, giving a g_a-orthonormal frame.
pub fn normalized_frame(frame: &ContactFrame, a: f64) -> ContactFrame {
    let base = ContactFrame::build(frame.q, frame.u_coef, frame.e[2] * frame.a.sqrt());
    let s = 1.0 / a.sqrt();
    let mut e = base.e;
    for v in e.iter_mut().skip(2) {
        *v = *v * s;
    }
    ContactFrame { e, a, ..base }
}

/// A smooth extension of a contact frame to nearby lifts.
///
/// `U(p) = alpha(p) jp + beta(p) kp` where `(alpha, beta)` is the base pair
/// rotated by the angle `<p - q, twist>`, and `chi(p)` is the normalized D2
/// part of the horizontalized base `chi`. With zero twist, `sigma` vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameExtension {
    pub base: ContactFrame,
    pub twist: AmbientVector,
}

impl FrameExtension {
    pub fn new(base: ContactFrame) -> Self {
        let base = if base.a == 1.0 { base } else { normalized_frame(&base, 1.0) };
        FrameExtension { base, twist: AmbientVector::ZERO }
    }

    pub fn with_twist(mut self, twist: AmbientVector) -> Self {
        self.twist = twist;
        self
    }

    pub fn at(&self, p: &AmbientVector) -> ContactFrame {
        let ang = real_inner(&(*p - *self.base.q.vec()), &self.twist);
        let (c, s) = (ang.cos(), ang.sin());
        let (al, be) = self.base.u_coef;
        let coef = (c * al - s * be, s * al + c * be);
        let chi = d24(p, &horizontal(p, &self.base.e[2])).normalized();
        // `p` is only ever a normalized curve point
        ContactFrame::build(SpherePoint::from_unnormalized(*p).expect("finite point"), coef, chi)
    }

    /// `nabla^1_X E_k` at the base point.
    pub fn nabla_e(&self, x: &AmbientVector, k: usize, cfg: &ConnectionConfig) -> AmbientVector {
        nabla_point(1.0, self.base.q.vec(), x, |p| self.at(p).e[k], cfg)
    }
}

/// `sigma(X) = g1(nabla^1_X U, V)` for the extension's `U` field.
pub fn sigma(x: &TangentRep, ext: &FrameExtension, cfg: &ConnectionConfig) -> Result<f64> {
    let here = TangentRep::new_unchecked(ext.base.q, AmbientVector::ZERO);
    let x = align(&here, x)?.vec;
    Ok(real_inner(&ext.nabla_e(&x, 1, cfg), &ext.base.v()))
}

/// Residuals of the algebraic and differential relations of the complex
/// contact structure at one pair `(X, Y)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ContactResiduals {
    /// `Phi^2 = Psi^2 = -id + u (x) U + v (x) V`.
    pub squares: f64,
    /// `Phi`, `Psi` are g1-skew.
    pub skew: f64,
    /// `Phi J1 = -J1 Phi`.
    pub anticommute: f64,
    /// `(J1, Psi, Phi)` multiply like `(i, j, k)` on D2.
    pub quaternion: f64,
    /// `nabla_X U = -Psi X + sigma(X) V`.
    pub nabla_u: f64,
    /// `nabla_X V = -Phi X - sigma(X) U`.
    pub nabla_v: f64,
    /// Derivative of `Psi` (model-consistent signs, see [`nabla_psi_expected`]).
    pub nabla_psi: f64,
    /// Derivative of `Phi` (model-consistent signs, see [`nabla_phi_expected`]).
    pub nabla_phi: f64,
}

impl ContactResiduals {
    pub fn max_algebraic(&self) -> f64 {
        self.squares.max(self.skew).max(self.anticommute).max(self.quaternion)
    }

    pub fn max_differential(&self) -> f64 {
        self.nabla_u.max(self.nabla_v).max(self.nabla_psi).max(self.nabla_phi)
    }
}

/// Expected `(nabla^1_X Psi) Y` given `sigma(X)`:
/// `g1(X,Y) U - u(Y) X + g1(X, J1 Y) V + v(Y) J1 X + sigma(X) Phi Y`.
pub fn nabla_psi_expected(f: &ContactFrame, x: &AmbientVector, y: &AmbientVector, sig: f64) -> AmbientVector {
    f.u() * real_inner(x, y) - *x * f.u_form(y) + f.v() * real_inner(x, &y.i()) + x.i() * f.v_form(y)
        + f.phi(y) * sig
}

/// Expected `(nabla^1_X Phi) Y` given `sigma(X)`:
/// `g1(X,Y) V - v(Y) X - g1(X, J1 Y) U - u(Y) J1 X - sigma(X) Psi Y`.
pub fn nabla_phi_expected(f: &ContactFrame, x: &AmbientVector, y: &AmbientVector, sig: f64) -> AmbientVector {
    f.v() * real_inner(x, y) - *x * f.v_form(y) - f.u() * real_inner(x, &y.i()) - x.i() * f.u_form(y)
        - f.psi(y) * sig
}

pub fn contact_residuals(ext: &FrameExtension, x: &AmbientVector, y: &AmbientVector, cfg: &ConnectionConfig) -> ContactResiduals {
    let f = &ext.base;
    let q = f.q.vec();
    let (u, v) = (f.u(), f.v());
    let proj = |w: &AmbientVector| -*w + u * f.u_form(w) + v * f.v_form(w);
    let squares = (f.phi(&f.phi(y)) - proj(y)).norm().max((f.psi(&f.psi(y)) - proj(y)).norm());
    let skew = (real_inner(x, &f.phi(y)) + real_inner(&f.phi(x), y))
        .abs()
        .max((real_inner(x, &f.psi(y)) + real_inner(&f.psi(x), y)).abs());
    let anticommute = (f.phi(&y.i()) + f.phi(y).i()).norm();
    let y2 = d24(q, y);
    let quaternion = (f.psi(&y2).i() - f.phi(&y2))
        .norm()
        .max((f.psi(&f.phi(&y2)) - y2.i()).norm())
        .max((f.phi(&y2.i()) - f.psi(&y2)).norm());

    let sig = real_inner(&ext.nabla_e(x, 1, cfg), &v);
    let nabla_u = (ext.nabla_e(x, 1, cfg) - (-f.psi(x) + v * sig)).norm();
    let nabla_v = (ext.nabla_e(x, 0, cfg) - (-f.phi(x) - u * sig)).norm();

    let field_y = |p: &AmbientVector| horizontal(p, y);
    let ny = nabla_point(1.0, q, x, field_y, cfg);
    let d_psi = nabla_point(1.0, q, x, |p| ext.at(p).psi(&field_y(p)), cfg) - f.psi(&ny);
    let d_phi = nabla_point(1.0, q, x, |p| ext.at(p).phi(&field_y(p)), cfg) - f.phi(&ny);
    ContactResiduals {
        squares,
        skew,
        anticommute,
        quaternion,
        nabla_u,
        nabla_v,
        nabla_psi: (d_psi - nabla_psi_expected(f, x, y, sig)).norm(),
        nabla_phi: (d_phi - nabla_phi_expected(f, x, y, sig)).norm(),
    }
}

/// Residuals of the frame-derivative relations along `E_1..E_6`:
/// `g1(zeta_i, E1) = -delta_i5`, `g1(zeta_i, E2) = -delta_i6`,
/// `g1(zeta_i, E3) = 0` with `zeta_i = nabla_{E_i} E3`, and
/// `nabla_{E_i} E5 = delta_i3 E1 - delta_i4 E2 - sigma_i E6 + Phi zeta_i`,
/// `nabla_{E_i} E6 = delta_i3 E2 + delta_i4 E1 + sigma_i E5 + Psi zeta_i`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FrameDerivativeResiduals {
    pub zeta_relations: f64,
    pub nabla_e5: f64,
    pub nabla_e6: f64,
}

pub fn frame_derivative_residuals(ext: &FrameExtension, cfg: &ConnectionConfig) -> FrameDerivativeResiduals {
    let f = &ext.base;
    let e = f.e;
    let mut out = FrameDerivativeResiduals::default();
    for i in 0..6 {
        let x = e[i];
        let delta = |k: usize| if i == k { 1.0 } else { 0.0 };
        let zeta = ext.nabla_e(&x, 2, cfg);
        let sig = real_inner(&ext.nabla_e(&x, 1, cfg), &e[0]);
        let z = (real_inner(&zeta, &e[0]) + delta(4))
            .abs()
            .max((real_inner(&zeta, &e[1]) + delta(5)).abs())
            .max(real_inner(&zeta, &e[2]).abs());
        out.zeta_relations = out.zeta_relations.max(z);
        let n5 = ext.nabla_e(&x, 4, cfg);
        let want5 = e[0] * delta(2) - e[1] * delta(3) - e[5] * sig + f.phi(&zeta);
        out.nabla_e5 = out.nabla_e5.max((n5 - want5).norm());
        let n6 = ext.nabla_e(&x, 5, cfg);
        let want6 = e[1] * delta(2) + e[0] * delta(3) + e[4] * sig + f.psi(&zeta);
        out.nabla_e6 = out.nabla_e6.max((n6 - want6).norm());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{random_sphere_point, AmbientVector as V, C64};
    use crate::hopf::{metric_vec, random_horizontal};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn base_frame() -> ContactFrame {
        let q = SpherePoint::new(V::basis(0)).unwrap();
        let u = TangentRep::new(q, V::basis(1)).unwrap();
        let chi = TangentRep::new(q, V::basis(2)).unwrap();
        contact_frame(&q, &u, &chi).unwrap()
    }

    #[test]
    fn base_configuration() {
        let f = base_frame();
        assert_eq!(f.e[0], V::basis(1).i());
        assert_eq!(f.e[3], V::basis(2).i());
        // Phi chi = -k chi, Psi chi = -j chi
        assert_eq!(f.e[4], V::basis(3).scale_c(C64::new(0.0, -1.0)));
        assert_eq!(f.e[5], -V::basis(3));
    }

    pub(crate) fn random_frame(seed: u64) -> ContactFrame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_sphere_point(seed);
        let t: f64 = rand::Rng::random(&mut rng);
        let u = q.j() * (6.0 * t).cos() + q.k() * (6.0 * t).sin();
        let chi = d24(&q, &random_horizontal(&mut rng, &q).vec).normalized();
        contact_frame(&q, &TangentRep::new(q, u).unwrap(), &TangentRep::new(q, chi).unwrap()).unwrap()
    }

    #[test]
    fn frame_is_orthonormal() {
        for s in 0..10 {
            let f = random_frame(s);
            for a in [1.0, 0.5, 2.0, 3.0] {
                let n = normalized_frame(&f, a);
                for i in 0..6 {
                    for j in 0..6 {
                        let g = metric_vec(a, &f.q, &n.e[i], &n.e[j]);
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((g - want).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn normalized_frame_scaling() {
        let f = random_frame(3);
        assert_eq!(normalized_frame(&f, 1.0).e, f.e);
        let n = normalized_frame(&f, 2.0);
        for k in 2..6 {
            assert!((n.e[k] - f.e[k] * std::f64::consts::FRAC_1_SQRT_2).norm() < 1e-15);
        }
        let back = normalized_frame(&n, 1.0);
        for k in 0..6 {
            assert!((back.e[k] - f.e[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn rejects_misplaced_inputs() {
        let q = SpherePoint::new(V::basis(0)).unwrap();
        let u = TangentRep::new(q, V::basis(1)).unwrap();
        let chi = TangentRep::new(q, V::basis(2)).unwrap();
        assert!(contact_frame(&q, &chi, &u).is_err());
        assert!(contact_frame(&q, &u.scale(2.0), &chi).is_err());
    }

    #[test]
    fn sigma_is_linear_and_vanishes_without_twist() {
        let cfg = ConnectionConfig::default();
        let f = random_frame(4);
        let ext = FrameExtension::new(f);
        let x = f.tangent(2);
        assert!(sigma(&x, &ext, &cfg).unwrap().abs() < 1e-9);
        let tw = FrameExtension::new(f).with_twist(f.e[2] * 0.7 + f.e[3] * 0.3);
        let s1 = sigma(&x, &tw, &cfg).unwrap();
        let s2 = sigma(&x.scale(2.0), &tw, &cfg).unwrap();
        assert!((s1 - 0.7).abs() < 1e-8);
        assert!((s2 - 2.0 * s1).abs() < 1e-8);
    }

    #[test]
    fn contact_relations_hold() {
        let cfg = ConnectionConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for s in 0..5 {
            let f = random_frame(10 + s);
            let tw = crate::ambient::gaussian_vector(&mut rng);
            let ext = FrameExtension::new(f).with_twist(tw);
            let x = random_horizontal(&mut rng, &f.q).vec;
            let y = random_horizontal(&mut rng, &f.q).vec;
            let r = contact_residuals(&ext, &x, &y, &cfg);
            assert!(r.max_algebraic() < 1e-12, "{r:?}");
            assert!(r.max_differential() < 1e-7, "{r:?}");
        }
    }

    #[test]
    fn frame_derivative_relations_hold() {
        let cfg = ConnectionConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for s in 0..3 {
            let f = random_frame(20 + s);
            let ext = FrameExtension::new(f).with_twist(crate::ambient::gaussian_vector(&mut rng));
            let r = frame_derivative_residuals(&ext, &cfg);
            assert!(r.zeta_relations.max(r.nabla_e5).max(r.nabla_e6) < 1e-7, "{r:?}");
        }
    }
}
