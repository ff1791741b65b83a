use cp3::ambient::{random_sphere_point, AmbientVector};
use cp3::catalog;
use cp3::connection::{d_a_vec, g_closed, g_numeric, ConnectionConfig};
use cp3::curvature::{riemann_closed_vec, scalar, scalar_trace, sectional_from_tensor, sectional_vec};
use cp3::hopf::{almost_product, d12, d24, gauge_transport, horizontal, metric_vec, nk_j, random_horizontal, TangentRep};
use cp3::isometry::{isometry_residual, random_sp2, sample_rng, sp2_residual, IsometryElement};
use cp3::lagrangian::{angle, is_lagrangian};
use proptest::prelude::*;

fn setup(seed: u64) -> (AmbientVector, [AmbientVector; 4]) {
    let q = random_sphere_point(seed);
    let mut rng = sample_rng(seed, 1);
    let v = [0; 4].map(|_| random_horizontal(&mut rng, &q).vec);
    (*q.vec(), v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn horizontal_projection_idempotent(seed in any::<u64>(), s in -3.0..3.0f64) {
        let (q, [x, ..]) = setup(seed);
        let w = x + q * s + q.i() * (2.0 * s);
        let h = horizontal(&q, &w);
        prop_assert!((horizontal(&q, &h) - h).norm() < 1e-12);
        prop_assert!((h - x).norm() < 1e-12);
        prop_assert!((d12(&q, &d24(&q, &x))).norm() < 1e-12);
    }

    #[test]
    fn structures_square_correctly(seed in any::<u64>(), a in 0.2..5.0f64) {
        let (q, [x, y, ..]) = setup(seed);
        prop_assert!((nk_j(&q, &nk_j(&q, &x)) + x).norm() < 1e-12);
        prop_assert!((almost_product(&q, &almost_product(&q, &x)) - x).norm() < 1e-12);
        prop_assert!((metric_vec(a, &q, &nk_j(&q, &x), &nk_j(&q, &y)) - metric_vec(a, &q, &x, &y)).abs() < 1e-11);
        prop_assert!(metric_vec(a, &q, &x, &x) > 0.0);
    }

    #[test]
    fn gauge_preserves_metric(seed in any::<u64>(), a in 0.2..5.0f64, th in 0.0..6.3f64) {
        let (q, [x, y, ..]) = setup(seed);
        let sp = cp3::SpherePoint::new(q).unwrap();
        let (gx, gy) = (gauge_transport(&TangentRep::new_unchecked(sp, x), th), gauge_transport(&TangentRep::new_unchecked(sp, y), th));
        prop_assert!((metric_vec(a, &gx.base, &gx.vec, &gy.vec) - metric_vec(a, &q, &x, &y)).abs() < 1e-11);
    }

    #[test]
    fn g_is_skew_and_anticommutes_with_j(seed in any::<u64>()) {
        let (q, [x, y, ..]) = setup(seed);
        prop_assert!((g_closed(&q, &x, &y) + g_closed(&q, &y, &x)).norm() < 1e-12);
        prop_assert!((g_closed(&q, &x, &nk_j(&q, &y)) + nk_j(&q, &g_closed(&q, &x, &y))).norm() < 1e-11);
        let gxy = g_closed(&q, &x, &y);
        prop_assert!(metric_vec(2.0, &q, &gxy, &x).abs() < 1e-11);
    }

    #[test]
    fn difference_tensor_is_symmetric(seed in any::<u64>(), a in 0.2..5.0f64) {
        let (q, [x, y, ..]) = setup(seed);
        prop_assert!((d_a_vec(a, &q, &x, &y) - d_a_vec(a, &q, &y, &x)).norm() < 1e-11);
    }

    #[test]
    fn curvature_symmetries(seed in any::<u64>(), a in 0.2..5.0f64) {
        let (q, [x, y, z, w]) = setup(seed);
        let r = |x: &AmbientVector, y: &AmbientVector, z: &AmbientVector| riemann_closed_vec(a, &q, x, y, z);
        let g = |u: &AmbientVector, v: &AmbientVector| metric_vec(a, &q, u, v);
        let scale = 1.0 + x.norm() * y.norm() * z.norm() * (1.0 + w.norm());
        prop_assert!((r(&x, &y, &z) + r(&y, &x, &z)).norm() < 1e-11 * scale);
        prop_assert!((r(&x, &y, &z) + r(&y, &z, &x) + r(&z, &x, &y)).norm() < 1e-10 * scale);
        prop_assert!((g(&r(&x, &y, &z), &w) - g(&r(&z, &w, &x), &y)).abs() < 1e-10 * scale);
    }

    #[test]
    fn scalar_curvature_is_the_trace(seed in any::<u64>(), a in 0.2..5.0f64) {
        let (q, _) = setup(seed);
        prop_assert!((scalar_trace(a, &q) - scalar(a)).abs() < 1e-9 * (1.0 + scalar(a).abs()));
    }

    #[test]
    fn sectional_formula_matches_tensor(seed in any::<u64>(), a in 0.2..5.0f64) {
        let (q, [x, y, ..]) = setup(seed);
        let n = |v: AmbientVector| v * (1.0 / metric_vec(a, &q, &v, &v).sqrt());
        let ux = n(x);
        let uy = n(y - ux * metric_vec(a, &q, &y, &ux));
        prop_assert!((sectional_vec(a, &q, &ux, &uy) - sectional_from_tensor(a, &q, &ux, &uy)).abs() < 1e-9);
    }

    #[test]
    fn sp2_acts_isometrically(seed in any::<u64>(), a in 0.2..5.0f64, eps in any::<bool>()) {
        let m = random_sp2(seed);
        prop_assert!(sp2_residual(&m) < 1e-9);
        prop_assert!(isometry_residual(&IsometryElement::new(m, eps), a, 4, seed) < 1e-9);
    }

    #[test]
    fn catalog_samples_are_lagrangian_with_constant_angle(seed in any::<u64>(), k in 0usize..5) {
        let e = catalog::entry(catalog::NAMES[k]).unwrap();
        for u in e.immersion.admissible_samples(seed, 2).unwrap() {
            let (ok, r) = is_lagrangian(&e.immersion, &u, 1e-7).unwrap();
            prop_assert!(ok, "{} {r:e}", e.name);
            prop_assert!((angle(&e.immersion, &u).unwrap() - e.expected.theta).abs() < 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn numeric_g_matches_closed_form(seed in any::<u64>()) {
        let (q, [x, y, ..]) = setup(seed);
        prop_assert!((g_numeric(&q, &x, &y, &ConnectionConfig::default()) - g_closed(&q, &x, &y)).norm() < 1e-5);
    }
}
