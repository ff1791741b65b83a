use std::collections::HashSet;

use cp3::report::{list_checks, run_suite, suite_names, SuiteConfig};

fn quick() -> SuiteConfig {
    SuiteConfig { samples: 4, ..SuiteConfig::default() }
}

#[test]
fn every_suite_passes_at_low_sampling() {
    for name in suite_names() {
        let r = run_suite(&name, &quick()).unwrap();
        assert!(!r.items.is_empty(), "{name}");
        let failed: Vec<_> = r.failures().map(|i| &i.check_id).collect();
        assert!(failed.is_empty(), "{name}: {failed:?}");
    }
}

#[test]
fn check_ids_are_unique_and_described() {
    let checks = list_checks("all", &SuiteConfig::default()).unwrap();
    let ids: HashSet<&String> = checks.iter().map(|c| &c.0).collect();
    assert_eq!(ids.len(), checks.len());
    assert!(checks.iter().all(|(_, what)| !what.is_empty()));
}

#[test]
fn documented_examples() {
    let r = run_suite("curvature", &quick()).unwrap();
    let it = r.item("curvature.scalar_value.a=2").unwrap();
    assert!(it.pass && it.residual == 0.0);
    let r = run_suite("lagrangian:rp3", &quick()).unwrap();
    assert!(r.item("lagrangian.rp3.totally_geodesic").unwrap().pass);
}

#[test]
fn same_seed_same_bytes() {
    let cfg = SuiteConfig { seed: 1, ..quick() };
    let a = run_suite("all", &cfg).unwrap().to_json();
    let b = run_suite("all", &cfg).unwrap().to_json();
    assert_eq!(a, b);
    let other = run_suite("all", &SuiteConfig { seed: 2, ..quick() }).unwrap().to_json();
    assert_ne!(a, other);
}

#[test]
fn json_round_trips_numbers() {
    let r = run_suite("isometry", &quick()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    let items = v["items"].as_array().unwrap();
    assert_eq!(items.len(), r.items.len());
    for (j, it) in items.iter().zip(&r.items) {
        assert_eq!(j["check_id"], it.check_id.as_str());
        assert_eq!(j["pass"], it.pass);
        let res: f64 = j["residual"].to_string().parse().unwrap();
        assert_eq!(res, it.residual);
    }
    assert_eq!(v["conventions"]["mean_curvature_normalization"].as_str().unwrap().split(':').next(), Some("trace"));
    assert_eq!(v["config"]["seed"], 42);
}

#[test]
fn tolerance_scale_is_applied() {
    let tight = SuiteConfig { tol_scale: 1e-30, ..quick() };
    let r = run_suite("structure", &tight).unwrap();
    assert!(!r.all_pass());
    let loose = run_suite("structure", &quick()).unwrap();
    for (a, b) in r.items.iter().zip(&loose.items) {
        assert_eq!(a.tolerance, b.tolerance * 1e-30);
    }
}

#[test]
fn metric_parameters_follow_config() {
    let cfg = SuiteConfig { a_values: vec![1.5], ..quick() };
    let r = run_suite("curvature", &cfg).unwrap();
    assert!(r.item("curvature.fd_oracle.direct.a=1.5").is_some());
    assert!(r.item("curvature.fd_oracle.direct.a=2").is_none());
    assert!(r.item("curvature.einstein.a=1.5").unwrap().pass);
}

#[test]
fn usage_errors() {
    assert!(run_suite("lagrangian:", &quick()).is_err());
    assert!(run_suite("all", &SuiteConfig { samples: 0, ..quick() }).is_err());
}

#[test]
fn off_grid_parameters_are_not_einstein_or_nearly_kahler() {
    let cfg = SuiteConfig { a_values: vec![1.9, 2.1], ..quick() };
    for suite in ["curvature", "connection"] {
        let r = run_suite(suite, &cfg).unwrap();
        assert!(r.all_pass(), "{suite}: {:?}", r.failures().map(|i| &i.check_id).collect::<Vec<_>>());
    }
}
