use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cp3-verify")).args(args).output().expect("binary runs")
}

#[test]
fn passing_suite_exits_zero_with_json() {
    let out = run(&["--suite", "curvature", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["suite"], "curvature");
    assert_eq!(v["all_pass"], true);
    assert_eq!(v["config"]["samples"], 3);
    assert_eq!(v["config"]["a_values"].as_array().unwrap().len(), 4);
}

#[test]
fn failing_checks_exit_one() {
    let out = run(&["--suite", "structure", "--samples", "2", "--tol-scale", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["--suite", "nonsense"][..],
        &["--samples", "many"],
        &["--a", "-1"],
        &["--fd-step", "1"],
        &["--threads", "0"],
        &["--unknown-flag"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn repeated_a_and_out_file() {
    let dir = std::env::temp_dir().join(format!("cp3-verify-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = run(&["--suite", "lagrangian:berger", "--samples", "2", "--a", "2", "--a", "0.5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let a: Vec<f64> = v["config"]["a_values"].as_array().unwrap().iter().map(|x| x.to_string().parse().unwrap()).collect();
    assert_eq!(a, [2.0, 0.5]);
    assert!(v["notes"].as_array().unwrap().iter().any(|n| n.as_str().unwrap().starts_with("berger")));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn thread_count_does_not_change_the_report() {
    let one = run(&["--suite", "all", "--samples", "3", "--seed", "1", "--threads", "1"]);
    let four = run(&["--suite", "all", "--samples", "3", "--seed", "1", "--threads", "4"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn list_checks_prints_ids() {
    let out = run(&["--suite", "isometry", "--list-checks"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("isometry.") && l.contains('\t')));
    assert!(text.contains("isometry.su4_breaks_g2"));
}
