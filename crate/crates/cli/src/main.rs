use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cp3::report::{list_checks, run_suite, suite_names, SuiteConfig};

/// Runs the verification suites for the metrics g_a on CP^3 and prints a
/// JSON report. Exit status: 0 if every check passes, 1 if any fails, 2 on
/// usage errors.
#[derive(Parser, Debug)]
#[command(name = "cp3-verify", version)]
struct Args {
    /// Metric parameter; repeat for several values.
    #[arg(long = "a", value_name = "A", default_values_t = [0.5, 1.0, 2.0, 3.0])]
    a: Vec<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Random samples per check.
    #[arg(long, default_value_t = 25)]
    samples: usize,
    /// Multiplies every tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    #[arg(long, default_value_t = 1e-5)]
    fd_step: f64,
    /// structure, connection, curvature, isometry, lagrangian:<name> or all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the check ids of the suite and exit.
    #[arg(long)]
    list_checks: bool,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("cp3-verify: {msg}");
    eprintln!("suites: {}", suite_names().join(", "));
    ExitCode::from(2)
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = args.threads {
        if n == 0 {
            return usage_error("--threads must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return usage_error(e);
        }
    }
    let cfg = SuiteConfig { a_values: args.a, seed: args.seed, samples: args.samples, tol_scale: args.tol_scale, fd_step: args.fd_step };

    if args.list_checks {
        return match list_checks(&args.suite, &cfg) {
            Ok(checks) => {
                let text: String = checks.iter().map(|(id, what)| format!("{id}\t{what}\n")).collect();
                emit(&text);
                ExitCode::SUCCESS
            }
            Err(e) => usage_error(e),
        };
    }

    let report = match run_suite(&args.suite, &cfg) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    let json = report.to_json();
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                eprintln!("cp3-verify: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => emit(&json),
    }
    let failed: Vec<_> = report.failures().collect();
    eprintln!("{}: {} checks, {} failed", report.suite, report.items.len(), failed.len());
    for f in &failed {
        eprintln!("  FAIL {} residual {:e} tolerance {:e}", f.check_id, f.residual, f.tolerance);
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
