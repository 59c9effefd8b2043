//! The five subcommands. Each returns the process exit code:
//! 0 success/PASS, 1 invalid arguments, 2 I/O or malformed input,
//! 3 partial construction (scale underflow; partial result still written),
//! 4 a verified bound FAILed or the pipeline hypothesis is not met,
//! 5 monotonicity certification failed (bounds not applicable).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use monorat::comparison::{
    nodes_csv, solve_interpolation_nodes, verify_center_bound, verify_envelope_bound,
    CompareError, TargetFn,
};
use monorat::extremal::{construct, stages_csv, ExtremalError};
use monorat::miranda::SolverConfig;
use monorat::ratcore::{
    certify_increasing, from_json_str, sup_norm, to_json_string, CertifyError, FnExpr,
    JsonParseError, Mode,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;
pub const EXIT_FAIL: i32 = 4;
pub const EXIT_UNCERTIFIED: i32 = 5;

fn write_file(path: &Path, contents: &str) -> Result<(), i32> {
    fs::write(path, contents).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_IO
    })
}

fn read_function(path: &Path) -> Result<FnExpr, i32> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_IO
    })?;
    from_json_str(&text).map_err(|e| {
        match &e {
            JsonParseError::Syntax { line, column, .. } => {
                eprintln!(
                    "error: {} is not valid JSON (line {line}, column {column}): {e}",
                    path.display()
                );
            }
            JsonParseError::Invalid(_) => {
                eprintln!("error: {} is not a valid function: {e}", path.display());
            }
        }
        EXIT_IO
    })
}

/// `construct --n N --rho RHO --out PATH [--stages-csv PATH]`
pub fn cmd_construct(n: usize, rho: f64, out: &Path, stages_out: Option<&PathBuf>) -> i32 {
    if n < 1 {
        eprintln!("error: --n must be at least 1");
        return EXIT_USAGE;
    }
    if !(rho > 0.0 && rho < 0.5) {
        eprintln!("error: --rho must lie in (0, 0.5)");
        return EXIT_USAGE;
    }
    let (report, exit) = match construct(n, rho) {
        Ok(report) => (report, EXIT_OK),
        Err(ExtremalError::GammaUnderflow {
            stage,
            floor,
            partial: Some(partial),
        }) => {
            eprintln!(
                "warning: stage {stage} found no admissible scale above {floor:.1e}; \
                 writing the partial construction"
            );
            (*partial, EXIT_PARTIAL)
        }
        Err(e) => {
            eprintln!("error: construction failed: {e}");
            return EXIT_FAIL;
        }
    };
    let expr = FnExpr::Bumps(report.function.clone());
    let function_json = match to_json_string(&expr) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    if let Err(code) = write_file(out, &function_json) {
        return code;
    }
    let report_path = report_path_for(out);
    let report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Err(code) = write_file(&report_path, &report_json) {
        return code;
    }
    if let Some(path) = stages_out {
        if let Err(code) = write_file(path, &stages_csv(&report)) {
            return code;
        }
    }
    println!(
        "n={} ratio={} target={} ratio_fraction={}{}",
        report.n,
        report.ratio,
        report.target,
        report.ratio_fraction,
        if report.partial { " partial=true" } else { "" }
    );
    exit
}

/// `out.json` → `out.report.json`
fn report_path_for(out: &Path) -> PathBuf {
    match out.extension().and_then(|e| e.to_str()) {
        Some("json") => out.with_extension("report.json"),
        _ => {
            let mut s = out.as_os_str().to_owned();
            s.push(".report.json");
            PathBuf::from(s)
        }
    }
}

/// `verify --input PATH --n N`
pub fn cmd_verify(input: &Path, n: usize) -> i32 {
    if n < 1 {
        eprintln!("error: --n must be at least 1");
        return EXIT_USAGE;
    }
    let f = match read_function(input) {
        Ok(f) => f,
        Err(code) => return code,
    };
    if let Some(d) = f.degree_bound() {
        if d > n {
            eprintln!("error: function sits in degree class {d}, above --n {n}");
            return EXIT_USAGE;
        }
    }
    // Strict certification first, weak as the fallback for bound checking.
    let cert = match certify_increasing(&f, Mode::Strict) {
        Ok(c) => c,
        Err(CertifyError::NotStrict(_)) => match certify_increasing(&f, Mode::Weak) {
            Ok(c) => c,
            Err(e) => return report_uncertified(e),
        },
        Err(e) => return report_uncertified(e),
    };

    let is_odd = f.is_structurally_odd() || f.odd_defect(512) <= 1e-10;
    let center = if is_odd {
        let n_half = n.div_ceil(2);
        match verify_center_bound(&f, n_half, Some(&cert)) {
            Ok(r) => Some(r),
            Err(e) => {
                eprintln!("error: center bound failed to run: {e}");
                return EXIT_FAIL;
            }
        }
    } else {
        None
    };
    let envelope = match verify_envelope_bound(&f, n, Some(&cert)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: envelope bound failed to run: {e}");
            return EXIT_FAIL;
        }
    };
    let all_pass = center.as_ref().map(|r| r.verdict).unwrap_or(true) && envelope.verdict;
    let out = json!({
        "certificate": cert,
        "odd": is_odd,
        "center_bound": center,
        "envelope_bound": envelope,
        "verdict": if all_pass { "PASS" } else { "FAIL" },
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("report serializes"));
    if all_pass {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn report_uncertified(e: CertifyError) -> i32 {
    let out = json!({
        "certificate": null,
        "verdict": "NOT_APPLICABLE",
        "reason": e.to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
    eprintln!("error: monotonicity certification failed: {e}");
    EXIT_UNCERTIFIED
}

/// `nodes --n N --delta D --out PATH`
pub fn cmd_nodes(n: usize, delta: f64, out: &Path) -> i32 {
    if n < 1 {
        eprintln!("error: --n must be at least 1");
        return EXIT_USAGE;
    }
    let target = match TargetFn::f_delta(delta) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match solve_interpolation_nodes(&target, n, &SolverConfig::default()) {
        Ok(pipeline) => {
            let csv = nodes_csv(&pipeline.thresholds, &pipeline.nodes);
            if let Err(code) = write_file(out, &csv) {
                return code;
            }
            println!("residual_inf={}", pipeline.nodes.residual_inf);
            EXIT_OK
        }
        Err(CompareError::SlopeTooSmall { slope, required }) => {
            eprintln!(
                "error: f_delta'(0) = {slope} does not exceed {required}; \
                 choose delta below 2/9^n"
            );
            EXIT_FAIL
        }
        Err(e) => {
            eprintln!("error: node pipeline failed: {e}");
            EXIT_FAIL
        }
    }
}

/// `table --max-n N --rho RHO [--csv PATH]`
pub fn cmd_table(max_n: usize, rho: f64, csv: Option<&PathBuf>) -> i32 {
    if max_n < 1 {
        eprintln!("error: --max-n must be at least 1");
        return EXIT_USAGE;
    }
    if !(rho > 0.0 && rho < 0.5) {
        eprintln!("error: --rho must lie in (0, 0.5)");
        return EXIT_USAGE;
    }
    let mut csv_body = String::from("n,achieved,lower,upper,ratio_fraction\n");
    println!(
        "{:>3} {:>24} {:>24} {:>24} {:>16}",
        "n", "achieved", "9^(n-1)", "9^n/2", "ratio_fraction"
    );
    for n in 1..=max_n {
        match construct(n, rho) {
            Ok(report) => {
                let lower = 9f64.powi(n as i32 - 1);
                let upper = 0.5 * 9f64.powi(n as i32);
                println!(
                    "{:>3} {:>24e} {:>24e} {:>24e} {:>16.6}",
                    n, report.ratio, lower, upper, report.ratio_fraction
                );
                let _ = writeln!(
                    csv_body,
                    "{},{},{},{},{}",
                    n, report.ratio, lower, upper, report.ratio_fraction
                );
            }
            Err(e) => {
                eprintln!("warning: row n = {n} failed: {e}");
            }
        }
    }
    if let Some(path) = csv {
        if let Err(code) = write_file(path, &csv_body) {
            return code;
        }
    }
    EXIT_OK
}

/// `sample --input PATH --points K --out PATH`
pub fn cmd_sample(input: &Path, points: usize, out: &Path) -> i32 {
    if points < 2 {
        eprintln!("error: --points must be at least 2");
        return EXIT_USAGE;
    }
    let f = match read_function(input) {
        Ok(f) => f,
        Err(code) => return code,
    };
    let n = f.degree_bound().unwrap_or(1);
    let norm = sup_norm(&f, None);
    let envelope_scale = 9f64.powi(n as i32) * norm;
    let lo = -1.0 + 1e-4;
    let hi = 1.0 - 1e-4;
    let mut csv = String::from("x,r,r_prime,envelope\n");
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let value = f.eval(x).expect("grid point in domain");
        let slope = f.derivative_at(x).expect("grid point in domain");
        let envelope = envelope_scale / (1.0 - x * x);
        let _ = writeln!(csv, "{x},{value},{slope},{envelope}");
    }
    match write_file(out, &csv) {
        Ok(()) => {
            println!("wrote {} rows to {}", points, out.display());
            EXIT_OK
        }
        Err(code) => code,
    }
}
