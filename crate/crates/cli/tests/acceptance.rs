//! One line per criterion; exits nonzero if any criterion fails.

use std::io::Write;
use std::process::{Command, ExitCode};

use wideband_cli::check::{run_one, CheckResult, CRITERIA, DEFAULT_CHECK_SEED};

const SWEEP: &str = "quantity = \"oracle-check\"\nseed = 3\nn_samples = 5000\n[grid]\nt=[1, 2]\nr=[1, 2]\nsnr=[0.01, 0.1]\n";

// The binary must agree with itself across thread counts as well.
fn binary_sweeps_match() -> Result<bool, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("sweep.toml");
    std::fs::write(&path, SWEEP).map_err(|e| e.to_string())?;
    let run = |threads: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_wideband"))
            .args(["sweep", path.to_str().unwrap(), "--out", "-", "--threads", threads])
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(String::from_utf8_lossy(&out.stderr).into_owned());
        }
        Ok(out.stdout)
    };
    let first = run("1")?;
    Ok(!first.is_empty() && first == run("1")? && first == run("4")?)
}

fn run(id: u8) -> CheckResult {
    run_one(id, DEFAULT_CHECK_SEED)
        .unwrap_or_else(|e| CheckResult { id, name: "error", passed: false, detail: format!("{e:#}") })
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut stdout = std::io::stdout().lock();
    let mut first_lines = Vec::new();
    for id in CRITERIA.filter(|&id| id != 10) {
        let result = in_pool(1, || run(id));
        failed += usize::from(!result.passed);
        writeln!(stdout, "{}", result.line()).unwrap();
        stdout.flush().unwrap();
        first_lines.push(result.line());
    }

    // Criterion 10 also reruns the whole table on four threads.
    let mut result = run(10);
    let second_lines: Vec<String> = in_pool(4, || CRITERIA.filter(|&id| id != 10).map(|id| run(id).line()).collect());
    let table_ok = first_lines == second_lines;
    let binary = binary_sweeps_match();
    result.passed &= table_ok && matches!(binary, Ok(true));
    result.detail.push_str(&format!(
        "; check table rerun on 4 threads identical: {table_ok}; binary sweep with 1, 1 and 4 threads identical: {binary:?}"
    ));
    failed += usize::from(!result.passed);
    writeln!(stdout, "{}", result.line()).unwrap();

    writeln!(stdout, "acceptance: {} passed, {failed} failed", CRITERIA.count() - failed).unwrap();
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
