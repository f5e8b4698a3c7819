use std::path::Path;
use std::process::{Command, Output};

fn wideband(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("sweep.toml");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_wideband"))
        .arg("sweep")
        .arg(&path)
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn clean_sweep_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let run = wideband(
        dir.path(),
        "quantity = \"capacity\"\n[grid]\nt=[1, 2]\nr=[1]\nl=[10, 100]\nsnr=[0.01]\n",
        &["--out", out.to_str().unwrap()],
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("t,r,l,snr,"));
    assert!(String::from_utf8_lossy(&run.stderr).contains("4 rows, 0 failed"));
}

#[test]
fn failing_rows_exit_one_and_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let run = wideband(
        dir.path(),
        "quantity = \"outage\"\n[grid]\nt=[2]\nr=[1]\nl=[2, 1000]\nsnr=[0.01]\nrate=[1.0]\n",
        &["--out", "-"],
    );
    assert_eq!(run.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("1 failed") && stderr.contains("row "), "{stderr}");
    assert_eq!(String::from_utf8_lossy(&run.stdout).lines().count(), 3);
}

#[test]
fn bad_config_exits_two_before_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = wideband(dir.path(), "quantity = \"capacity\"\n[grid]\nsnr_db=[3]\n", &["--out", "-"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(run.stdout.is_empty());
    assert!(String::from_utf8_lossy(&run.stderr).contains("snr_db"));
}

#[test]
fn row_cap_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.toml");
    std::fs::write(&path, "quantity = \"iid\"\n[grid]\nr=[1, 2]\nsnr=[0.01]\na=[10, 20]\n").unwrap();
    let run = Command::new(env!("CARGO_BIN_EXE_wideband"))
        .args(["sweep", path.to_str().unwrap(), "--out", "-"])
        .env("WIDEBAND_ROW_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("row cap"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = "quantity = \"oracle-check\"\nseed = 1\nn_samples = 2000\n[grid]\nt=[1]\nr=[1]\nsnr=[0.05]\n";
    let a = wideband(dir.path(), config, &["--out", "-"]).stdout;
    let b = wideband(dir.path(), config, &["--out", "-", "--seed", "2"]).stdout;
    let c = wideband(dir.path(), config, &["--out", "-", "--seed", "1"]).stdout;
    assert_ne!(a, b);
    assert_eq!(a, c);
}
