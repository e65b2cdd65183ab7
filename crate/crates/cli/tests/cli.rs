use std::path::Path;
use std::process::{Command, Output};

fn rnsla(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnsla"))
        .args(args)
        .current_dir(dir)
        .env_remove("RNSLA_WORKERS")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(rnsla(&["frobnicate"], d.path()).status.code(), Some(2));
    assert_eq!(rnsla(&["stats", "--bogus", "x"], d.path()).status.code(), Some(2));
    assert_eq!(
        rnsla(&["gen", "--n", "10", "--row-weight", "20", "-o", "m.smz"], d.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn io_errors_exit_3() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(rnsla(&["stats", "missing.smz"], d.path()).status.code(), Some(3));
    std::fs::write(d.path().join("bad.smz"), b"SMZL\x07\x00\x00\x00").unwrap();
    let o = rnsla(&["stats", "bad.smz"], d.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn stats_reports_generator_profile() {
    let d = tempfile::tempdir().unwrap();
    let o = rnsla(
        &[
            "gen",
            "--n",
            "1000",
            "--row-weight",
            "100",
            "--pm1",
            "0.927",
            "--seed",
            "42",
            "-o",
            "m.smz",
        ],
        d.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = rnsla(&["stats", "m.smz", "--window", "32"], d.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let pct = v["stats"]["pct_pm1"].as_f64().unwrap();
    assert!((pct - 0.927).abs() <= 0.01);
    assert_eq!(v["config"]["subcommand"], "stats");
    assert!(v["column_profile"].as_array().unwrap().len() >= 31);
}

#[test]
fn convert_round_trips() {
    let d = tempfile::tempdir().unwrap();
    assert!(
        rnsla(&["gen", "--n", "50", "--row-weight", "5", "-o", "m.smz"], d.path())
            .status
            .success()
    );
    for via in ["csr", "compressed", "coo", "slcoo:4", "ell", "hybrid"] {
        let o = rnsla(&["convert", "m.smz", "-o", "m.mtx", "--via", via], d.path());
        assert!(o.status.success(), "{via}: {}", stderr(&o));
    }
    assert!(rnsla(&["convert", "m.mtx", "-o", "back.smz"], d.path())
        .status
        .success());
    assert_eq!(
        std::fs::read(d.path().join("m.smz")).unwrap(),
        std::fs::read(d.path().join("back.smz")).unwrap()
    );
}

#[test]
fn verify_rejects_zero_and_wrong_vectors() {
    let d = tempfile::tempdir().unwrap();
    assert!(rnsla(
        &["gen", "--n", "30", "--row-weight", "3", "--singular", "-o", "m.smz"],
        d.path()
    )
    .status
    .success());
    let header = "# kernel mod 1400000000000000000000000000000000000000000000000000017 dim 30\n";
    std::fs::write(d.path().join("zero.txt"), format!("{header}{}", "0\n".repeat(30))).unwrap();
    let o = rnsla(&["verify", "m.smz", "zero.txt"], d.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("zero vector"));
    std::fs::write(d.path().join("ones.txt"), format!("{header}{}", "1\n".repeat(30))).unwrap();
    assert_eq!(rnsla(&["verify", "m.smz", "ones.txt"], d.path()).status.code(), Some(4));
    let o = rnsla(
        &["solve", "m.smz", "-o", "k.txt", "--workers", "2", "--format", "slcoo:4"],
        d.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(rnsla(&["verify", "m.smz", "k.txt"], d.path()).status.success());
}

#[test]
fn nonsingular_matrix_is_a_solver_failure() {
    let d = tempfile::tempdir().unwrap();
    let mut text = String::from("%%MatrixMarket matrix coordinate integer general\n%%field: integer\n8 8 8\n");
    for i in 1..=8 {
        text.push_str(&format!("{i} {i} 1\n"));
    }
    std::fs::write(d.path().join("id.mtx"), text).unwrap();
    let o = rnsla(&["solve", "id.mtx", "-o", "k.txt"], d.path());
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    assert!(!d.path().join("k.txt").exists());
}

#[test]
fn workers_come_from_the_environment() {
    let d = tempfile::tempdir().unwrap();
    assert!(
        rnsla(&["gen", "--n", "40", "--row-weight", "4", "-o", "m.smz"], d.path())
            .status
            .success()
    );
    let o = Command::new(env!("CARGO_BIN_EXE_rnsla"))
        .args(["bench", "m.smz", "--iterations", "3"])
        .current_dir(d.path())
        .env("RNSLA_WORKERS", "3")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["workers"], 3);
    assert_eq!(v["report"]["workers"], 3);
}
