use std::process::Command;

fn rve_uq() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rve-uq"));
    cmd.env("RUST_LOG", "warn").env_remove("RVE_UQ_OUT");
    cmd
}

#[test]
fn doe_and_run_honor_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let status = rve_uq()
        .args(["doe", "--n-runs", "3", "--seed", "5", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success());
    let design = std::fs::read_to_string(out.join("design.csv")).unwrap();
    assert_eq!(design.lines().count(), 4);
    let info = std::fs::read_to_string(out.join("design.json")).unwrap();
    assert!(info.contains("\"seed\": 5"));

    let run = rve_uq()
        .args(["run", "--n-runs", "3", "--seed", "5", "--resolution", "8", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("3 runs:"));
}

#[test]
fn config_file_and_environment_select_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n_runs": 2, "output_dir": "unused"}"#).unwrap();
    let env_out = dir.path().join("from_env");
    let status = rve_uq()
        .arg("doe")
        .arg("--config")
        .arg(&cfg)
        .env("RVE_UQ_OUT", &env_out)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(env_out.join("design.csv").exists());
    assert!(!dir.path().join("unused").exists());
}

#[test]
fn invalid_input_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = rve_uq().args(["doe", "--resolution", "4"]).current_dir(dir.path()).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("resolution"));

    let out = rve_uq().arg("fit").arg("--out").arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
}
