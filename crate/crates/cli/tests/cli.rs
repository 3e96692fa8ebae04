use std::process::Command;

fn dirac_lab(out: &std::path::Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dirac-lab"))
        .env_remove("DIRAC_LAB_OUT_DIR")
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn passing_run_exits_zero_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dirac_lab(dir.path(), &["verify-algebra", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify-algebra.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert!(dir.path().join("cl3_table.csv").exists());
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dirac_lab(dir.path(), &["solve", "--case", "nope"]).status.code(), Some(1));
    assert_eq!(dirac_lab(dir.path(), &["no-such-command"]).status.code(), Some(1));
    assert_eq!(dirac_lab(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{\n  \"experiment\": \"norm\",\n  \"resolutoin\": 8\n}\n").unwrap();
    let out = dirac_lab(dir.path(), &["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("resolutoin") && err.contains("line 3"), "{err}");
}

#[test]
fn config_file_drives_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment": "norm", "field": "cubic", "resolution": 8}"#).unwrap();
    let out = dirac_lab(dir.path(), &["run", "--config", cfg.to_str().unwrap(), "--resolution", "12"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("norm.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "field,kind,value,resolution,nodes,lower_bound");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!((row[0], row[3]), ("cubic", "12"));
}

#[test]
fn out_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dirac-lab"))
        .env("DIRAC_LAB_OUT_DIR", dir.path())
        .args(["verify-algebra", "--n", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("verify-algebra.json").exists());
}
