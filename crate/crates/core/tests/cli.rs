use std::path::Path;
use std::process::Command;

const CONFIG: &str = r#"
output_dir = "from-config"

[params]
mu = 0.3
sigma_tilde = 1.0

[profile]
kind = "constant"
value = 2.0
period = 1.0
"#;

fn orbit(dir: &Path, extra: &[&str], env: Option<&Path>) -> std::process::Output {
    let config = dir.join("run.toml");
    std::fs::write(&config, CONFIG).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tumorstab"));
    cmd.arg("orbit").arg("--config").arg(&config).args(extra).current_dir(dir);
    match env {
        Some(p) => cmd.env("TUMORSTAB_OUTPUT_DIR", p),
        None => cmd.env_remove("TUMORSTAB_OUTPUT_DIR"),
    };
    cmd.output().unwrap()
}

#[test]
fn output_directory_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    assert!(orbit(dir, &[], None).status.success());
    assert!(dir.join("from-config/orbit.csv").exists());

    let env_dir = dir.join("from-env");
    assert!(orbit(dir, &[], Some(&env_dir)).status.success());
    assert!(env_dir.join("orbit.json").exists());

    let flag_dir = dir.join("from-flag");
    assert!(orbit(dir, &["--out", flag_dir.to_str().unwrap()], Some(&env_dir)).status.success());
    assert!(flag_dir.join("orbit.json").exists());
}

#[test]
fn orbit_csv_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let res = orbit(tmp.path(), &["--out", out.to_str().unwrap()], None);
    assert!(res.status.success());
    let text = std::fs::read_to_string(out.join("orbit.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,radius,radius_rate"));
    assert_eq!(lines.count(), 1025);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("orbit.json")).unwrap()).unwrap();
    assert!(summary["orbit"]["periodicity_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn missing_config_is_a_configuration_error() {
    let res = Command::new(env!("CARGO_BIN_EXE_tumorstab"))
        .args(["modes", "--config", "/nonexistent/run.toml"])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("error"));
}
