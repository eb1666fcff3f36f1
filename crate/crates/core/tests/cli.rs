use std::path::Path;
use std::process::{Command, Output};

fn mpmg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpmg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, trials: usize) -> String {
    let path = dir.join("exp.toml");
    std::fs::write(
        &path,
        format!(
            r#"
[problem]
kind = "poisson1d"
n = 15

[smoother]
kind = "jacobi"
omega = 0.6666666666666666

[precision]
bits = [8, 12]

[run]
trials = {trials}
rng_seed = 7
"#
        ),
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_is_byte_identical_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 3);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = mpmg(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert!(text.starts_with("# mpmg-trials v1\n"));
    assert_eq!(text.lines().count(), 2 + 3 * 2);
}

#[test]
fn seed_override_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 1);
    let a = mpmg(&["run", "--config", &cfg, "--out", "-"]);
    let b = mpmg(&["run", "--config", &cfg, "--out", "-", "--seed", "8"]);
    assert_eq!(code(&a), 0);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn validate_detects_a_flipped_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 2);
    let csv = dir.path().join("r.csv");
    assert_eq!(
        code(&mpmg(&[
            "run",
            "--config",
            &cfg,
            "--out",
            csv.to_str().unwrap()
        ])),
        0
    );
    assert_eq!(code(&mpmg(&["validate", csv.to_str().unwrap()])), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let flipped = dir.path().join("flipped.csv");
    std::fs::write(&flipped, text.replacen(",true\n", ",false\n", 1)).unwrap();
    assert_eq!(code(&mpmg(&["validate", flipped.to_str().unwrap()])), 1);
}

#[test]
fn bounds_with_zero_eps_prints_zero_table() {
    let o = mpmg(&["bounds", "--eps", "0", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let c = v[0]["c"].as_array().unwrap();
    assert_eq!(c.len(), 6);
    assert!(c.iter().all(|x| x.as_f64() == Some(0.0)));
    assert_eq!(v[0]["delta_rho"].as_f64(), Some(0.0));
}

#[test]
fn bounds_from_config_needs_no_trials() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 1);
    let o = mpmg(&["bounds", "--config", &cfg]);
    assert_eq!(code(&o), 0);
    let s = String::from_utf8(o.stdout).unwrap();
    assert_eq!(s.matches("delta_rho_tg").count(), 2);
}

#[test]
fn bad_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[problem]\nkind = \"poisson1d\"\nn = 16\n").unwrap();
    assert_eq!(code(&mpmg(&["run", "--config", path.to_str().unwrap()])), 2);
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        code(&mpmg(&["run", "--config", missing.to_str().unwrap()])),
        2
    );
    let cfg = write_config(dir.path(), 1);
    assert_eq!(code(&mpmg(&["run", "--config", &cfg, "--bits", "52"])), 2);
    assert_eq!(code(&mpmg(&["run", "--config", &cfg, "--trials", "0"])), 2);
    assert_eq!(code(&mpmg(&["bogus"])), 2);
}

#[test]
fn sweep_and_progressive_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 2);
    let o = mpmg(&["sweep", "--config", &cfg, "--sizes", "7,15", "--out", "-"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        String::from_utf8(o.stdout).unwrap().lines().count(),
        2 + 2 * 2 * 2
    );
    let o = mpmg(&[
        "progressive",
        "--config",
        &cfg,
        "--sizes",
        "15,31",
        "--pi-target",
        "0.004",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().contains("spread"));
}
