use std::path::Path;
use std::process::{Command, Output};

fn wildfire(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wildfire"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const SMALL: &[&str] = &[
    "--set",
    "grid.nx=120",
    "--set",
    "grid.x0=-6.0",
    "--set",
    "end_time=1.0",
    "--set",
    "output.interval=0.5",
];

#[test]
fn validate_config_accepts_builtin() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.toml", "base = \"validation-2d\"\n");
    let o = wildfire(d.path(), &["validate-config", "--config", "c.toml"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "ok");
}

#[test]
fn unknown_key_exits_one_and_names_it() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "c.toml",
        "base = \"validation\"\n[params]\nrhoo = 2.0\n",
    );
    let o = wildfire(d.path(), &["validate-config", "--config", "c.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rhoo"));
}

#[test]
fn bad_override_exits_one() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.toml", "base = \"validation\"\n");
    let o = wildfire(
        d.path(),
        &[
            "validate-config",
            "--config",
            "c.toml",
            "--set",
            "scheme.cfl=1.5",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scheme.cfl"));
}

#[test]
fn missing_config_exits_one() {
    let d = tempfile::tempdir().unwrap();
    let o = wildfire(d.path(), &["run"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_writes_fixed_outputs_and_override_is_resolved() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "c.toml",
        "base = \"validation\"\n[params]\nh = 0.3\n",
    );
    let mut args = vec![
        "run",
        "--config",
        "c.toml",
        "--out",
        "out",
        "--quiet",
        "--set",
        "params.h=0.2",
    ];
    args.extend_from_slice(SMALL);
    let o = wildfire(d.path(), &args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let out = d.path().join("out");
    for f in [
        "manifest.json",
        "config.resolved.toml",
        "diagnostics.csv",
        "fronts/front_x_pos.csv",
        "fronts/front_x_neg.csv",
        "rasters/T_00000.csv",
        "rasters/Y_00002.csv",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let resolved = std::fs::read_to_string(out.join("config.resolved.toml")).unwrap();
    let v: toml::Table = resolved.parse().unwrap();
    assert_eq!(v["params"]["h"].as_float(), Some(0.2));

    // the manifest reproduces the run
    let o = wildfire(
        d.path(),
        &[
            "run",
            "--config",
            "out/manifest.json",
            "--out",
            "again",
            "--quiet",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let a = std::fs::read(out.join("rasters/T_00002.csv")).unwrap();
    let b = std::fs::read(d.path().join("again/rasters/T_00002.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn divergence_exits_two_with_manifest() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.toml", "base = \"validation\"\n");
    let mut args = vec![
        "run",
        "--config",
        "c.toml",
        "--out",
        "out",
        "--quiet",
        "--set",
        "params.epsilon=1.0",
        "--set",
        "params.delta=1.0",
        "--set",
        "initial.temperature=1e110",
    ];
    args.extend_from_slice(SMALL);
    let o = wildfire(d.path(), &args);
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("step 1"), "{stderr}");
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("out/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(m["status"], "diverged");
}

#[test]
fn reduced_without_config_uses_preset() {
    let d = tempfile::tempdir().unwrap();
    let o = wildfire(
        d.path(),
        &[
            "reduced",
            "--out",
            "r",
            "--set",
            "params.h=0.5",
            "--set",
            "end_time=1.0",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stdout).contains("h = 0.5"));
}

#[test]
fn wavespeed_writes_report() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "c.toml",
        "base = \"validation\"\n[wave]\nv = 1.0\nscan_points = 41\n",
    );
    let o = wildfire(d.path(), &["wavespeed", "--config", "c.toml", "--out", "w"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(d.path().join("w/wave_speeds.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(r["roots"].as_array().unwrap().len(), 1);
}
