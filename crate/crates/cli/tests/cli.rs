use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
[grid]
n = 64

[phase]
eps = 0.08
t_end = 0.008
snapshot_every = 2

[init]
shape = "circle"
center = [0.5, 0.5]
radius = 0.25

[track]
n = 128

[compare]
times = [0.0, 0.0048, 0.008]
"#;

fn vpmcf(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vpmcf"));
    cmd.args(args).env_remove("VPMCF_OUTPUT_DIR");
    if let Some(p) = env_out {
        cmd.env("VPMCF_OUTPUT_DIR", p);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

#[test]
fn full_pipeline_exits_zero() {
    let root = tempfile::tempdir().unwrap();
    let cfg = write_config(root.path(), "run.toml", CONFIG);
    let (p, t, c, k) = (
        root.path().join("phase"),
        root.path().join("track"),
        root.path().join("compare"),
        root.path().join("cal"),
    );
    let o = vpmcf(&["simulate", "--config", &cfg, "--out", &s(&p)], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("energy_monotone"));
    let o = vpmcf(&["track", "--config", &cfg, "--out", &s(&t)], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = vpmcf(
        &[
            "compare",
            "--config",
            &cfg,
            "--phase",
            &s(&p),
            "--track",
            &s(&t),
            "--out",
            &s(&c),
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(c.join("comparison.csv").exists() && c.join("manifest.json").exists());
    let o = vpmcf(
        &[
            "calibrate",
            "--curve",
            &s(&t.join("curve_0.csv")),
            "--velocity",
            &s(&t.join("velocity_0.csv")),
            "--grid",
            "64",
            "--out",
            &s(&k),
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["xi_x.bin", "xi_y.bin", "theta.bin", "calibration.json", "manifest.json"] {
        assert!(k.join(f).exists(), "{f}");
    }
}

#[test]
fn output_dir_comes_from_the_environment() {
    let root = tempfile::tempdir().unwrap();
    let cfg = write_config(root.path(), "run.toml", CONFIG);
    let target = root.path().join("from_env");
    let o = vpmcf(&["simulate", "--config", &cfg], Some(&target));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(target.join("manifest.json").exists());
    let o = vpmcf(&["simulate", "--config", &cfg], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("output.dir"));
}

#[test]
fn configuration_errors_name_the_key() {
    let root = tempfile::tempdir().unwrap();
    let out = s(&root.path().join("o"));
    for (from, to, key) in [
        ("eps = 0.08", "eps = 0.04", "phase.eps"),
        ("t_end = 0.008", "t_end = 0.008\nsteps = 4", "steps"),
        ("radius = 0.25", "radius = -0.1", "init"),
    ] {
        let cfg = write_config(root.path(), "bad.toml", &CONFIG.replace(from, to));
        let o = vpmcf(&["simulate", "--config", &cfg, "--out", &out], None);
        assert_eq!(o.status.code(), Some(2), "{to}");
        assert!(
            String::from_utf8_lossy(&o.stderr).contains(key),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let sweep = write_config(root.path(), "sweep.toml", &format!("{CONFIG}\n[sweep]\neps = []\n"));
    let o = vpmcf(&["sweep", "--config", &sweep, "--out", &out], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep.eps"));
}

#[test]
fn missing_inputs_are_failures() {
    let root = tempfile::tempdir().unwrap();
    let o = vpmcf(
        &[
            "simulate",
            "--config",
            &s(&root.path().join("absent.toml")),
            "--out",
            "x",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(3));
    let o = vpmcf(&["simulate"], None);
    assert_eq!(o.status.code(), Some(2));
}
