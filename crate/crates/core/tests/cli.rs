use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CONFIG: &str = r#"
[device]
model = "tls"
delta = 3.33e-4
i_p = 0.721

[drive]
f_dc = { start = 3.8, stop = 4.2, points = 5, unit = "f_omega" }
f_ac = [0.002, 0.003]

[[bath]]
tag = "flux"

[[coupling]]
tag = "flux"
kind = "longitudinal"

[run]
mode = "timescales"
"#;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lzs-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn lzs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lzs")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn timescales_csv_and_meta_rerun() {
    let dir = scratch("rerun");
    let cfg = write(&dir, "run.toml", CONFIG);
    let out = dir.join("ts.csv");
    let o = lzs(&["timescales", "--config", &cfg, "--output", out.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    let first = lines.next().unwrap();
    for unit in ["E_J", "hbar/E_J", "Phi_0", "E_J/k_B"] {
        assert!(first.starts_with('#') && first.contains(unit));
    }
    let body: Vec<&str> = lines.filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "f_dc,f_ac,theta,t_r,t_d,t_phi,flag");
    assert_eq!(body.len(), 11);

    let meta = dir.join("ts.meta");
    let meta_text = std::fs::read_to_string(&meta).unwrap();
    assert!(meta_text.starts_with('#'));
    for key in ["wall_time_s", "version", "flagged", "max_unitarity_defect", "n_steps"] {
        assert!(meta_text.contains(key), "{key}");
    }

    // rerun from the metadata on one thread: identical values
    let again = dir.join("again.csv");
    let o = lzs(&["timescales", "--config", meta.to_str().unwrap(), "--output", again.to_str().unwrap(), "--threads", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn failures_exit_nonzero_with_diagnostics() {
    let dir = scratch("fail");
    let cfg = write(&dir, "run.toml", CONFIG);

    let o = lzs(&["steady_state", "--config", &cfg]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not match"));

    let o = lzs(&["timescales", "--config", &cfg, "--seedless=yes"]);
    assert!(!o.status.success());

    let empty = write(&dir, "empty.toml", "");
    let o = lzs(&["timescales", "--config", &empty]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(!o.status.success());
    assert!(err.contains("device.model") && err.contains("run.mode"), "{err}");

    let bad = write(&dir, "bad.toml", &CONFIG.replace("tag = \"flux\"\n\n", "tag = \"flux\"\ngamma = -0.001\n\n"));
    let o = lzs(&["timescales", "--config", &bad]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("gamma must be ≥ 0") && err.contains("line 13, column 9"), "{err}");

    let o = lzs(&["timescales", "--config", dir.join("missing.toml").to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn seedless_flag_is_accepted() {
    let dir = scratch("seedless");
    let cfg = write(&dir, "run.toml", &CONFIG.replace("points = 5", "points = 1"));
    let o = lzs(&["timescales", "--config", &cfg, "--seedless"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.join("run.csv").exists() && dir.join("run.meta").exists());
}
