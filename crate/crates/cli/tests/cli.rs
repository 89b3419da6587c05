use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use floquet_readout::config::RunConfig;

const CONFIG: &str = r#"
figure = "test"

[model]
device = "charge_qubit"
omega_q = 1.0

[resonator]
omega_r_over_omega_q = 1.1
kappa = 2e-3
g_perp = 1e-2

[drive]
a_q_over_omega_q = 0.05

[sweep]
omega_r_over_omega_q = [0.9, 1.0, 1.1]
a_q_over_omega_q = [0.0, 0.05, 0.1]

[output]
t_points = 100
"#;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("floquet-readout-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floquet-readout")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn models_lists_all_devices() {
    let out = run(&["models"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for device in ["charge_qubit", "flopping_mode", "transmon", "fluxonium"] {
        assert!(text.contains(device), "{text}");
    }
    assert!(text.contains("transmon,E_J,25,"));
}

#[test]
fn couplings_output_is_deterministic() {
    let dir = scratch("determinism");
    let cfg = write_config(&dir, CONFIG);
    let a = dir.join("a");
    let b = dir.join("b");
    assert!(run(&["couplings", "--config", &cfg, "--out", a.to_str().unwrap(), "--jobs", "2"]).status.success());
    assert!(run(&["couplings", "--config", &cfg, "--out", b.to_str().unwrap(), "--jobs", "1"]).status.success());
    let x = fs::read(a.join("couplings.csv")).unwrap();
    assert_eq!(x, fs::read(b.join("couplings.csv")).unwrap());
    let text = String::from_utf8(x).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().filter(|l| l.contains("refused")).count() == 3);
    assert!(text.lines().filter(|l| l.contains(",nan,")).count() >= 3);
}

#[test]
fn trajectory_and_snr_write_tables() {
    let dir = scratch("tables");
    let resonant = write_config(&dir, CONFIG);
    let out = dir.join("out");
    let o = out.to_str().unwrap();
    // a resonant grid point aborts a trajectory run but only marks its SNR rows
    let failed = run(&["trajectory", "--config", &resonant, "--out", o]);
    assert!(!failed.status.success());
    assert!(String::from_utf8_lossy(&failed.stderr).contains("resonance"));
    assert!(run(&["snr", "--config", &resonant, "--out", o]).status.success());
    let snr = fs::read_to_string(out.join("snr.csv")).unwrap();
    assert_eq!(snr.lines().count(), 10);
    assert!(snr.lines().nth(1).unwrap().starts_with("longitudinal,9.00000000000e-1,0.00000000000e0,0.00000000000e0,nan,"));
    assert!(snr.lines().nth(5).unwrap().contains("near resonance"));

    let clean = write_config(&dir, &CONFIG.replace("[0.9, 1.0, 1.1]", "[0.9, 1.1]"));
    assert!(run(&["trajectory", "--config", &clean, "--out", o]).status.success());
    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("omega_r_over_omega_q,source,state,t,kappa_t,re_a,im_a\n"));
    assert_eq!(traj.lines().count(), 1 + 2 * 2 * 100);
}

#[test]
fn json_output() {
    let dir = scratch("json");
    let cfg = write_config(&dir, &format!("{CONFIG}format = \"json\"\n").replace("[0.9, 1.0, 1.1]", "[1.1]"));
    let out = dir.join("out");
    assert!(run(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(v["name"], "spectrum");
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn errors_exit_nonzero() {
    let dir = scratch("errors");
    let bad = write_config(&dir, &CONFIG.replace("kappa = 2e-3", "kappa = -1.0"));
    let out = run(&["spectrum", "--config", &bad]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("kappa"));
    assert!(!run(&["spectrum", "--config", "/nonexistent.toml"]).status.success());
    let ok = write_config(&dir, CONFIG);
    let capped = Command::new(env!("CARGO_BIN_EXE_floquet-readout"))
        .args(["spectrum", "--config", &ok, "--out", dir.join("o").to_str().unwrap()])
        .env("FLOQUET_READOUT_MAX_DIM", "100")
        .output()
        .unwrap();
    assert!(!capped.status.success());
    assert!(String::from_utf8_lossy(&capped.stderr).contains("exceeds cap 100"));
}

#[test]
fn every_recipe_parses_and_names_a_figure() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = RunConfig::from_toml(&fs::read_to_string(&path).unwrap())
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(cfg.figure.starts_with("Fig."), "{}", path.display());
            cfg.model.build().unwrap();
            n += 1;
        }
    }
    assert!(n >= 10);
}
