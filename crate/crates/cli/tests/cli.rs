use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fracphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracphase"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn write_config(dir: &TempDir, text: &str) -> String {
    let path = dir.path().join("run.cfg");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

const SMALL_EVOLVE: &str = "\
model = TFAC_VC
alpha = 0.6
grid = 16
T = 2
mesh = adaptive
seed = 3
snapshot_times = 0.5, 2
";

#[test]
fn evolve_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, SMALL_EVOLVE);
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    for d in &dirs {
        let out = fracphase(&["evolve", "--config", &cfg, "--out-dir", d.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["diagnostics.csv", "mesh.csv", "snapshot_0.5.csv", "snapshot_2.csv"] {
        assert_eq!(read(&dirs[0], name), read(&dirs[1], name), "{name}");
    }
    assert_eq!(
        fs::read(dirs[0].join("snapshot_0.5.fpf1")).unwrap(),
        fs::read(dirs[1].join("snapshot_0.5.fpf1")).unwrap()
    );
    let manifests: Vec<serde_json::Value> = dirs
        .iter()
        .map(|d| serde_json::from_str(&read(d, "manifest.json")).unwrap())
        .collect();
    assert_eq!(manifests[0]["artifacts"], manifests[1]["artifacts"]);

    let m = &manifests[0];
    let snaps = m["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 2);
    let actual = snaps[0]["actual"].as_f64().unwrap();
    assert!(actual >= 0.5, "snapshot taken before the requested time: {actual}");
    // the node before the snapshot lies before the requested time
    let mesh = read(&dirs[0], "mesh.csv");
    let step = snaps[0]["step"].as_u64().unwrap() as usize;
    let prev: f64 = mesh.lines().nth(step).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(prev < 0.5);
    assert_eq!(snaps[1]["actual"].as_f64().unwrap(), 2.0);

    let diag = read(&dirs[0], "diagnostics.csv");
    assert!(diag.starts_with("n,t,tau,E,E_mod,E_var,mass,mass_drift,aux_gap,iters,residual\n"));
    assert_eq!(diag.lines().count(), mesh.lines().count());
}

#[test]
fn different_seed_changes_output() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, SMALL_EVOLVE);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for (dir, seed) in [(&a, "3"), (&b, "4")] {
        let out = fracphase(&["evolve", "--config", &cfg, "--seed", seed, "--T", "0.1", "--out-dir", dir.to_str().unwrap(), "--snapshot_times", "0.1"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_ne!(read(&a, "snapshot_0.1.csv"), read(&b, "snapshot_0.1.csv"));
}

#[test]
fn zero_horizon_writes_initial_state() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("t0");
    let out = fracphase(&[
        "evolve", "--model", "TFSH", "--alpha", "0.9", "--grid", "32", "--Lx", "32", "--Ly", "32", "--init", "pattern",
        "--T", "0", "--snapshot_times", "0", "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let diag = read(&out_dir, "diagnostics.csv");
    assert_eq!(diag.lines().count(), 2);
    assert!(diag.lines().nth(1).unwrap().starts_with("0,0e0,"));
    let bytes = fs::read(out_dir.join("snapshot_0.fpf1")).unwrap();
    assert_eq!(&bytes[..4], b"FPF1");
    assert_eq!(bytes.len(), 12 + 8 * 32 * 32);
    let first = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    assert!((first - 0.067_761_189).abs() < 1e-9);
}

#[test]
fn converge_prints_table_and_csv() {
    let tmp = TempDir::new().unwrap();
    let out = fracphase(&[
        "converge", "--model", "TFSH", "--alpha", "1", "--grid", "16", "--N", "8,16,32", "--out-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("err(phi)"), "{stdout}");
    let csv = read(tmp.path(), "convergence.csv");
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let order: f64 = rows[2][2].parse().unwrap();
    assert!((1.8..2.2).contains(&order), "{csv}");
}

#[test]
fn converge_single_level_has_no_orders() {
    let tmp = TempDir::new().unwrap();
    let out = fracphase(&["converge", "--model", "ch", "--alpha", "0.5", "--grid", "8", "--N", "4", "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let csv = read(tmp.path(), "convergence.csv");
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "4");
    assert!(row[2].is_empty() && row[4].is_empty());
}

#[test]
fn kernels_pass_and_negative_control() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let ok = fracphase(&["kernels", "--model", "ac", "--alpha", "0.5", "--N", "12", "--out-dir", dir]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    let csv = read(tmp.path(), "kernels.csv");
    assert_eq!(csv.lines().next(), Some("n,j,b,b_mod"));

    let zero = fracphase(&["kernels", "--model", "ac", "--alpha", "1", "--N", "4", "--T", "2", "--out-dir", dir]);
    assert_eq!(code(&zero), 0);
    for line in read(tmp.path(), "kernels.csv").lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let want = if cols[1] == 0.0 { 2.0 } else { 0.0 };
        assert!((cols[2] - want).abs() < 1e-12, "{line}");
    }

    let bad = fracphase(&["kernels", "--model", "ac", "--alpha", "0.5", "--N", "12", "--corrupt-kernel", "--out-dir", dir]);
    assert_eq!(code(&bad), 4);
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let unknown = write_config(&tmp, "model = ac\nalpha = 0.5\nwidth = 3\n");
    assert_eq!(code(&fracphase(&["evolve", "--config", &unknown, "--out-dir", dir])), 2);
    assert_eq!(code(&fracphase(&["evolve", "--config", "/nonexistent/run.cfg"])), 2);
    assert_eq!(code(&fracphase(&["evolve", "--model", "ac", "--out-dir", dir])), 2);
    assert_eq!(code(&fracphase(&["evolve", "--model", "ac", "--alpha", "2", "--out-dir", dir])), 2);
    assert_eq!(code(&fracphase(&["converge", "--model", "ac", "--alpha", "0.5", "--mesh", "adaptive", "--out-dir", dir])), 2);
    assert_eq!(code(&fracphase(&["evolve", "--set", "bogus=1", "--out-dir", dir])), 2);
    assert_eq!(code(&fracphase(&["nonsense"])), 2);
}

#[test]
fn solver_failure_exits_with_three_and_keeps_outputs() {
    let tmp = TempDir::new().unwrap();
    let out = fracphase(&[
        "evolve", "--model", "ch", "--alpha", "0.5", "--grid", "16", "--N", "4", "--tol", "1e-300", "--out-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    assert!(read(tmp.path(), "diagnostics.csv").starts_with("n,t,"));
    let manifest: serde_json::Value = serde_json::from_str(&read(tmp.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["exit_code"], 3);
}

#[test]
fn flags_override_config_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "model = TFCH\nalpha = 0.4\ngrid = 8\nN = 2\nT = 0.1\ndelta = 0.3\n");
    let out = fracphase(&["evolve", "--config", &cfg, "--alpha", "0.8", "--delta", "-0.25", "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&read(tmp.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["config"]["alpha"], "0.8");
    assert_eq!(manifest["config"]["delta"], "-0.25");
    assert_eq!(manifest["config"]["model"], "TFCH");
    // every artifact hash in the manifest matches the file on disk
    for a in manifest["artifacts"].as_array().unwrap() {
        let bytes = fs::read(tmp.path().join(a["file"].as_str().unwrap())).unwrap();
        assert_eq!(a["bytes"].as_u64().unwrap() as usize, bytes.len());
        assert_eq!(a["sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let cfg = fracphase::config::ExperimentConfig::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 2);
}
