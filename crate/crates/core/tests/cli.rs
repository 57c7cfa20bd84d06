use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aesa-chain"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, text: &str) -> String {
    let p = dir.join("s.toml");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn every_shipped_scenario_runs() {
    for (mode, expect) in [
        ("t1", &["summary.txt", "config.toml", "detections.csv", "angular_errors.csv", "music_spectra.csv"][..]),
        ("t2", &["summary.txt", "rejection.csv", "beamscan.csv", "grids/rejection_region.aesg", "grids/mvdr_power_0.aesg"]),
        ("t3", &["summary.txt", "detections.csv", "conventional_detections.csv", "music_spectra.csv"]),
        ("t4", &["summary.txt", "scatterers.csv", "grids/isar_image.aesg", "grids/isar_image_unfocused.aesg"]),
    ] {
        let out = tempfile::tempdir().unwrap();
        let sc = scenario(&format!("{mode}.toml"));
        let o = run(&["run", "--mode", mode, "--scenario", sc.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
        assert!(o.status.success(), "{mode}: {}", stderr(&o));
        for f in expect {
            assert!(out.path().join(f).is_file(), "{mode}: missing {f}");
        }
    }
}

#[test]
fn summary_reports_scenario_seed_and_hash() {
    let out = tempfile::tempdir().unwrap();
    let sc = scenario("t2.toml");
    let o = run(&["run", "--mode", "t2", "--scenario", sc.to_str().unwrap(), "--seed", "9", "--out", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = std::fs::read_to_string(out.path().join("summary.txt")).unwrap();
    assert!(s.contains("seed = 9"));
    assert!(s.lines().any(|l| l.starts_with("config_sha256 = ") && l.len() == "config_sha256 = ".len() + 64));
    assert!(s.contains("average_db = "));
}

#[test]
fn geometry_dump_lists_every_element() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["run", "--mode", "t1", "--out", out.path().to_str().unwrap(), "--dump-geometry", "--emit-raw"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.path().join("elements.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 48);
    for s in 0..6 {
        let n = rows.iter().filter(|r| r.rsplit(',').next() == Some(&s.to_string())).count();
        assert_eq!(n, 8, "subarray {s}");
    }
    assert_eq!(std::fs::read_to_string(out.path().join("subarrays.csv")).unwrap().lines().count(), 7);
    for c in 0..6 {
        assert!(out.path().join(format!("grids/raw_ch{c}.aesg")).is_file());
        assert!(out.path().join(format!("grids/compressed_ch{c}.aesg")).is_file());
    }
}

#[test]
fn steering_override_accepts_negative_angles() {
    let out = tempfile::tempdir().unwrap();
    let sc = scenario("t2.toml");
    let o = run(&["run", "--mode", "t2", "--scenario", sc.to_str().unwrap(), "--steer", "-15,5", "--out", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rej = std::fs::read_to_string(out.path().join("rejection.csv")).unwrap();
    assert_eq!(rej.lines().count(), 3);
}

#[test]
fn config_problems_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let sc = scenario("t1.toml");
    let o = run(&["run", "--mode", "t2", "--scenario", sc.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("t1"));

    let p = write(dir.path(), "mode = \"t1\"\nfoo = 1\n[radar]\nprf = 3.0\n");
    let o = run(&["run", "--mode", "t1", "--scenario", &p, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("foo") && e.contains("radar.prf"), "{e}");

    let p = write(dir.path(), "mode = \"t1\"\n[jammer]\nactive = true\n");
    assert_eq!(run(&["run", "--mode", "t1", "--scenario", &p, "--out", out]).status.code(), Some(2));

    assert_eq!(run(&["run", "--mode", "t2", "--steer", "30", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["run", "--mode", "t5", "--out", out]).status.code(), Some(2));
    // Nothing is written when the configuration is rejected.
    assert!(!Path::new(out).join("summary.txt").exists());
}

#[test]
fn starved_training_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "mode = \"t2\"\nadaptive = true\ntargets = []\n[radar]\nr_min_m = 2000.0\nr_max_m = 2010.0\nn_pulses = 2\n[jammer]\nactive = true\n",
    );
    let o = run(&["run", "--mode", "t2", "--scenario", &p, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn defaults_round_trip_through_run() {
    let dir = tempfile::tempdir().unwrap();
    for mode in ["t1", "t2", "t3", "t4"] {
        let o = run(&["defaults", "--mode", mode]);
        assert!(o.status.success());
        let p = dir.path().join(format!("{mode}.toml"));
        std::fs::write(&p, &o.stdout).unwrap();
        let cfg = aesa_chain::harness::load_config(&p).unwrap();
        assert_eq!(cfg.mode.to_string(), mode);
    }
}
