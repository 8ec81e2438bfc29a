use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_loopsoup")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.conf");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn passing_run_exits_zero_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "# quick\ngrid.points = 3\n");
    let out = dir.path().join("out");
    let (code, stdout) = run(&["thermo", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("PASS critical_density_routes"));
    let csv = std::fs::read_to_string(out.join("thermo_grid.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("mu,rho,m_mass,x,rate"));
    assert_eq!(csv.lines().count(), 4);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("thermo.json")).unwrap()).unwrap();
    assert_eq!(json["experiment"], "thermo");
    assert_eq!(json["config"]["grid.points"], "3");
}

#[test]
fn failing_criterion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid.points = 3\ntail.rel_tol = 0\n");
    let out = dir.path().join("out");
    let (code, stdout) = run(&["thermo", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("FAIL long_loop_tail"));
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let bad_key = write_config(dir.path(), "no_such_key = 1\n");
    assert_eq!(run(&["thermo", "--config", &bad_key, "--out", out]).0, 2);
    let ok = write_config(dir.path(), "grid.points = 3\n");
    assert_eq!(run(&["warp", "--config", &ok, "--out", out]).0, 2);
    assert_eq!(run(&["thermo", "--config", "/nonexistent.conf", "--out", out]).0, 2);
    let zero = write_config(dir.path(), "density.replicas = 0\n");
    assert_eq!(run(&["soup", "--config", &zero, "--out", out]).0, 2);
    let mismatch = write_config(dir.path(), "experiment = soup\n");
    assert_eq!(run(&["thermo", "--config", &mismatch, "--out", out]).0, 2);
    let odd_box = write_config(dir.path(), "criteria = density_identity\ndensity.n = 5\n");
    assert_eq!(run(&["soup", "--config", &odd_box, "--out", out]).0, 2);
    assert_eq!(run(&["thermo"]).0, 2);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "criteria = density_identity\ndensity.n = 4\ndensity.replicas = 5\nseed = 1\n");
    let read = |seed: &str| {
        let out = dir.path().join(format!("out{seed}"));
        let (code, _) = run(&["soup", "--config", &cfg, "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(code <= 1);
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("soup.json")).unwrap()).unwrap();
        (json["config"]["seed"].as_str().unwrap().to_string(), std::fs::read_to_string(out.join("soup_density.csv")).unwrap())
    };
    let (s1, a) = read("1");
    let (s2, b) = read("2");
    let (_, c) = read("1");
    assert_eq!((s1.as_str(), s2.as_str()), ("1", "2"));
    assert_ne!(a, b);
    assert_eq!(a, c);
}
