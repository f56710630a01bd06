use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn cfwp(args: &[&str]) -> Output {
    cfwp_env(args, None)
}

fn cfwp_env(args: &[&str], window: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cfwp"));
    cmd.args(args).env_remove("CFWP_WINDOW");
    if let Some(w) = window {
        cmd.env("CFWP_WINDOW", w);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_on_the_four_dimensional_family_holds() {
    let o = cfwp(&["check", "--config", s(&config("iwai-katayama.json"))]);
    assert_eq!(code(&o), 0);
    let report = stdout_json(&o);
    let names: Vec<&str> = report
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["condition"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["int", "a'", "b'", "c'"]);
    for r in report.as_array().unwrap() {
        assert_eq!(r["status"], "holds");
        assert!(r["narrative"].is_string() && r["evidence"].is_array());
    }
}

#[test]
fn check_on_a_slow_fiber_fails_with_evidence_files() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let csv = dir.path().join("csv");
    let o = cfwp(&[
        "check",
        "--config",
        s(&config("euclidean-alpha-half.json")),
        "--out",
        s(&out),
        "--csv-dir",
        s(&csv),
    ]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report[0]["condition"], "a");
    assert_eq!(report[0]["status"], "fails");
    let a = std::fs::read_to_string(csv.join("a.csv")).unwrap();
    assert!(a.starts_with("x,value\n"));
}

#[test]
fn malformed_and_unknown_configs_exit_64() {
    let dir = TempDir::new().unwrap();
    let broken = write(&dir, "broken.json", "{\"geometry\": ");
    assert_eq!(code(&cfwp(&["check", "--config", s(&broken)])), 64);
    let extra = write(
        &dir,
        "extra.json",
        r#"{"geometry": {"preset": "euclidean"}, "colour": 1}"#,
    );
    assert_eq!(code(&cfwp(&["check", "--config", s(&extra)])), 64);
    let both = write(
        &dir,
        "both.json",
        r#"{"geometry": {"preset": "euclidean", "alpha": "t"}}"#,
    );
    assert_eq!(code(&cfwp(&["check", "--config", s(&both)])), 64);
}

#[test]
fn unreadable_config_exits_74() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&cfwp(&["check", "--config", s(&missing)])), 74);
}

#[test]
fn solve_mode_on_flat_space() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("traj");
    let o = cfwp(&[
        "solve-mode",
        "--config",
        s(&config("euclidean-mode.json")),
        "--csv-dir",
        s(&csv),
    ]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["verdict"], "no-L2");
    assert_eq!(v["boundedDim"], 1);
    assert!(v["matchingResidual"].as_f64().unwrap() > 0.1);
    let files: Vec<_> = std::fs::read_dir(&csv).unwrap().collect();
    assert_eq!(files.len(), 1);
    let text = std::fs::read_to_string(csv.join("bounded-0.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,U,W"));
    assert!(lines.count() >= 256);
}

#[test]
fn zero_eigenvalue_has_no_bounded_solutions_and_no_files() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("traj");
    let o = cfwp(&[
        "solve-mode",
        "--config",
        s(&config("euclidean-mode.json")),
        "--set",
        "mode.lambda=0",
        "--csv-dir",
        s(&csv),
    ]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["verdict"], "no-L2");
    assert_eq!(v["boundedDim"], 0);
    assert_eq!(std::fs::read_dir(&csv).unwrap().count(), 0);
}

#[test]
fn solve_mode_without_a_mode_exits_64() {
    let o = cfwp(&["solve-mode", "--config", s(&config("iwai-katayama.json"))]);
    assert_eq!(code(&o), 64);
    assert!(String::from_utf8_lossy(&o.stderr).contains("mode"));
}

#[test]
fn sweep_on_the_four_dimensional_family() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.json");
    let csv = dir.path().join("csv");
    let o = cfwp(&[
        "sweep",
        "--config",
        s(&config("iwai-katayama-sweep.json")),
        "--out",
        s(&out),
        "--csv-dir",
        s(&csv),
        "--jobs",
        "2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["summary"]["headline"], "no-L2: 100%");
    assert_eq!(report["summary"]["total"], 270);
    let entry = &report["grid"][0];
    for key in ["mode", "verdict", "residual", "boundedDim", "p_increments"] {
        assert!(!entry[key].is_null() || key == "residual", "{key}");
    }
    let rows = std::fs::read_to_string(csv.join("sweep.csv")).unwrap();
    assert_eq!(rows.lines().count(), 271);
}

#[test]
fn sweep_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let o = cfwp(&[
            "sweep",
            "--config",
            s(&config("euclidean-sweep.json")),
            "--set",
            "sweep.k=[-1,1]",
            "--jobs",
            jobs,
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&o), 0);
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.json", "1"), run("b.json", "3"));
}

#[test]
fn oversized_grid_is_a_configuration_error() {
    let o = cfwp(&[
        "sweep",
        "--config",
        s(&config("euclidean-sweep.json")),
        "--set",
        "sweep.k=[-100,100]",
    ]);
    assert_eq!(code(&o), 64);
}

#[test]
fn lemmas_on_flat_space_pass() {
    let o = cfwp(&["lemmas", "--config", s(&config("euclidean-mode.json"))]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["all_pass"], true);
    for c in v["checks"].as_array().unwrap() {
        assert_ne!(c["status"], "fail", "{c}");
    }
}

#[test]
fn unit_conformal_factor_reproduces_the_profiles() {
    let o = cfwp(&[
        "reparam",
        "--config",
        s(&config("euclidean-unit-gamma.json")),
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,alpha,beta"));
    let mut n = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let sv = v[0];
        assert!((v[1] / (sv / 2f64.sqrt()) - 1.0).abs() < 1e-10, "{line}");
        assert!((v[2] / sv - 1.0).abs() < 1e-10, "{line}");
        n += 1;
    }
    assert!(n > 1000);
}

#[test]
fn reparam_needs_a_conformal_factor() {
    let o = cfwp(&["reparam", "--config", s(&config("euclidean-mode.json"))]);
    assert_eq!(code(&o), 64);
}

#[test]
fn window_variable_and_flag_validation() {
    let cfg = config("euclidean-mode.json");
    let o = cfwp_env(&["solve-mode", "--config", s(&cfg)], Some("1e-6,1e4"));
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["geometry"]["window"]["t_min"].as_f64(), Some(1e-6));
    assert_eq!(v["geometry"]["window"]["t_max"].as_f64(), Some(1e4));
    assert_eq!(
        code(&cfwp_env(&["check", "--config", s(&cfg)], Some("1e4"))),
        64
    );
    assert_eq!(
        code(&cfwp(&["solve-mode", "--config", s(&cfg), "--tol", "0.5"])),
        64
    );
    assert_eq!(
        code(&cfwp(&["solve-mode", "--config", s(&cfg), "--jobs", "0"])),
        64
    );
}

#[test]
fn floats_are_written_with_seventeen_digits() {
    let o = cfwp(&["solve-mode", "--config", s(&config("euclidean-mode.json"))]);
    let text = String::from_utf8(o.stdout).unwrap();
    let line = text
        .lines()
        .find(|l| l.contains("\"matchingResidual\""))
        .unwrap();
    let number = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = number.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.replace('.', "").len(), 17, "{number}");
}
