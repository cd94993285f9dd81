use std::path::Path;
use std::process::{Command, Output};

use pseudohopf::field::PiecewiseField;
use pseudohopf::poly::Poly2;
use pseudohopf::scenario::{Scenario, Window};
use pseudohopf::unfold::UnfoldingParams;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudohopf")).args(args).output().unwrap()
}

fn write_scenario(dir: &Path, sc: &Scenario) -> String {
    let path = dir.join(format!("{}.toml", sc.name));
    std::fs::write(&path, sc.to_toml()).unwrap();
    path.to_str().unwrap().to_string()
}

fn sys_a2() -> Scenario {
    let mut sc = Scenario::for_field("sys-a2", &PiecewiseField::sys_a(2, 1.0), Window { center: 0.0, radius: 0.2 });
    sc.unfold = Some(UnfoldingParams::new(2, vec![-1.0, 1.0], 0.1).with_b(-1e-6));
    sc
}

#[test]
fn every_command_writes_its_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), &sys_a2());
    let out = dir.path().join("out");
    let commands = [
        "classify",
        "lyapunov",
        "unfold",
        "verify-ladder",
        "verify-lemma1",
        "verify-v2-limit",
        "cycles",
        "scan",
        "delta-dump",
        "portrait",
    ];
    for cmd in commands {
        let o = bin(&[cmd, "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join(format!("sys-a2.{cmd}.json"))).unwrap()).unwrap();
        assert_eq!(report["status"], "ok");
        assert_eq!(report["command"], cmd);
        assert!(report["diagnostics"].as_array().unwrap().is_empty());
    }
    let csv = std::fs::read_to_string(out.join("sys-a2.delta-dump.csv")).unwrap();
    assert!(csv.starts_with("x,delta\n"));
    let scan = std::fs::read_to_string(out.join("sys-a2.scan.csv")).unwrap();
    assert!(scan.starts_with("b,n_cycles,stability,sliding_kind,amplitude,predicted_amplitude\n"));
    let svg = std::fs::read_to_string(out.join("sys-a2.portrait.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("class=\"cycle\"") && svg.contains("class=\"fold\""));
    assert!(out.join("sys-a2.portrait.csv").exists());
}

#[test]
fn lemma1_report_and_seeded_draws() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), &sys_a2());
    let out = dir.path().join("out");
    let o = bin(&["verify-lemma1", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "11"]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("sys-a2.verify-lemma1.json")).unwrap()).unwrap();
    assert!(r["payload"]["report"]["max_residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["payload"]["exact"]["max_residual"].as_f64().unwrap(), 0.0);
    assert_eq!(r["payload"]["seeded"]["draws"].as_array().unwrap().len(), 50);
}

#[test]
fn normalized_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let messy = r#"
name = "messy"
[field]
upper_x = [[0, 0, 1]]
upper_y = [[4, 0, 1], [3, 0, -1], [0, 0, 0.0]]
lower_x = [[0, 0, -1]]
lower_y = [[3, 0, -1]]
[window]
center = 0
radius = 0.2
[integrator]
rel_tol = 1e-9
"#;
    let path = dir.path().join("messy.toml");
    std::fs::write(&path, messy).unwrap();
    let out = dir.path().join("out");
    let o = bin(&["classify", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap(), "--dump-normalized"]);
    assert_eq!(o.status.code(), Some(0));
    let dumped = std::fs::read_to_string(out.join("messy.normalized.toml")).unwrap();
    let first = Scenario::from_toml(&dumped).unwrap();
    assert_eq!(first, Scenario::from_toml(messy).unwrap());
    assert_eq!(first.to_toml(), dumped);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let cfg = write_scenario(dir.path(), &sys_a2());

    assert_eq!(bin(&["--help"]).status.code(), Some(0));
    assert_eq!(bin(&["classify"]).status.code(), Some(1));
    assert_eq!(bin(&["classify", "--config", &cfg, "--shift", "sideways"]).status.code(), Some(1));

    // an upper field that never comes back to Σ
    let mut escape = Scenario::for_field("escape", &PiecewiseField::sys_a(1, 1.0), Window { center: 0.0, radius: 0.1 });
    escape.field.upper_y = Poly2::constant(1.0);
    escape.integrator.max_time = 5.0;
    let esc = write_scenario(dir.path(), &escape);
    let o = bin(&["delta-dump", "--config", &esc, "--out", out]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    let mut unordered = sys_a2();
    unordered.name = "unordered".into();
    unordered.unfold = Some(UnfoldingParams::new(2, vec![1.0, -1.0], 0.1));
    let un = write_scenario(dir.path(), &unordered);
    assert_eq!(bin(&["verify-ladder", "--config", &un, "--out", out]).status.code(), Some(1));

    let no_unfold = Scenario::for_field("plain", &PiecewiseField::sys_a(1, 1.0), Window { center: 0.0, radius: 0.2 });
    let plain = write_scenario(dir.path(), &no_unfold);
    assert_eq!(bin(&["verify-lemma1", "--config", &plain, "--out", out]).status.code(), Some(1));
    assert_eq!(bin(&["classify", "--config", &plain, "--out", out, "--epsilon", "0.1"]).status.code(), Some(1));

    let o = bin(&["verify-ladder", "--config", &cfg, "--out", out, "--epsilon", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/sys-a2.verify-ladder.json")).unwrap()).unwrap();
    assert_eq!(r["status"], "mismatch");
    assert!(!r["diagnostics"].as_array().unwrap().is_empty());
}

#[test]
fn scan_without_unfold_uses_window_center() {
    // the same singularity moved to x = 0.5
    let dir = tempfile::tempdir().unwrap();
    let z = PiecewiseField::sys_a(1, 1.0).shift_x(-0.5);
    let mut sc = Scenario::for_field("moved", &z, Window { center: 0.5, radius: 0.2 });
    sc.scan.b_values = vec![-1e-4, 1e-4];
    let cfg = write_scenario(dir.path(), &sc);
    let out = dir.path().join("out");
    let o = bin(&["scan", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("moved.scan.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows[0].starts_with("-0.0001,1,unstable,attracting-sliding,"));
    assert!(rows[1].starts_with("0.0001,0,,repelling-sliding,"));
}
