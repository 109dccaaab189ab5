use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use loghls::io::{read_density, Csv, Report};

fn loghls(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loghls"))
        .current_dir(dir)
        .env_remove("LOGHLS_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> Csv {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let mut csv = Csv::new(lines.next().unwrap().split(','));
    for line in lines {
        csv.push_raw(line.split(',').map(String::from).collect());
    }
    csv
}

#[test]
fn deficit_of_a_unit_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let out = loghls(dir.path(), &["--out", "o", "deficit", "--density", "gaussian:1", "--alpha", "0,1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read_csv(&dir.path().join("o/deficit.csv"));
    let d0 = csv.value(0, "deficit@0").unwrap();
    // ln 2 − γ_E, the deficit of the unit Gaussian at α = 0.
    assert!((d0 - (2f64.ln() - 0.577_215_664_901_532_9)).abs() < 1e-6, "{d0}");
    assert!(csv.value(0, "free_energy").is_none());
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let status = loghls(dir.path(), &["--out", out, "--n", "512", "flow", "--M", "2", "--t-end", "0.5"]).status;
        assert!(status.success());
    }
    for file in ["flow.csv", "flow_final.txt", "flow_report.txt"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(loghls(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(loghls(dir.path(), &["deficit", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(loghls(dir.path(), &["deficit", "--density", "nonsense:1"]).status.code(), Some(1));
    let failed = loghls(dir.path(), &["oracle", "--patch", "24", "--samples", "2000", "--tolerance", "1e-12"]);
    assert_eq!(failed.status.code(), Some(2), "{}", String::from_utf8_lossy(&failed.stderr));
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"n": 256, "rmax": 50, "max_iter": 3000, "t_end": 4}"#).unwrap();
    let rmax_of = |args: &[&str]| {
        let out = loghls(dir.path(), args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let f = read_density(&dir.path().join("o/stationary_density.txt")).unwrap();
        (f.grid().len(), f.grid().r_max())
    };
    assert_eq!(rmax_of(&["--out", "o", "stationary", "--M", "1", "--beta", "1.2"]), (2048, 200.0));
    assert_eq!(rmax_of(&["--out", "o", "--config", "c.json", "stationary", "--M", "1", "--beta", "1.2"]), (256, 50.0));
    assert_eq!(rmax_of(&["--out", "o", "--config", "c.json", "--rmax", "80", "stationary", "--M", "1", "--beta", "1.2"]), (256, 80.0));
    assert_eq!(rmax_of(&["--out", "o", "--config", "c.json", "stationary", "--n", "128", "--M", "1", "--beta", "1.2"]), (128, 50.0));
}

#[test]
fn config_rejects_unknown_keys_and_bad_json() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"no_such_flag": 1}"#).unwrap();
    fs::write(dir.path().join("broken.json"), "{").unwrap();
    for file in ["bad.json", "broken.json", "missing.json"] {
        let out = loghls(dir.path(), &["--config", file, "deficit"]);
        assert_eq!(out.status.code(), Some(1), "{file}");
    }
}

#[test]
fn environment_overrides_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_loghls"))
        .current_dir(dir.path())
        .env("LOGHLS_OUT", "from-env")
        .args(["--out", "from-flag", "deficit"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("from-env/deficit.csv").exists());
    assert!(!dir.path().join("from-flag").exists());
}

#[test]
fn stationary_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    assert!(loghls(dir.path(), &["--out", "o", "--n", "512", "stationary", "--M", "2", "--beta", "1.5"]).status.success());
    let report = Report::parse(&fs::read_to_string(dir.path().join("o/stationary_report.txt")).unwrap()).unwrap();
    assert_eq!(report.get("converged"), Some("true"));
    assert_eq!(report.get("in_regime"), Some("true"));
    let mass: f64 = report.get("mass").unwrap().parse().unwrap();
    assert!((mass - 2.0).abs() < 1e-10);
}

#[test]
fn scenario_listing_names_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = loghls(dir.path(), &["scenarios", "--list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for s in loghls::scenarios::registry() {
        assert!(text.contains(s.name), "{}", s.name);
    }
}
