use std::path::Path;
use std::process::{Command, Output};

fn magnav(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magnav")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = magnav(dir.path(), &["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("7/7 checks passed"));
}

#[test]
fn reference_simulation_reaches_desired_branch() {
    let dir = tempfile::tempdir().unwrap();
    let o = magnav(dir.path(), &["simulate", "--out-dir", "run"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains(": desired"), "{s}");
    let traj = std::fs::read_to_string(dir.path().join("run/trajectory.csv")).unwrap();
    assert!(traj.lines().count() > 1000);
}

#[test]
fn still_fluid_without_gravity_reaches_target() {
    let dir = tempfile::tempdir().unwrap();
    let o = magnav(dir.path(), &["simulate", "--u-max", "0", "--gravity", "off", "--diameter-um", "250"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(": desired"), "{}", stdout(&o));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[scenario]\ndiameter_um = 2000\n").unwrap();
    for args in [
        &["--config", "bad.toml", "simulate"][..],
        &["--config", "missing.toml", "validate"],
        &["simulate", "--entrance", "9"],
        &["sweep", "--design", "table9"],
        &["sweep", "--mode", "constant"],
        &["--flow", "grid:", "validate"],
        &["fit", "--in", "r.csv", "--basis", "cubic"],
    ] {
        assert_eq!(magnav(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn missing_results_file_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(magnav(dir.path(), &["analyze", "--in", "none.csv"]).status.code(), Some(1));
}

#[test]
fn sweep_fit_analyze_replay_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("design.toml"),
        "diameters_um = [50.0, 250.0, 1000.0]\narteries = [\"ACA\"]\nvelocities = [0.45]\nentrances = [3]\n",
    )
    .unwrap();
    let design = "custom:design.toml";
    let o = magnav(d, &["sweep", "--design", design, "--workers", "1", "--out", "a.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(magnav(d, &["sweep", "--design", design, "--workers", "4", "--out", "b.csv"]).status.code(), Some(0));
    assert_eq!(std::fs::read(d.join("a.csv")).unwrap(), std::fs::read(d.join("b.csv")).unwrap());

    assert_eq!(magnav(d, &["fit", "--in", "a.csv", "--out", "fit.json"]).status.code(), Some(0));
    assert_eq!(magnav(d, &["analyze", "--in", "a.csv", "--out-dir", "an"]).status.code(), Some(0));
    assert!(d.join("an/maps/map_ACA_0.45_g2.csv").exists());
    assert!(d.join("an/median_ratios.csv").exists());
    assert!(d.join("an/boxplots_diameter_um.csv").exists());

    let o = magnav(d, &["replay", "--fit", "fit.json", "--design", design, "--dynamic", "a.csv", "--out-dir", "rp"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("constant success"));
    assert!(d.join("rp/replay_report.txt").exists());
    assert!(d.join("rp/constant_results.csv").exists());

    let o =
        magnav(d, &["sweep", "--design", design, "--mode", "constant", "--constant", "0.1,0.4,0.1", "--out", "c.csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(d.join("c.csv")).unwrap().contains(",constant,"));
}
