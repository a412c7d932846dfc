//! Exit-code contract and file outputs of the `vtol` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn vtol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vtol")).args(args).output().unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("vtol-cli-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d.join(name)
}

fn write(name: &str, text: &str) -> String {
    let p = tmp(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const SHORT_HOVER: &str = r#"
name = "short_hover"
duration = 2.0
[[checks]]
rule = "altitude_hold"
t0 = 0.0
max_error_m = 0.5
"#;

#[test]
fn passing_run_exits_zero_and_writes_logs() {
    let sc = write("short.toml", SHORT_HOVER);
    let out = tmp("short_out");
    let o = vtol(&["run", &sc, "--out-dir", out.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("PASS altitude hold"), "{text}");
    for f in ["telemetry.csv", "metrics.csv", "scenario.toml", "sim_log.csv", "report.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn failing_check_exits_one() {
    let sc = write("strict.toml", &SHORT_HOVER.replace("0.5", "1e-9"));
    let o = vtol(&["run", &sc, "--out-dir", tmp("strict_out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL altitude hold"));
}

#[test]
fn config_errors_exit_two_with_line() {
    let sc = write("typo.toml", "name = \"x\"\nduraton = 1.0\n");
    let o = vtol(&["run", &sc]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("duraton"), "{err}");
    assert_eq!(vtol(&["run", "builtin:nope"]).status.code(), Some(2));
    let bad_order = write("order.toml", "[[events]]\nt = 2.0\naction = \"altitude\"\nheight = 1.0\n[[events]]\nt = 1.0\naction = \"altitude\"\nheight = 2.0\n");
    assert_eq!(vtol(&["run", &bad_order]).status.code(), Some(2));
}

#[test]
fn numerical_abort_exits_three() {
    // The linear-axis plant has no actuator saturation, so an unstable loop
    // grows until the arithmetic overflows.
    let sc = write(
        "blowup.toml",
        "name = \"blowup\"\nplant_mode = \"linear-axis\"\nduration = 60.0\n\
         [controller.rate]\nkp = [5.0, 5.0, 5.0]\noutput_limit = 1e308\n",
    );
    let o = vtol(&["run", &sc, "--out-dir", tmp("blowup_out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
}

#[test]
fn compare_reports_identity() {
    let a = tmp("cmp_a");
    let b = tmp("cmp_b");
    let sc = write("cmp.toml", SHORT_HOVER);
    vtol(&["run", &sc, "--out-dir", a.to_str().unwrap()]);
    vtol(&["run", &sc, "--out-dir", b.to_str().unwrap()]);
    let o = vtol(&["compare", a.join("telemetry.csv").to_str().unwrap(), b.join("telemetry.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("identical: true"));
    let o = vtol(&["compare", a.join("telemetry.csv").to_str().unwrap(), a.join("metrics.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tf_tools_read_the_default_loop() {
    let o = vtol(&["defaults", "tf"]);
    assert_eq!(o.status.code(), Some(0));
    let tf = write("loop.toml", &String::from_utf8(o.stdout).unwrap());
    let o = vtol(&["margins", &tf]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("gain_crossover_hz = 7.6"), "{text}");
    let bode = tmp("bode.csv");
    let o = vtol(&["bode", &tf, "--lo", "1", "--hi", "100", "--out", bode.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&bode).unwrap();
    assert!(csv.starts_with("freq_hz,mag_db,phase_deg\n"));
    // 2 decades at 200 points per decade.
    assert!(csv.lines().count() > 400);
    let o = vtol(&["biquads", &tf, "--sample-hz", "250"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("section,b0,b1,b2,a1,a2\n"));
}

#[test]
fn default_configs_load_back() {
    for kind in [&["defaults", "scenario"][..], &["defaults", "scenario", "--builtin", "transition"], &["defaults", "pipeline"]] {
        let o = vtol(kind);
        assert_eq!(o.status.code(), Some(0));
        assert!(!o.stdout.is_empty());
    }
}

#[test]
fn exported_aero_table_reproduces_builtin_run() {
    let o = vtol(&["defaults", "aero-table"]);
    assert_eq!(o.status.code(), Some(0));
    let table = write("aero.csv", &String::from_utf8(o.stdout).unwrap());
    let sc = write("aero_hover.toml", SHORT_HOVER);
    let (a, b) = (tmp("aero_a"), tmp("aero_b"));
    assert_eq!(vtol(&["run", &sc, "--out-dir", a.to_str().unwrap()]).status.code(), Some(0));
    let o = vtol(&["run", &sc, "--aero-table", &table, "--out-dir", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["telemetry.csv", "sim_log.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let log = std::fs::read_to_string(a.join("sim_log.csv")).unwrap();
    assert!(log.starts_with("t,px,py,pz,vx,vy,vz,eta,ex,ey,ez,wx,wy,wz,m1,m2,m3,m4,sat_flag\n"));
    assert_eq!(log.lines().count(), 501);
    let ragged = write("ragged.csv", "alpha_rad,V_ms,CL,CD\n0,0,0.1,0.1\n1,0,0.1,0.1\n1,5,0.1,0.1\n");
    assert_eq!(vtol(&["run", &sc, "--aero-table", &ragged]).status.code(), Some(2));
}

#[test]
fn pipeline_writes_all_artifacts() {
    let out = tmp("pipeline_out");
    let o = vtol(&["pipeline", "--out-dir", out.to_str().unwrap()]);
    // The magnitude-slope target is not met by the published gains.
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("PASS fitted peak frequency"), "{text}");
    for f in [
        "sweep.csv",
        "frf.csv",
        "bode_plant.csv",
        "bode_controller.csv",
        "bode_loop.csv",
        "fitted_plant.toml",
        "fit_report.txt",
        "metrics.csv",
        "pipeline.toml",
        "report.txt",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let fit = std::fs::read_to_string(out.join("fit_report.txt")).unwrap();
    assert!(fit.contains("delay = ") && fit.contains("max_db"), "{fit}");
    let cfg = out.join("pipeline.toml");
    let again = tmp("pipeline_again");
    let o = vtol(&["pipeline", cfg.to_str().unwrap(), "--out-dir", again.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(std::fs::read(out.join("frf.csv")).unwrap(), std::fs::read(again.join("frf.csv")).unwrap());
}
