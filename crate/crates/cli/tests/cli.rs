use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cavity_cyclicity::fitting::{DataSeries, SeriesX};
use cavity_cyclicity::presets;
use cavity_cyclicity::spin_model::{detuned_purcell, CyclicityModel};
use serde_json::Value;
use tempfile::TempDir;

fn cyclicity(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyclicity"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn simulate_writes_one_row_per_pulse() {
    let tmp = TempDir::new().unwrap();
    ok(&cyclicity(
        tmp.path(),
        &["simulate", "--seed", "1", "--out", "run"],
    ));
    let csv = fs::read_to_string(tmp.path().join("run/record.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1_000_000 + 1);
    let echo = json(&tmp.path().join("run/config.json"));
    assert_eq!(echo["sim"]["seed"], 1);
    assert_eq!(echo["scenario"]["schema_version"], 1);
    assert!(tmp.path().join("run/run.meta.json").is_file());
}

#[test]
fn config_errors_exit_with_usage_code() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "bad_ion.json", r#"{"ion": "ion9"}"#);
    write(
        tmp.path(),
        "unknown_key.json",
        r#"{"sim": {"n_pulses": 10, "pulses": 4}}"#,
    );
    write(tmp.path(), "odd.json", r#"{"sim": {"n_pulses": 11}}"#);
    write(
        tmp.path(),
        "both.json",
        r#"{"sim": {"snr": 10, "dark_counts_per_window": 0.1}}"#,
    );
    for cfg in [
        "bad_ion.json",
        "unknown_key.json",
        "odd.json",
        "both.json",
        "missing.json",
    ] {
        let out = cyclicity(tmp.path(), &["simulate", "--config", cfg, "--out", "x"]);
        assert_eq!(out.status.code(), Some(2), "{cfg}");
        assert!(!out.stderr.is_empty());
    }
    assert!(!tmp.path().join("x").exists());
    let out = cyclicity(tmp.path(), &["simulate", "--format", "xml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn g2_chain_recovers_simulated_cyclicity() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "c660.json",
        r#"{"name": "c660", "sim": {"cyclicity": 660, "eta": 0.2, "t1_dark_s": 1e12}}"#,
    );
    ok(&cyclicity(
        tmp.path(),
        &[
            "simulate",
            "--config",
            "c660.json",
            "--seed",
            "660",
            "--out",
            "sim",
        ],
    ));
    ok(&cyclicity(
        tmp.path(),
        &["analyze", "g2", "sim/record.csv", "--out", "g2"],
    ));
    let est = json(&tmp.path().join("g2/cyclicity.json"));
    let c = est["cyclicity"].as_f64().unwrap();
    assert!((c / 660.0 - 1.0).abs() < 0.1, "{c}");
    assert_eq!(est["fit"]["mode"], "difference");
    let rows = fs::read_to_string(tmp.path().join("g2/g2.csv")).unwrap();
    assert!(rows.starts_with("offset,g2,sigma\n"));
}

#[test]
fn json_records_carry_their_config() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "s.json", r#"{"sim": {"n_pulses": 20000}}"#);
    ok(&cyclicity(
        tmp.path(),
        &[
            "simulate", "--config", "s.json", "--format", "json", "--out", "a",
        ],
    ));
    fs::remove_file(tmp.path().join("a/config.json")).unwrap();
    ok(&cyclicity(
        tmp.path(),
        &["analyze", "window", "a/record.json", "--out", "w"],
    ));
    let w = json(&tmp.path().join("w/window.json"));
    assert_eq!(w["window"], 850);
    assert_eq!(w["states"].as_array().unwrap().len(), 20000 / 850);
}

#[test]
fn ml_and_bayes_chains_write_tables() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "s.json", r#"{"sim": {"n_pulses": 100000}}"#);
    ok(&cyclicity(
        tmp.path(),
        &["simulate", "--config", "s.json", "--out", "sim"],
    ));
    ok(&cyclicity(
        tmp.path(),
        &["analyze", "ml", "sim/record.csv", "--out", "ml"],
    ));
    let table = fs::read_to_string(tmp.path().join("ml/readout.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next(),
        Some("state,confidence,duration_pulses,start_pulse,terminated_by")
    );
    let summary = json(&tmp.path().join("ml/readout.json"));
    assert_eq!(
        summary["measurements"].as_u64().unwrap() as usize,
        lines.count()
    );
    assert!(summary["accuracy"].as_f64().unwrap() > 0.8);

    ok(&cyclicity(
        tmp.path(),
        &["analyze", "bayes", "sim/record.csv", "--out", "b"],
    ));
    let post = fs::read_to_string(tmp.path().join("b/posterior.csv")).unwrap();
    assert_eq!(post.lines().count(), 100_000 + 1);
}

#[test]
fn missing_record_exits_with_usage_code() {
    let tmp = TempDir::new().unwrap();
    let out = cyclicity(tmp.path(), &["analyze", "g2", "nope.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analysis_failure_exits_with_one() {
    let tmp = TempDir::new().unwrap();
    // without pumping or relaxation there is no decay to fit
    write(
        tmp.path(),
        "flat.json",
        r#"{"sim": {"n_pulses": 20000, "cyclicity": 1e15, "t1_dark_s": 1e15}}"#,
    );
    ok(&cyclicity(
        tmp.path(),
        &["simulate", "--config", "flat.json", "--out", "sim"],
    ));
    let out = cyclicity(
        tmp.path(),
        &["analyze", "g2", "sim/record.csv", "--out", "g2"],
    );
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn phi_sweep_spans_two_orders_of_magnitude() {
    let tmp = TempDir::new().unwrap();
    ok(&cyclicity(
        tmp.path(),
        &[
            "sweep", "phi", "--start", "0", "--stop", "359", "--step", "1",
        ],
    ));
    let data = DataSeries::read_csv(fs::File::open(tmp.path().join("out/sweep_phi.csv")).unwrap())
        .unwrap();
    assert_eq!(data.len(), 360);
    let summary = json(&tmp.path().join("out/sweep_phi.summary.json"));
    assert!(summary["max_over_min"].as_f64().unwrap() > 100.0);
}

#[test]
fn empty_sweep_range_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    for args in [
        ["--start", "10", "--stop", "0", "--step", "1"],
        ["--start", "0", "--stop", "10", "--step", "0"],
        ["--start", "0", "--stop", "10", "--step", "-1"],
    ] {
        let mut all = vec!["sweep", "theta"];
        all.extend(args);
        assert_eq!(
            cyclicity(tmp.path(), &all).status.code(),
            Some(2),
            "{args:?}"
        );
    }
}

#[test]
fn detuning_sweep_matches_lorentzian_model() {
    let tmp = TempDir::new().unwrap();
    let p = presets::ion_preset("ion1").unwrap().params;
    let (start, stop, step) = (-2.0 * p.kappa_hz, 2.0 * p.kappa_hz, p.kappa_hz / 4.0);
    ok(&cyclicity(
        tmp.path(),
        &[
            "sweep",
            "detuning",
            "--start",
            &start.to_string(),
            "--stop",
            &stop.to_string(),
            "--step",
            &step.to_string(),
            "--format",
            "json",
        ],
    ));
    let data: DataSeries = serde_json::from_str(
        &fs::read_to_string(tmp.path().join("out/sweep_detuning.json")).unwrap(),
    )
    .unwrap();
    let SeriesX::DetuningHz(d) = &data.x else {
        panic!("wrong axis")
    };
    assert_eq!(d.len(), 17);
    let model = CyclicityModel::new(presets::fitted_coupling(), presets::er_yso_site1(), &p);
    let o = presets::reference_orientation()
        .with_magnitude(112.0)
        .unwrap();
    for i in [0, d.len() - 1] {
        assert_eq!(data.y[i], model.detuned(&o, d[i]).unwrap());
    }
    // far off resonance the cavity no longer helps
    let far = detuned_purcell(p.purcell_max, stop, p.kappa_hz);
    assert!(far < p.purcell_max / 10.0);
    assert!(data.y[0] < 0.2 * data.y.iter().cloned().fold(0.0, f64::max));
}

#[test]
fn sweep_output_feeds_fit() {
    let tmp = TempDir::new().unwrap();
    ok(&cyclicity(
        tmp.path(),
        &[
            "sweep", "phi", "--start", "0", "--stop", "165", "--step", "15", "--out", "s",
        ],
    ));
    ok(&cyclicity(
        tmp.path(),
        &["fit", "angle", "s/sweep_phi.csv", "--out", "f"],
    ));
    let fit = json(&tmp.path().join("f/fit_angle.json"));
    let g = fit["coupling"]["g_perp_abs"].as_f64().unwrap();
    assert!((g - 0.024).abs() < 1e-4, "{g}");

    ok(&cyclicity(
        tmp.path(),
        &[
            "sweep", "t-rep", "--start", "0.001", "--stop", "0.2", "--step", "0.04", "--out", "t",
        ],
    ));
    ok(&cyclicity(
        tmp.path(),
        &["fit", "relaxation", "t/sweep_t_rep.csv", "--out", "r"],
    ));
    let fit = json(&tmp.path().join("r/fit_relaxation.json"));
    assert!((fit["t1_dark_s"].as_f64().unwrap() - 3.05).abs() < 1e-6);
    assert!((fit["cyclicity"].as_f64().unwrap() - 1500.0).abs() < 1e-6);
}

#[test]
fn project_improved_device() {
    let tmp = TempDir::new().unwrap();
    ok(&cyclicity(tmp.path(), &["project"]));
    let p = json(&tmp.path().join("out/projection.json"));
    assert!((p["metrics"]["f_avg"].as_f64().unwrap() - 0.996).abs() < 0.001);
    assert!((p["duration_s"].as_f64().unwrap() - 50e-6).abs() < 1e-9);
    assert_eq!(p["target_reachable"], true);

    ok(&cyclicity(
        tmp.path(),
        &["project", "--f-target", "0.999", "--out", "hi"],
    ));
    assert_eq!(
        json(&tmp.path().join("hi/projection.json"))["target_reachable"],
        false
    );

    write(
        tmp.path(),
        "weak.json",
        r#"{"project": {"device": {"efficiency": {"eta_cav": 0.01, "eta_downstream": 0.1},
            "cyclicity": 500, "p_ex": 1, "snr": 20, "t_rep_s": 5e-6}}}"#,
    );
    let out = cyclicity(
        tmp.path(),
        &["project", "--config", "weak.json", "--out", "w"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta*C"));
}
