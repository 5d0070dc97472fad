use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eitcav"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn headers_match_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            vec!["response", "--preset", "fig2a", "--points", "11", "--out", "r.csv"],
            "r.csv",
            "k_rad_per_m, delta_k_over_k0, re_g11, im_g11, abs_g11, abs_g12, abs_g21, p_absorb_a",
        ),
        (
            vec!["pulse", "--preset", "fig3", "--tau-s-rel", "1", "--out", "p.csv"],
            "p.csv",
            "t_s, abs2_in, abs2_out_a, abs2_out_b, frac_front, frac_H, frac_V, frac_behind",
        ),
        (
            vec!["intracavity", "--preset", "fig2a", "--out", "i.csv"],
            "i.csv",
            "segment, re, im, abs2_ratio_to_input",
        ),
        (
            vec!["loss", "--preset", "fig4", "--points", "3", "--out", "l.csv"],
            "l.csv",
            "A_value, which_mirrors, P_bar",
        ),
        (vec!["ifm", "--preset", "fig4", "--out", "f.csv"], "f.csv", "quantity, closed_form, exact"),
    ];
    for (args, file, expected) in cases {
        let out = run(&args, dir.path());
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(header(&dir.path().join(file)), expected);
        assert!(dir.path().join(format!("{file}.manifest.json")).exists());
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let file = format!("{name}.csv");
        let out = run(&["pulse", "--preset", "fig3", "--tau-s-rel", "4", "--out", &file], dir.path());
        assert!(out.status.success());
        let file = format!("{name}.json");
        let out = run(&["response", "--preset", "fig2b", "--format", "json", "--out", &file], dir.path());
        assert!(out.status.success());
    }
    for ext in ["csv", "json"] {
        let a = fs::read(dir.path().join(format!("a.{ext}"))).unwrap();
        let b = fs::read(dir.path().join(format!("b.{ext}"))).unwrap();
        assert_eq!(a, b, "{ext}");
    }
}

#[test]
fn manifest_records_the_resolved_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["loss", "--preset", "fig4", "--sweep", "H", "--points", "2", "--out", "l.csv"], dir.path());
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("l.csv.manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(manifest["command"], "loss");
    assert_eq!(manifest["preset"], "fig4");
    assert_eq!(manifest["options"]["sweep"][0], "H");
    assert_eq!(manifest["device"]["bs2"]["reflectivity"], 1e-6);
    assert!(manifest["options"]["tau_s"].as_f64().unwrap() > 0.0);
    assert!(manifest["determinism"].as_str().unwrap().contains("byte-identical"));
}

#[test]
fn config_file_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = eitcav_core::device::preset("fig2a").unwrap();
    let path = dir.path().join("device.cfg");
    eitcav_core::config::save_scenario(&scenario, &path).unwrap();
    let from_file = run(&["response", "--config", "device.cfg", "--points", "5"], dir.path());
    let from_preset = run(&["response", "--preset", "fig2a", "--points", "5"], dir.path());
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, from_preset.stdout);
}

#[test]
fn invalid_input_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["response", "--preset", "nope"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));

    let text = eitcav_core::config::render_scenario(&eitcav_core::device::preset("fig2a").unwrap())
        .replace("bs1.R = 1e-1", "bs1.R = 1.5e0");
    fs::write(dir.path().join("bad.cfg"), text).unwrap();
    let out = run(&["ifm", "--config", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(&["pulse", "--preset", "fig3", "--tau-s", "-1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_guards_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["oracle-check", "--preset", "fig2a", "--points", "1", "--max-iter", "5"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not converge"));
}

#[test]
fn oracle_cross_checks_pass_on_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["oracle-check", "--preset", "fig2b", "--points", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["intracavity", "--preset", "fig2b", "--oracle"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn xpm_reports_in_text_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["xpm", "--preset", "rubidium-xpm"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("delta_phi_rad = 2.645"));
    assert!(text.contains("p2_over_delta_phi = 6.28318530717958"));

    let out = run(&["feasibility", "--preset", "rubidium-xpm", "--format", "json"], dir.path());
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["report"]["conditions"].as_array().unwrap().len() >= 9);
    assert!(doc["delta_phi_numeric_rad"].as_f64().unwrap() > 0.0);
}
