//! Black-box tests of the binary: exit codes, determinism, file formats,
//! and the output-directory override.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_waveguide-tomo")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .env_remove("WAVEGUIDE_TOMO_OUTDIR")
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn simulate_preset_writes_csv_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["simulate", "--preset", "free", "--out", "run.csv"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = read(&tmp.path().join("run.csv"));
    let mut lines = csv.lines();
    let header_comment = lines.next().unwrap();
    assert!(header_comment.starts_with("# config: {"));
    assert_eq!(
        lines.next().unwrap(),
        "t_gamma,p1,p2,p3,d,S,re_b1,im_b1,re_b2,im_b2,re_b3,im_b3"
    );
    // (a1 = 1, a3 = 0) start: the first row is exact in every column
    assert_eq!(
        lines.next().unwrap(),
        "0.00000000e0,1.00000000e0,0.00000000e0,0.00000000e0,1.00000000e0,1.00000000e0,\
         1.00000000e0,0.00000000e0,0.00000000e0,0.00000000e0,0.00000000e0,0.00000000e0"
    );

    let summary: serde_json::Value =
        serde_json::from_str(&read(&tmp.path().join("run.summary.json"))).unwrap();
    assert_eq!(summary["config"]["preset"], "free");
    let p1 = summary["final"]["p1"].as_f64().unwrap();
    assert!((p1 - 4.0 / 9.0).abs() < 2e-6, "final p1 = {p1}");
    assert!(summary["post_pulse"].is_null());
    assert!(summary["prediction"].is_null());
}

#[test]
fn simulate_fig3_final_difference_in_band() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["simulate", "--preset", "fig3", "--out", "fig3.csv"]);
    assert!(out.status.success());
    let csv = read(&tmp.path().join("fig3.csv"));
    let last = csv.lines().last().unwrap();
    let fields: Vec<f64> = last.split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(fields.len(), 12);
    let d = fields[4];
    assert!((0.305..=0.325).contains(&d), "final-row d = {d}");

    let summary: serde_json::Value =
        serde_json::from_str(&read(&tmp.path().join("fig3.summary.json"))).unwrap();
    let predicted = summary["prediction"]["d"].as_f64().unwrap();
    assert!((predicted - d).abs() < 5e-3);
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["simulate", "--preset", "fig4", "--out", "a.csv"],
        vec!["simulate", "--preset", "fig4", "--out", "b.csv"],
    ] {
        assert!(run_in(tmp.path(), &args).status.success());
    }
    assert_eq!(read(&tmp.path().join("a.csv")), read(&tmp.path().join("b.csv")));
    assert_eq!(
        read(&tmp.path().join("a.summary.json")).replace("a.csv", ""),
        read(&tmp.path().join("b.summary.json")).replace("b.csv", "")
    );

    // shot sampling is pinned by the seed
    for name in ["r1.json", "r2.json"] {
        let out = run_in(
            tmp.path(),
            &[
                "reconstruct", "--preset", "fig3", "--shots", "20000", "--seed", "7", "--out",
                name,
            ],
        );
        assert!(out.status.success());
    }
    assert_eq!(read(&tmp.path().join("r1.json")), read(&tmp.path().join("r2.json")));
}

#[test]
fn reconstruct_report_round_trips_the_preset_state() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["reconstruct", "--preset", "fig3", "--out", "rec.json"]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&read(&tmp.path().join("rec.json"))).unwrap();
    assert_eq!(report["phase_convention"], "phi1_minus_phi3");
    assert!(report["errors"]["dphi_rad"].as_f64().unwrap() <= 0.05);
    assert!(report["errors"]["a1_sq"].as_f64().unwrap() <= 0.02);
    assert_eq!(report["flags"]["phase_indeterminate"], false);
    assert_eq!(report["records"]["pi"]["pulse_kind"], "pi");
    assert_eq!(report["records"]["half_pi"]["pulse_kind"], "half_pi");
    // truth for the preset: Δφ = −0.4π
    let truth = report["truth"]["dphi_rad"].as_f64().unwrap();
    assert!((truth + 0.4 * std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn sweep_writes_grid_and_optional_surfaces() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "grid.json",
        r#"{"grid": {"a1_sq": [0.3, 0.5], "dphi_pi": [-0.5, 0.0, 0.5]}}"#,
    );
    let out = run_in(
        tmp.path(),
        &[
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out",
            "sweep.csv",
            "--observables",
        ],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let sweep = read(&tmp.path().join("sweep.csv"));
    let mut lines = sweep.lines();
    assert!(lines.next().unwrap().starts_with("# config: "));
    assert_eq!(
        lines.next().unwrap(),
        "a1_sq_true,dphi_true,a1_sq_est,dphi_est,err_pop,err_phase"
    );
    assert_eq!(lines.count(), 6);

    let surfaces = read(&tmp.path().join("sweep_observables.csv"));
    let mut lines = surfaces.lines();
    assert!(lines.next().unwrap().starts_with("# config: "));
    assert_eq!(
        lines.next().unwrap(),
        "p3_true,a3_true,dphi_true,d_half_pi,s_half_pi,d_pi,s_pi"
    );
    assert_eq!(lines.count(), 6);
}

#[test]
fn validate_passes_and_reports_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["validate", "--out", "checks.json"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&read(&tmp.path().join("checks.json"))).unwrap();
    assert_eq!(report["pass"], true);
    let checks = report["checks"].as_array().unwrap();
    let names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"sylvester_vs_ode"));
    assert!(names.contains(&"covariant_identities"));
    assert!(names.contains(&"asymptotic_agreement"));
    for c in checks {
        assert_eq!(c["pass"], true, "check {c}");
        assert!(c["max_deviation"].as_f64().unwrap() <= c["tolerance"].as_f64().unwrap());
    }
}

#[test]
fn config_errors_exit_2_with_field_name() {
    let tmp = tempfile::tempdir().unwrap();

    // unknown key
    let bad = write_config(tmp.path(), "bad.json", r#"{"a1": 1.0, "phi_one": 0.1}"#);
    let out = run_in(tmp.path(), &["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("phi_one"));

    // conflicting angle keys
    let conflict = write_config(
        tmp.path(),
        "conflict.json",
        r#"{"a1": 1.0, "phi1_rad": 0.1, "phi1_pi": 0.5}"#,
    );
    let out = run_in(tmp.path(), &["simulate", "--config", conflict.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("phi1"));

    // missing file
    let out = run_in(tmp.path(), &["simulate", "--config", "nope.json"]);
    assert_eq!(out.status.code(), Some(1));

    // unphysical pulse design
    let strong = write_config(
        tmp.path(),
        "strong.json",
        r#"{"a1": 1.0,
            "pulse": {"design": {"u_target_pi": 1.0, "t_start_gamma": 0.0, "duration_gamma": 1.0}},
            "t_final_gamma": 2.0}"#,
    );
    let out = run_in(tmp.path(), &["simulate", "--config", strong.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hard cap"));
}

#[test]
fn exit_code_contract_is_stable() {
    // the numeric guard maps to 3 but is unreachable through a valid config
    // (the config layer caps dt at 0.01 while the guard sits at 0.05), so
    // the mapping is pinned at the library level
    use waveguide_tomo::Error;
    assert_eq!(
        Error::StepTooLarge {
            product: 0.06,
            limit: 0.05
        }
        .exit_code(),
        3
    );
    assert_eq!(Error::ValidationFailed { failed: 1, total: 4 }.exit_code(), 4);

    // an over-cap dt is rejected as a config error before the guard can see it
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "coarse.json", r#"{"a1": 1.0, "dt_gamma": 0.02}"#);
    let out = run_in(tmp.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));
}

#[test]
fn outdir_env_redirects_relative_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let outdir = tmp.path().join("redirected");
    let out = Command::new(bin())
        .args(["simulate", "--preset", "free", "--out", "run.csv"])
        .current_dir(tmp.path())
        .env("WAVEGUIDE_TOMO_OUTDIR", &outdir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(outdir.join("run.csv").exists());
    assert!(outdir.join("run.summary.json").exists());
    assert!(!tmp.path().join("run.csv").exists());

    // absolute --out wins over the environment
    let abs = tmp.path().join("explicit.csv");
    let out = Command::new(bin())
        .args(["simulate", "--preset", "free", "--out", abs.to_str().unwrap()])
        .current_dir(tmp.path())
        .env("WAVEGUIDE_TOMO_OUTDIR", &outdir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(abs.exists());
}
