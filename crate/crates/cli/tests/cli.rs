use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use opoly_cli::{run, JobConfig};
use opoly_core::lincomb::check_conditions;
use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.json"))
}

fn opoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opoly"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_config(command: &str, name: &str, extra: &[&str]) -> Output {
    let path = config(name);
    let mut args = vec![command, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    opoly(&args)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON report")
}

#[test]
fn passing_config_exits_zero() {
    let out = run_config("check", "chebyshev_t_k2_even", &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["schema"], 1);
    assert_eq!(report["command"], "check");
    assert_eq!(report["passed"], true);
    assert_eq!(report["result"]["agreement"], true);
}

#[test]
fn failing_check_exits_one() {
    let out = run_config("check", "broken_u_k1_beta5", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn config_errors_exit_two() {
    let out = run_config("check", "invalid_missing_ak", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("a_1..a_2"));

    let out = opoly(&["check", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));

    let out = opoly(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.json");
    std::fs::write(
        &path,
        r#"{"family": {"chebyshev": {"kind": 1}}, "combination": {"k": 1, "a": [0.3]}, "horizon": 30, "horizn": 3}"#,
    )
    .unwrap();
    let out = opoly(&["check", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cli_verdict_mirrors_library() {
    for name in [
        "chebyshev_u_k2_real",
        "broken_legendre_k2",
        "k2_real_roots",
        "k1_constant",
    ] {
        let job = JobConfig::load(&config(name)).unwrap().build().unwrap();
        let lib = check_conditions(&job.rec, &job.comb, job.rec.horizon(), 1e-10).unwrap();
        let outcome = run(opoly_cli::Command::Check, &job).unwrap();
        assert_eq!(outcome.passed, lib.verdict, "{name}");
        let out = run_config("check", name, &[]);
        assert_eq!(
            out.status.code(),
            Some(if lib.verdict { 0 } else { 1 }),
            "{name}"
        );
    }
}

#[test]
fn csv_tables_round_trip() {
    for command in ["check", "tilde", "zeros", "hk", "quad", "gen"] {
        let out = run_config(command, "chebyshev_u_k1_half", &["--format", "csv"]);
        assert_eq!(out.status.code(), Some(0), "{command}");
        let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
        let header = reader.headers().unwrap().clone();
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert!(!rows.is_empty(), "{command}");

        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&header).unwrap();
        for row in &rows {
            assert_eq!(row.len(), header.len());
            writer.write_record(row).unwrap();
        }
        assert_eq!(writer.into_inner().unwrap(), out.stdout, "{command}");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let out = run_config(
        "tilde",
        "chebyshev_t_k2_even",
        &["--out", target.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    let rows = report["result"]["recurrence"].as_array().unwrap();
    // gamma~_2 = 1/8 for T with a = (0, -1/8)
    assert!((rows[2]["gamma_tilde"].as_f64().unwrap() - 0.125).abs() < 1e-14);
}

#[test]
fn tolerance_flags_override_config() {
    // U satisfies the conditions exactly, so even a tiny tolerance passes
    let out = run_config("check", "chebyshev_u_k1", &["--tol-conditions", "1e-300"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["config"]["tolerances"]["conditions"], 1e-300);
}

#[test]
fn usage_errors_inside_commands_exit_two() {
    let out = run_config("zeros", "chebyshev_t_k1", &["--n", "99"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_three() {
    // lambda near 1e8: the generated coefficients overflow before n = 50
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("overflow.json");
    std::fs::write(
        &path,
        r#"{"family": {"k2": {"case": {"real_roots": {"a": 0, "b": 1, "d": 1, "f": 0}},
            "beta0": 0, "beta1": 0, "gamma1": 1}},
            "combination": {"k": 2, "a": [100, 0.0001]}, "horizon": 50}"#,
    )
    .unwrap();
    let out = opoly(&["gen", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("overflow"));
}

#[test]
fn gen_reports_case_data() {
    let out = run_config("gen", "k2_complex_roots", &[]);
    assert_eq!(out.status.code(), Some(0));
    let t = &json(&out)["result"]["k2"];
    assert_eq!(t["case"], "ComplexRoots");
    assert!(t["imaginary_residue"].as_f64().unwrap() < 1e-12);
    assert_eq!(
        json(&out)["result"]["family"]["beta"]
            .as_array()
            .unwrap()
            .len(),
        51
    );
}
