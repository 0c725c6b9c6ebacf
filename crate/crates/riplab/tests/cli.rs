//! End-to-end checks of the `riplab` binary: exit codes, report files,
//! determinism, and the validate subcommand.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use riplab::report::Report;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_riplab")
}

fn run(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("riplab-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn demo_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/np_demo.toml")
}

#[test]
fn run_subcommand_writes_a_report_and_exits_zero() {
    let dir = scratch_dir("run");
    let out = dir.join("report.json");
    let output = run(&[
        "run",
        "--config",
        demo_config().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("gap > 1/3: HOLDS"), "stdout: {stdout}");
    assert!(stdout.contains("decider agreement: PASS"));
    assert!(stdout.contains("CERTIFIED"));

    let report = Report::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.inputs.len(), 4);
    assert!(report.gap.as_ref().unwrap().holds);
    assert!(report.decide.as_ref().unwrap().all_agree);
    let amplify = report.amplify.as_ref().unwrap();
    assert_eq!(amplify.rho, 9583);
    assert!(amplify.meets_bound);
    let transform = report.transform.as_ref().unwrap();
    assert_eq!(transform.completeness.exact, "1");
    assert_eq!(transform.soundness.exact, "1/2");

    // Round trip: parse, reserialize, parse again, equal.
    let json = report.to_json().unwrap();
    assert_eq!(Report::from_json(&json).unwrap(), report);
}

#[test]
fn identical_configs_produce_identical_reports_modulo_timestamp() {
    let dir = scratch_dir("determinism");
    let first = dir.join("first.json");
    let second = dir.join("second.json");
    for out in [&first, &second] {
        let output = run(&[
            "run",
            "--config",
            demo_config().to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success());
    }
    let mut a = Report::from_json(&fs::read_to_string(&first).unwrap()).unwrap();
    let mut b = Report::from_json(&fs::read_to_string(&second).unwrap()).unwrap();
    a.generated_unix = 0;
    b.generated_unix = 0;
    assert_eq!(a, b);
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn validate_passes_on_correct_labels_and_fails_on_swapped_ones() {
    let output = run(&["validate", "--config", demo_config().to_str().unwrap()]);
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("PASS: all answers match their labels"));

    // Swap the labels: satisfiable instances declared nonmembers.
    let dir = scratch_dir("validate");
    for file in ["phi1.cnf", "phi2.cnf", "chain3.cnf", "square2.cnf"] {
        fs::copy(
            Path::new(env!("CARGO_MANIFEST_DIR"))
                .join("data")
                .join(file),
            dir.join(file),
        )
        .unwrap();
    }
    let config = dir.join("swapped.toml");
    fs::write(
        &config,
        r#"
[protocol]
kind = "np"

[inputs]
members = ["phi2.cnf"]
nonmembers = ["phi1.cnf"]
"#,
    )
    .unwrap();
    let output = run(&["validate", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("FAIL"));
}

#[test]
fn missing_formula_file_exits_with_config_error() {
    let dir = scratch_dir("missing");
    let config = dir.join("missing.toml");
    fs::write(
        &config,
        r#"
[protocol]
kind = "np"

[inputs]
members = ["no-such-file.cnf"]
"#,
    )
    .unwrap();
    let output = run(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("no-such-file.cnf"));
}

#[test]
fn exceeded_caps_exit_with_code_three() {
    let output = run(&[
        "gap",
        "--config",
        demo_config().to_str().unwrap(),
        "--caps",
        "4",
    ]);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn failing_gap_analysis_exits_with_code_one() {
    // gamma = 2 sits exactly on the strictness boundary: 1/2 > 1/2 fails.
    let dir = scratch_dir("boundary");
    for file in ["phi1.cnf", "phi2.cnf"] {
        fs::copy(
            Path::new(env!("CARGO_MANIFEST_DIR"))
                .join("data")
                .join(file),
            dir.join(file),
        )
        .unwrap();
    }
    let config = dir.join("boundary.toml");
    fs::write(
        &config,
        r#"
[protocol]
kind = "np"

[inputs]
members = ["phi1.cnf"]
nonmembers = ["phi2.cnf"]

[analysis]
run = ["gap"]
gap_gamma = "2"
"#,
    )
    .unwrap();
    let output = run(&["gap", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stdout).contains("gap > 1/2: FAILS"));
}

#[test]
fn csv_format_exports_the_gap_table() {
    let dir = scratch_dir("csv");
    let out = dir.join("gaps.csv");
    let output = run(&[
        "gap",
        "--config",
        demo_config().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(output.status.success());
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("label,member,gap_exact,gap_dec,passes"));
    assert!(csv.contains("phi1.cnf,true,1/2,0.5,true"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn other_demo_configs_run_clean() {
    for config in ["data/oracle_demo.toml", "data/toy_demo.toml"] {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(config);
        let output = run(&["run", "--config", path.to_str().unwrap()]);
        assert!(
            output.status.success(),
            "{config} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
}
