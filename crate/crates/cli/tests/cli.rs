//! End-to-end tests of the `ssdl` binary: flag handling, exit codes,
//! deterministic outputs, and resolved-config replay.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ssdl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssdl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn theory_text_and_json_agree() {
    let text = ssdl(&["theory", "--n", "1024", "--p", "2", "--alpha", "1"]);
    assert!(text.status.success(), "stderr: {}", stderr(&text));
    let text = stdout(&text);
    assert!(text.contains("l_star = 38"), "text output was:\n{text}");

    let json = ssdl(&["theory", "--n", "1024", "--p", "2", "--alpha", "1", "--json"]);
    assert!(json.status.success(), "stderr: {}", stderr(&json));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&json)).expect("valid JSON");
    assert_eq!(doc["l_star"], 38, "json l_star = {}", doc["l_star"]);
    let eps = doc["eps_n"].as_f64().expect("eps_n is a number");
    let eps_line = text
        .lines()
        .find_map(|l| l.strip_prefix("eps_n = "))
        .expect("text has eps_n");
    assert_eq!(
        eps_line.parse::<f64>().expect("parses"),
        eps,
        "text and JSON eps_n disagree"
    );
}

#[test]
fn theory_out_writes_report_and_config() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("t");
    let run = ssdl(&[
        "theory", "--n", "4096", "--p", "1", "--alpha", "0.5",
        "--out", out.to_str().expect("utf8"),
    ]);
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    for file in ["report.json", "report.txt", "config.json"] {
        assert!(out.join(file).is_file(), "{file} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&read(&out.join("report.json"))).expect("valid JSON");
    assert!(report["eps_n"].is_f64(), "report.json eps_n: {}", report["eps_n"]);
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let run = ssdl(&["theory", "--p", "2", "--alpha", "1"]);
    assert!(!run.status.success(), "should fail without --n");
    let err = stderr(&run);
    assert!(err.contains("--n"), "stderr should name the flag:\n{err}");
}

#[test]
fn sample_prior_is_deterministic_and_handles_zero_draws() {
    let dir = tempfile::tempdir().expect("tempdir");
    let zero = dir.path().join("zero");
    let run = ssdl(&[
        "sample-prior", "--widths", "1,3,1", "--draws", "0",
        "--out", zero.to_str().expect("utf8"),
    ]);
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    assert_eq!(read(&zero.join("draws.txt")), "", "zero draws mean an empty file");

    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let run = ssdl(&[
            "sample-prior", "--widths", "1,3,1", "--draws", "5", "--seed", "9",
            "--out", out.to_str().expect("utf8"),
        ]);
        assert!(run.status.success(), "stderr: {}", stderr(&run));
    }
    let text = read(&a.join("draws.txt"));
    assert_eq!(text, read(&b.join("draws.txt")), "same seed, same draws");
    assert_eq!(
        text.matches("# draw ").count(),
        5,
        "expected 5 draw blocks in:\n{text}"
    );
}

#[test]
fn sample_prior_rejects_contradictory_shape_flags() {
    let both = ssdl(&[
        "sample-prior", "--widths", "1,3,1", "--template", "1,1,2", "--draws", "1",
    ]);
    assert!(!both.status.success(), "--widths with --template should fail");
    let neither = ssdl(&["sample-prior", "--draws", "1"]);
    assert_eq!(
        neither.status.code(),
        Some(2),
        "no shape at all is a contract error: {}",
        stderr(&neither)
    );
}

#[test]
fn rate_study_is_deterministic_and_replays_from_config() {
    let dir = tempfile::tempdir().expect("tempdir");
    let args = [
        "rate-study", "--ns", "64,128", "--replicates", "1",
        "--iterations", "800", "--burn-in", "200", "--thinning", "10",
    ];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let run = ssdl(&[&args[..], &["--out", out.to_str().expect("utf8")]].concat());
        assert!(run.status.success(), "stderr: {}", stderr(&run));
    }
    let cells = read(&a.join("cells.csv"));
    assert_eq!(cells, read(&b.join("cells.csv")), "reruns must match");
    assert_eq!(cells.lines().count(), 3, "header + 2 cells in:\n{cells}");

    let c = dir.path().join("c");
    let replay = ssdl(&[
        "rate-study",
        "--config", a.join("config.json").to_str().expect("utf8"),
        "--ns", "9999", // ignored: --config wins
        "--out", c.to_str().expect("utf8"),
    ]);
    assert!(replay.status.success(), "stderr: {}", stderr(&replay));
    for file in ["cells.csv", "medians.csv", "summary.json", "config.json", "study.svg"] {
        assert_eq!(
            read(&a.join(file)),
            read(&c.join(file)),
            "replayed {file} must be byte-identical"
        );
    }
}

#[test]
fn fit_replays_from_config() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = dir.path().join("a");
    let run = ssdl(&[
        "fit", "--widths", "1,3,1", "--n", "30", "--iterations", "2000",
        "--burn-in", "500", "--thinning", "5", "--probe", "0.5",
        "--out", a.to_str().expect("utf8"),
    ]);
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    let b = dir.path().join("b");
    let replay = ssdl(&[
        "fit",
        "--config", a.join("config.json").to_str().expect("utf8"),
        "--widths", "1,9,1", // ignored: --config wins
        "--out", b.to_str().expect("utf8"),
    ]);
    assert!(replay.status.success(), "stderr: {}", stderr(&replay));
    assert_eq!(
        read(&a.join("summary.json")),
        read(&b.join("summary.json")),
        "replayed summary must be byte-identical"
    );
}

#[test]
fn fit_reads_csv_datasets() {
    let dir = tempfile::tempdir().expect("tempdir");
    let data = dir.path().join("data.csv");
    fs::write(&data, "0.1,0.5\n0.4,0.2\n0.9,0.8\n").expect("write data");
    let out = dir.path().join("out");
    let run = ssdl(&[
        "fit", "--data", data.to_str().expect("utf8"), "--widths", "1,2,1",
        "--iterations", "1000", "--burn-in", "200",
        "--out", out.to_str().expect("utf8"),
    ]);
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    let doc: serde_json::Value =
        serde_json::from_str(&read(&out.join("summary.json"))).expect("valid JSON");
    assert!(doc["kept_draws"].as_u64().expect("count") > 0, "doc: {doc}");

    fs::write(&data, "0.1,0.5\nbad,0.2\n").expect("write data");
    let run = ssdl(&[
        "fit", "--data", data.to_str().expect("utf8"), "--widths", "1,2,1",
        "--out", out.to_str().expect("utf8"),
    ]);
    assert_eq!(run.status.code(), Some(2), "bad CSV is a parse error: {}", stderr(&run));
}

#[test]
fn oracle_check_passes_on_the_canonical_instance() {
    let run = ssdl(&["oracle-check"]);
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    let text = stdout(&run);
    assert!(text.contains("pattern TV distance"), "output was:\n{text}");
}

#[test]
fn exit_codes_follow_the_failure_taxonomy() {
    // Contract violation: n below the minimum.
    let contract = ssdl(&["theory", "--n", "1", "--p", "2", "--alpha", "1"]);
    assert_eq!(contract.status.code(), Some(2), "stderr: {}", stderr(&contract));

    // Numerical failure: a single sample size cannot support a slope fit.
    let numerical = ssdl(&[
        "rate-study", "--ns", "64", "--replicates", "1",
        "--iterations", "400", "--burn-in", "100", "--out",
        tempfile::tempdir().expect("tempdir").path().join("r").to_str().expect("utf8"),
    ]);
    assert_eq!(numerical.status.code(), Some(3), "stderr: {}", stderr(&numerical));

    // Infeasible size: the quadrature oracle refuses before doing any work.
    let infeasible = ssdl(&["oracle-check", "--n", "300000"]);
    assert_eq!(infeasible.status.code(), Some(4), "stderr: {}", stderr(&infeasible));
}

#[test]
fn approx_demo_emits_the_gadget_table_and_audit() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("demo");
    let run = ssdl(&[
        "approx-demo", "--max-m", "3", "--ks", "8,16", "--grid", "2000",
        "--grid-2d", "81", "--audit-grid", "101",
        "--out", out.to_str().expect("utf8"),
    ]);
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    let csv = read(&out.join("gadgets.csv"));
    assert!(
        csv.starts_with("gadget,parameter,reference,claimed_bound,measured_error\n"),
        "csv was:\n{csv}"
    );
    assert_eq!(csv.lines().count(), 1 + 3 * 3 + 2 * 2, "csv was:\n{csv}");
    let audit: serde_json::Value =
        serde_json::from_str(&read(&out.join("audit.json"))).expect("valid JSON");
    let residual = audit["quartic_max_residual"].as_f64().expect("number");
    assert!(
        (residual - 22.5).abs() < 1e-6,
        "quartic residual should replicate at any grid: {residual}"
    );
    assert!(out.join("square-error.svg").is_file(), "svg missing");
}
