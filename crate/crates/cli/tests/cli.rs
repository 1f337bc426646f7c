//! Black-box runs of the binary: exit-code contract, determinism of the
//! report files, format and environment plumbing.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qslab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qslab"))
        .args(args)
        .current_dir(dir)
        .env_remove("QSLAB_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&qslab(&["--help"], tmp.path())), 0);
    assert_eq!(code(&qslab(&["--version"], tmp.path())), 0);
    assert_eq!(code(&qslab(&["no-such-command"], tmp.path())), 1);
    assert_eq!(code(&qslab(&["approx-mu", "--nope"], tmp.path())), 1);
    assert_eq!(
        code(&qslab(&["approx-mu", "--grid", "banana"], tmp.path())),
        1
    );
    // Valid flags, invalid parameter range: still a usage failure.
    assert_eq!(
        code(&qslab(
            &["approx-mu", "--sample-size", "10", "--seed", "1"],
            tmp.path()
        )),
        1
    );
}

#[test]
fn identical_configs_produce_identical_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "approx-mu",
        "--iterations",
        "5",
        "--sample-size",
        "2000",
        "--seed",
        "9",
        "--output-dir",
        "out",
    ];
    assert_eq!(code(&qslab(&args, tmp.path())), 0);
    let report_path = tmp.path().join("out/approx_mu.json");
    let sample_path = tmp.path().join("out/approx_mu_sample.csv");
    let report_first = fs::read(&report_path).unwrap();
    let sample_first = fs::read(&sample_path).unwrap();
    assert_eq!(code(&qslab(&args, tmp.path())), 0);
    assert_eq!(report_first, fs::read(&report_path).unwrap());
    assert_eq!(sample_first, fs::read(&sample_path).unwrap());

    let text = String::from_utf8(report_first).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["config"]["seed"], 9);
    assert_eq!(json["config"]["command"], "approx-mu");
    assert_eq!(json["version"], env!("CARGO_PKG_VERSION"));
    assert!(json["result"]["variance"].as_f64().unwrap() > 0.0);
}

#[test]
fn a_different_seed_changes_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |seed: &str, dir: &str| {
        let out = qslab(
            &[
                "approx-mu",
                "--iterations",
                "5",
                "--sample-size",
                "2000",
                "--seed",
                seed,
                "--output-dir",
                dir,
            ],
            tmp.path(),
        );
        assert_eq!(code(&out), 0);
        fs::read(tmp.path().join(dir).join("approx_mu_sample.csv")).unwrap()
    };
    assert_ne!(run("1", "a"), run("2", "b"));
}

#[test]
fn failed_claims_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    // A five-iteration approximation is real but nowhere near residual 1e-4.
    let out = qslab(
        &[
            "residual",
            "--max-cf",
            "0.0001",
            "--iterations",
            "5",
            "--sample-size",
            "2000",
            "--seed",
            "4",
            "--output-dir",
            "out",
        ],
        tmp.path(),
    );
    assert_eq!(code(&out), 2);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/residual.json")).unwrap())
            .unwrap();
    assert_eq!(json["result"]["pass"], false);
}

#[test]
fn verify_theorem1_passes_on_a_real_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qslab(
        &[
            "verify-theorem1",
            "--m",
            "-1",
            "--sigma",
            "0.5",
            "--iterations",
            "20",
            "--sample-size",
            "20000",
            "--seed",
            "7",
            "--output-dir",
            "out",
        ],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(tmp.path().join("out/verify_theorem1.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(json["result"]["pass"], true);
    assert_eq!(json["result"]["location"], -1.0);
}

#[test]
fn csv_format_writes_plot_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qslab(
        &[
            "chernoff",
            "--levels",
            "5,10",
            "--xs",
            "1",
            "--reps",
            "2000",
            "--format",
            "csv",
            "--output-dir",
            "out",
        ],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(tmp.path().join("out/chernoff_grid.csv")).unwrap();
    assert!(table.starts_with("level,x,bound"));
    assert_eq!(table.lines().count(), 3);
    assert!(tmp.path().join("out/chernoff.json").exists());
}

#[test]
fn attraction_of_a_cauchy_source_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qslab(
        &[
            "attraction",
            "--source",
            "cauchy",
            "--max-level",
            "4",
            "--reps",
            "2000",
            "--seed",
            "11",
            "--format",
            "csv",
            "--output-dir",
            "out",
        ],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let levels = fs::read_to_string(tmp.path().join("out/attraction_levels.csv")).unwrap();
    assert_eq!(levels.lines().count(), 6);
}

#[test]
fn output_dir_env_override_is_honored() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qslab"))
        .args([
            "simulate-quicksort",
            "--keys",
            "200",
            "--sample-size",
            "500",
            "--seed",
            "3",
        ])
        .current_dir(tmp.path())
        .env("QSLAB_OUTPUT_DIR", "from-env")
        .output()
        .expect("binary runs");
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("from-env/simulate_quicksort.json").exists());
}
