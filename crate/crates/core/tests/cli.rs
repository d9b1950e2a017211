use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn projreg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projreg"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Rows of a CSV without the header, split on commas.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn tmp() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    (dir, path)
}

#[test]
fn verify_bound_monte_carlo_holds() {
    let (_g, dir) = tmp();
    let out = projreg(
        &dir,
        &[
            "verify-bound",
            "--n",
            "1000",
            "--density",
            "0.01",
            "--T",
            "0.5",
            "--S",
            "500",
            "--seed",
            "42",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = rows(&read(&dir, "verify-bound.csv"));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][0], "monte-carlo");
    assert_eq!(r[0].last().unwrap(), "true");
    assert!(read(&dir, "verify-bound.config").contains("seed=42\n"));
}

#[test]
fn verify_bound_small_n_adds_exhaustive_row() {
    let (_g, dir) = tmp();
    let out = projreg(&dir, &["verify-bound", "--n", "8", "--T", "0.5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = rows(&read(&dir, "verify-bound.csv"));
    assert_eq!(r.len(), 2);
    assert_eq!(r[1][0], "exhaustive");
    assert_eq!(r[1][3], "256");
}

#[test]
fn verify_bound_without_n_is_usage_error() {
    let (_g, dir) = tmp();
    let out = projreg(&dir, &["verify-bound", "--T", "0.5"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("`n`"), "{}", stderr(&out));
}

#[test]
fn failing_bound_exits_one() {
    // zero tolerance on a one-sample estimate of a vector with a single
    // non-zero entry: the sample norm is either 0 or ||w||, above the bound
    // whenever the coordinate is kept
    let (_g, dir) = tmp();
    let mut failures = 0;
    for seed in 0..8 {
        let out = projreg(
            &dir,
            &[
                "verify-bound",
                "--n",
                "100",
                "--S",
                "1",
                "--tolerance",
                "0",
                "--seed",
                &seed.to_string(),
            ],
        );
        match code(&out) {
            0 => {}
            1 => failures += 1,
            other => panic!("exit {other}: {}", stderr(&out)),
        }
    }
    assert!(failures > 0);
}

#[test]
fn clap_errors_and_help() {
    let (_g, dir) = tmp();
    assert_eq!(code(&projreg(&dir, &["verify-bound", "--bogus"])), 2);
    assert_eq!(code(&projreg(&dir, &["verify-bound", "--n", "ten"])), 2);
    assert_eq!(code(&projreg(&dir, &["frobnicate"])), 2);
    assert_eq!(code(&projreg(&dir, &["--help"])), 0);
    assert_eq!(code(&projreg(&dir, &["train", "--help"])), 0);
}

#[test]
fn hist_norms_counts_are_conserved() {
    let (_g, dir) = tmp();
    let out = projreg(
        &dir,
        &[
            "hist-norms",
            "--sp",
            "0.01,0.05,0.1",
            "--n",
            "2000",
            "--experiments",
            "700",
            "--seed",
            "1",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = rows(&read(&dir, "hist-norms.csv"));
    assert_eq!(r.len(), 150);
    for sp in ["0.01", "0.05", "0.1"] {
        let total: u64 = r
            .iter()
            .filter(|row| row[0] == sp)
            .map(|row| row[3].parse::<u64>().unwrap())
            .sum();
        assert_eq!(total, 700, "s_p {sp}");
    }
}

#[test]
fn hist_norms_single_unbounded_bin() {
    let (_g, dir) = tmp();
    let out = projreg(
        &dir,
        &[
            "hist-norms",
            "--sp",
            "0.05",
            "--bins",
            "1",
            "--bin-max",
            "inf",
            "--n",
            "500",
            "--experiments",
            "321",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        read(&dir, "hist-norms.csv"),
        "s_p,bin_lo,bin_hi,count\n0.05,0,inf,321\n"
    );
}

#[test]
fn hist_norms_rejects_bad_density() {
    let (_g, dir) = tmp();
    for sp in ["0", "1.5", "0.1,-0.2"] {
        assert_eq!(
            code(&projreg(
                &dir,
                &[
                    "hist-norms",
                    "--sp",
                    sp,
                    "--n",
                    "100",
                    "--experiments",
                    "10"
                ]
            )),
            2,
            "sp {sp}"
        );
    }
}

#[test]
fn penalty_sweep_default_grid() {
    let (_g, dir) = tmp();
    let out = projreg(&dir, &["penalty-sweep", "--n", "1000", "--seed", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r: Vec<Vec<f64>> = rows(&read(&dir, "penalty-sweep.csv"))
        .iter()
        .map(|row| row.iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(r.len(), 40);
    let at_one_percent = r
        .iter()
        .find(|row| (row[0] - 0.01).abs() < 1e-9)
        .expect("grid contains 0.01");
    assert!(
        at_one_percent[3] < at_one_percent[1].min(at_one_percent[2]),
        "{at_one_percent:?}"
    );
    let last = r.last().unwrap();
    assert_eq!(last[0], 1.0);
    assert!((last[2] - 1.0).abs() < 1e-12);
}

#[test]
fn penalty_sweep_grid_edges() {
    let (_g, dir) = tmp();
    assert_eq!(
        code(&projreg(&dir, &["penalty-sweep", "--densities", ""])),
        2
    );
    assert_eq!(code(&projreg(&dir, &["penalty-sweep", "--points", "0"])), 2);
    let out = projreg(
        &dir,
        &["penalty-sweep", "--densities", "0.25", "--out", "one.csv"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(read(&dir, "one.csv").lines().count(), 2);
}

#[test]
fn train_writes_two_rows_per_epoch() {
    let (_g, dir) = tmp();
    let out = projreg(
        &dir,
        &[
            "train",
            "--task",
            "synth-cls",
            "--reg",
            "proposed",
            "--sp",
            "0.01",
            "--alpha",
            "0.9",
            "--lambda",
            "1e-4",
            "--epochs",
            "20",
            "--seed",
            "42",
            "--n",
            "1000",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = read(&dir, "train.csv");
    assert!(text.starts_with("iteration,split,loss,accuracy,weight_magnitude,weight_density\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 40);
    assert_eq!(r.iter().filter(|row| row[1] == "test").count(), 20);
    let audit = read(&dir, "train.config");
    assert!(
        audit.contains("alpha=0.9\n") && audit.contains("reg=proposed\n"),
        "{audit}"
    );
}

#[test]
fn train_rejects_incompatible_task_and_loss() {
    let (_g, dir) = tmp();
    assert_eq!(
        code(&projreg(
            &dir,
            &["train", "--task", "synth-reg", "--loss", "ce"]
        )),
        2
    );
    assert_eq!(
        code(&projreg(
            &dir,
            &["train", "--task", "synth-cls", "--loss", "mse"]
        )),
        2
    );
    assert_eq!(
        code(&projreg(
            &dir,
            &["train", "--task", "digits", "--loss", "mse"]
        )),
        2
    );
    assert_eq!(code(&projreg(&dir, &["train", "--task", "cifar"])), 2);
}

#[test]
fn projected_ce_training_has_finite_losses() {
    let (_g, dir) = tmp();
    let out = projreg(
        &dir,
        &[
            "train",
            "--loss",
            "projected-ce",
            "--reg",
            "none",
            "--task",
            "synth-cls",
            "--epochs",
            "3",
            "--n",
            "1000",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for row in rows(&read(&dir, "train.csv")) {
        assert!(row[2].parse::<f64>().unwrap().is_finite(), "{row:?}");
    }
}

#[test]
fn bundled_digits_train() {
    let (_g, dir) = tmp();
    let out = projreg(
        &dir,
        &[
            "train", "--task", "digits", "--epochs", "3", "--lr", "0.01", "--reg", "l1",
            "--lambda", "1e-5",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = rows(&read(&dir, "train.csv"));
    let acc: f64 = r.last().unwrap()[3].parse().unwrap();
    assert!(acc > 0.5, "digits test accuracy {acc}");
}

#[test]
fn missing_data_dir_is_runtime_error() {
    let (_g, dir) = tmp();
    assert_eq!(
        code(&projreg(
            &dir,
            &["train", "--task", "digits", "--data-dir", "nowhere"]
        )),
        1
    );
}

#[test]
fn flag_beats_config_file() {
    let (_g, dir) = tmp();
    fs::write(dir.join("run.cfg"), "sp=0.05\nepochs=1\nn=200\nn_test=50\n").unwrap();
    let out = projreg(&dir, &["train", "--config", "run.cfg", "--sp", "0.01"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let audit = read(&dir, "train.config");
    assert!(
        audit.contains("sp=0.01\n") && audit.contains("epochs=1\n"),
        "{audit}"
    );
}

#[test]
fn json_config_is_accepted() {
    let (_g, dir) = tmp();
    fs::write(
        dir.join("run.json"),
        r#"{"sp": [0.02, 0.2], "n": 300, "experiments": 40}"#,
    )
    .unwrap();
    let out = projreg(&dir, &["hist-norms", "--config", "run.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(read(&dir, "hist-norms.config").contains("sp=0.02,0.2\n"));
}

#[test]
fn unknown_config_key_is_named() {
    let (_g, dir) = tmp();
    fs::write(dir.join("typo.cfg"), "spp=0.05\n").unwrap();
    let out = projreg(&dir, &["train", "--config", "typo.cfg"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("spp"), "{}", stderr(&out));
}

#[test]
fn config_parse_error_names_line() {
    let (_g, dir) = tmp();
    fs::write(dir.join("bad.cfg"), "n=10\n\nthis is not a pair\n").unwrap();
    let out = projreg(&dir, &["verify-bound", "--config", "bad.cfg"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn empty_config_gives_defaults() {
    let (_g, dir) = tmp();
    fs::write(dir.join("empty.cfg"), "").unwrap();
    let a = projreg(
        &dir,
        &["penalty-sweep", "--config", "empty.cfg", "--out", "a.csv"],
    );
    let b = projreg(&dir, &["penalty-sweep", "--out", "b.csv"]);
    assert_eq!((code(&a), code(&b)), (0, 0));
    assert_eq!(read(&dir, "a.csv"), read(&dir, "b.csv"));
    assert_eq!(read(&dir, "a.config"), read(&dir, "b.config"));
}

#[test]
fn audit_file_reproduces_run() {
    let (_g, dir) = tmp();
    let first = projreg(
        &dir,
        &[
            "train",
            "--task",
            "synth-reg",
            "--reg",
            "proposed",
            "--epochs",
            "2",
            "--n",
            "300",
            "--d",
            "40",
            "--seed",
            "9",
            "--out",
            "first.csv",
        ],
    );
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    let again = projreg(
        &dir,
        &["train", "--config", "first.config", "--out", "again.csv"],
    );
    assert_eq!(code(&again), 0, "{}", stderr(&again));
    assert_eq!(read(&dir, "first.csv"), read(&dir, "again.csv"));
    assert_eq!(read(&dir, "first.config"), read(&dir, "again.config"));
}

#[test]
fn reruns_are_byte_identical() {
    let (_g, dir) = tmp();
    let args = [
        "hist-norms",
        "--sp",
        "0.01,0.1",
        "--n",
        "1000",
        "--experiments",
        "300",
        "--seed",
        "1",
    ];
    assert_eq!(code(&projreg(&dir, &args)), 0);
    let first = fs::read(dir.join("hist-norms.csv")).unwrap();
    assert_eq!(code(&projreg(&dir, &args)), 0);
    assert_eq!(first, fs::read(dir.join("hist-norms.csv")).unwrap());
    let other_seed = [
        "hist-norms",
        "--sp",
        "0.01,0.1",
        "--n",
        "1000",
        "--experiments",
        "300",
        "--seed",
        "2",
    ];
    assert_eq!(code(&projreg(&dir, &other_seed)), 0);
    assert_ne!(first, fs::read(dir.join("hist-norms.csv")).unwrap());
}
