//! Black-box tests of the `kerrsim` binary: exit codes, file handling, and
//! byte-level determinism across runs and worker-thread counts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kerrsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kerrsim"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kerrsim-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_in(dir: &Path, args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = kerrsim();
    cmd.current_dir(dir).args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

#[test]
fn validate_succeeds_and_writes_nothing() {
    let dir = temp_dir("validate");
    let out = run_in(&dir, &["validate"], &[]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert_eq!(fs::read_dir(&dir).unwrap().count(), 0, "no files expected");
}

#[test]
fn usage_errors_exit_2() {
    let dir = temp_dir("usage");
    // unknown scenario
    let out = run_in(&dir, &["frobnicate"], &[]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown scenario"), "{stderr}");

    // unknown --set key
    let out = run_in(&dir, &["validate", "--set", "mystery=1"], &[]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // malformed --set
    let out = run_in(&dir, &["validate", "--set", "chi"], &[]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // missing scenario altogether (clap usage error)
    let out = run_in(&dir, &[], &[]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // unreadable config file
    let out = run_in(&dir, &["validate", "--config", "no-such-file.cfg"], &[]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // parse error in a config file, with a line number in the message
    fs::write(dir.join("bad.cfg"), "gamma = 1\nkappa_a = frog\n").unwrap();
    let out = run_in(&dir, &["validate", "--config", "bad.cfg"], &[]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn invalid_physics_exits_3() {
    let dir = temp_dir("physics");
    let out = run_in(&dir, &["validate", "--set", "kappa_a=-1"], &[]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");

    let out = run_in(&dir, &["parity", "--set", "window_start=1"], &[]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");

    let out = run_in(&dir, &["cascade", "--set", "n_b=2"], &[]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    assert_eq!(fs::read_dir(&dir).unwrap().count(), 0, "no partial files on failure");
}

#[test]
fn rates_writes_default_named_csv_with_config_echo() {
    let dir = temp_dir("rates");
    let out = run_in(&dir, &["rates", "--set", "n_points=11", "--set", "t_max=5"], &[]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let csv = fs::read_to_string(dir.join("rates.csv")).unwrap();
    assert!(csv.starts_with("# scenario = rates\n"));
    assert!(csv.contains("# seed = 42\n"));
    assert!(csv.contains("t,source_rate,p_abs,emission_rate,p_out\n"));
    assert!(!csv.contains('\r'), "LF line endings only");
}

#[test]
fn out_and_seed_flags_are_honored() {
    let dir = temp_dir("flags");
    let out = run_in(
        &dir,
        &[
            "histogram",
            "--set",
            "n_trials=500",
            "--out",
            "custom.csv",
            "--seed",
            "7",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let csv = fs::read_to_string(dir.join("custom.csv")).unwrap();
    assert!(csv.contains("# seed = 7\n"));
}

#[test]
fn same_seed_is_byte_identical_across_thread_counts() {
    let dir = temp_dir("determinism");
    let args = ["histogram", "--set", "n_trials=2000", "--out"];
    for (name, threads) in [("a.csv", "1"), ("b.csv", "8"), ("c.csv", "8")] {
        let mut full: Vec<&str> = args.to_vec();
        full.push(name);
        let out = run_in(&dir, &full, &[("RAYON_NUM_THREADS", threads)]);
        assert_eq!(out.status.code(), Some(0), "{out:?}");
    }
    let a = fs::read(dir.join("a.csv")).unwrap();
    let b = fs::read(dir.join("b.csv")).unwrap();
    let c = fs::read(dir.join("c.csv")).unwrap();
    assert_eq!(a, b, "1 vs 8 worker threads");
    assert_eq!(b, c, "repeated run");
}

#[test]
fn config_file_plus_overrides() {
    let dir = temp_dir("config");
    fs::write(
        dir.join("run.cfg"),
        "# conditional-statistics run\nkappa_a = 0.25\nn_trials = 1000\nout = first.csv\n",
    )
    .unwrap();
    let out = run_in(
        &dir,
        &["conditional", "--config", "run.cfg", "--set", "n_trials=500"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let csv = fs::read_to_string(dir.join("first.csv")).unwrap();
    assert!(csv.contains("# n_trials = 500\n"), "--set wins over the file");
    assert!(csv.contains("variance_paper,"));
    assert!(csv.contains("variance_exact,"));
}
