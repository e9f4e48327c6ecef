//! Integration tests that exercise the `provsketch` binary end to end:
//! exit codes, the synth → featurize → train → detect → trace flow, config
//! provenance headers, and byte-identical reruns.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_provsketch"))
}

fn run_ok(args: &[&str], cwd: &Path) -> Output {
    let out = bin().args(args).current_dir(cwd).output().unwrap();
    assert!(
        out.status.success(),
        "provsketch {:?} failed with {:?}\nstdout: {}\nstderr: {}",
        args,
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(args: &[&str], cwd: &Path) -> i32 {
    bin()
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Every regular file under `dir`, relative path + contents, sorted.
fn dir_contents(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    fn walk(base: &Path, dir: &Path, out: &mut Vec<(PathBuf, Vec<u8>)>) {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                out.push((
                    p.strip_prefix(base).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                ));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out
}

#[test]
fn help_and_version_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(exit_code(&["--help"], tmp.path()), 0);
    assert_eq!(exit_code(&["--version"], tmp.path()), 0);
    assert_eq!(exit_code(&["featurize", "--help"], tmp.path()), 0);
    // No subcommand at all prints help; clap treats it as a help display.
    assert_eq!(exit_code(&[], tmp.path()), 0);
}

#[test]
fn bad_flags_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    // Unknown subcommand and unknown flag are argument errors.
    assert_eq!(exit_code(&["frobnicate"], tmp.path()), 1);
    assert_eq!(exit_code(&["bench", "--nope"], tmp.path()), 1);
    // Enumerated value out of range.
    assert_eq!(
        exit_code(
            &["featurize", "--kernel", "magic", "--input", "x", "--output", "y"],
            tmp.path()
        ),
        1
    );
}

#[test]
fn invalid_config_exits_one_before_any_work() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "[input]\nevents = \"events.jsonl\"\n\n[kernel]\nh = -1\n",
    )
    .unwrap();
    std::fs::write(tmp.path().join("events.jsonl"), "").unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("kernel.h"), "stderr: {stderr}");
    // Validation failed before the output directory was created.
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn unknown_config_key_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("typo.toml");
    std::fs::write(&cfg, "[kernel]\ndepth = 3\n").unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn corrupt_input_mid_run_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("events.jsonl"), "this is not json\n").unwrap();
    let code = exit_code(
        &[
            "featurize",
            "--input",
            "events.jsonl",
            "--output",
            "out",
            "--h",
            "1",
            "--sketch-size",
            "16",
        ],
        tmp.path(),
    );
    assert_eq!(code, 2);
    // Same input in lenient mode skips the line but then has no events,
    // which is a stage failure too (nothing to featurize).
    let code = exit_code(
        &[
            "featurize",
            "--input",
            "events.jsonl",
            "--output",
            "out",
            "--h",
            "1",
            "--sketch-size",
            "16",
            "--lenient",
        ],
        tmp.path(),
    );
    assert_eq!(code, 2);
}

#[test]
fn missing_input_path_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let code = exit_code(
        &["ingest", "--input", "no-such-file.jsonl", "--output", "out"],
        tmp.path(),
    );
    assert_eq!(code, 1);
}

/// The full subcommand chain on a small corpus: synthesize, featurize,
/// train on the benign portion, detect the attack hosts, and trace from a
/// hand-written session log. Also checks provenance headers on artifacts.
#[test]
fn subcommand_chain_detects_attacks_and_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();

    let out = run_ok(
        &[
            "synth",
            "--out",
            "corpus",
            "--runs",
            "3",
            "--approx-events",
            "200",
            "--seed",
            "7",
        ],
        root,
    );
    assert!(stdout_of(&out).contains("generated 18 files"));
    assert!(root.join("corpus/ground_truth.txt").exists());

    run_ok(
        &[
            "featurize",
            "--input",
            "corpus",
            "--output",
            "feat",
            "--kernel",
            "prov",
            "--h",
            "2",
            "--sketch-size",
            "256",
            "--emit",
            "csv",
        ],
        root,
    );
    let sketch_dir = root.join("feat/sketches");
    let sketch_count = std::fs::read_dir(&sketch_dir)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "sketch")
        })
        .count();
    assert_eq!(sketch_count, 18);
    // Featurize artifacts carry the config hash in a '#' header.
    let graphs_csv = std::fs::read_to_string(root.join("feat/graphs.csv")).unwrap();
    assert!(graphs_csv.starts_with("# provsketch graph stats config="));
    let sparse_csv = std::fs::read_to_string(root.join("feat/sparse.csv")).unwrap();
    assert!(sparse_csv.starts_with("# provsketch sparse vectors config="));

    let out = run_ok(
        &[
            "train",
            "--sketches",
            "feat/sketches",
            "--ground-truth",
            "corpus/ground_truth.txt",
            "--k",
            "auto",
            "--out",
            "model.json",
        ],
        root,
    );
    // Ground-truth hosts are excluded: 18 sketches minus 3 attack runs.
    assert!(stdout_of(&out).contains("on 15 sketches"));

    let out = run_ok(
        &[
            "detect",
            "--model",
            "model.json",
            "--sketches",
            "feat/sketches",
            "--ground-truth",
            "corpus/ground_truth.txt",
            "--report",
            "report.csv",
        ],
        root,
    );
    let text = stdout_of(&out);
    assert!(text.contains("precision=1 recall=1"), "stdout: {text}");
    let report = std::fs::read_to_string(root.join("report.csv")).unwrap();
    assert!(report.starts_with("# provsketch host report config="));
    assert!(report.contains("attack-00,,compromised"));
    assert!(report.contains("youtube-00,,clean"));
    assert!(root.join("report.snapshots.csv").exists());

    // Trace: a session log where the attacker pivots after t0 and one
    // earlier edge must stay untouched.
    std::fs::write(
        root.join("sessions.jsonl"),
        concat!(
            "{\"user\":\"sven\",\"src_host\":\"attack-00\",\"dst_host\":\"pre\",\"event\":\"LOGIN\",\"timestamp\":10}\n",
            "{\"user\":\"mallory\",\"src_host\":\"attack-00\",\"dst_host\":\"srv-a\",\"event\":\"LOGIN\",\"timestamp\":150}\n",
            "{\"user\":\"mallory\",\"src_host\":\"srv-a\",\"dst_host\":\"srv-b\",\"event\":\"RDP\",\"timestamp\":300}\n",
        ),
    )
    .unwrap();
    run_ok(
        &[
            "trace",
            "--sessions",
            "sessions.jsonl",
            "--seed-host",
            "attack-00",
            "--seed-time",
            "100",
            "--out",
            "traceout",
        ],
        root,
    );
    let flagged = std::fs::read_to_string(root.join("traceout/trace-flagged.csv")).unwrap();
    assert!(flagged.contains("srv-a,host,150"));
    assert!(flagged.contains("srv-b,host,300"));
    assert!(flagged.contains("mallory,user,150"));
    assert!(!flagged.contains("pre,"), "pre-t0 edge must not propagate");
}

/// `run --config` drives the whole pipeline and reruns are byte-identical.
#[test]
fn run_subcommand_is_deterministic_across_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    run_ok(
        &[
            "synth",
            "--out",
            "corpus",
            "--runs",
            "2",
            "--approx-events",
            "150",
        ],
        root,
    );
    let config = r#"
[input]
events = "corpus"
ground_truth = "corpus/ground_truth.txt"

[kernel]
kind = "prov"
h = 2

[sketch]
size = 128

[output]
dir = "out"
"#;
    std::fs::write(root.join("pipe.toml"), config).unwrap();
    // Same config, same output dir, run twice: every artifact must come
    // back byte for byte.
    let mut snapshots: Vec<Vec<(PathBuf, Vec<u8>)>> = Vec::new();
    for _ in 0..2 {
        let out = run_ok(&["run", "--config", "pipe.toml"], root);
        let text = stdout_of(&out);
        assert!(text.contains("pipeline complete: 12 partitions"), "{text}");
        assert!(text.contains("precision=1 recall=1"), "{text}");
        snapshots.push(dir_contents(&root.join("out")));
    }
    let (a, b) = (&snapshots[0], &snapshots[1]);
    assert_eq!(a.len(), b.len());
    for ((pa, da), (pb, db)) in a.iter().zip(b.iter()) {
        assert_eq!(pa, pb);
        assert_eq!(da, db, "artifact {} differs between reruns", pa.display());
    }
}

/// The global --seed flag changes synth output and bench input.
#[test]
fn global_seed_changes_synth_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    for (dir, seed) in [("c1", "1"), ("c2", "2"), ("c1b", "1")] {
        run_ok(
            &[
                "synth",
                "--out",
                dir,
                "--runs",
                "1",
                "--approx-events",
                "100",
                "--seed",
                seed,
            ],
            root,
        );
    }
    let f = |d: &str| std::fs::read(root.join(d).join("attack-00.jsonl")).unwrap();
    assert_eq!(f("c1"), f("c1b"), "same seed must reproduce bytes");
    assert_ne!(f("c1"), f("c2"), "different seeds must differ");
}

#[test]
fn bench_emits_csv_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_ok(
        &[
            "bench",
            "--kernels",
            "prov,wl",
            "--h",
            "0..1",
            "--events",
            "500",
        ],
        tmp.path(),
    );
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "kernel,h,avg_histogram_size,vocab_size,runtime_ns"
    );
    // 2 kernels x 2 depths.
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("prov,0,"));
    assert!(lines[4].starts_with("wl,1,"));
}
