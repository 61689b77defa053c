use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lra_cli::exit;

fn lra(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lra"))
        .args(args)
        .current_dir(dir)
        .env_remove("LRA_CACHE_DIR")
        .env_remove("LRA_CONFIG")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[track_caller]
fn ok(o: Output) -> Output {
    assert!(
        o.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        o.status.code(),
        stdout(&o),
        stderr(&o)
    );
    o
}

/// A generated suite in a fresh directory, with its `lra.toml`.
fn suite(questions: usize, examples: usize) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    ok(lra(
        dir.path(),
        &[
            "synth",
            "suite",
            "--seed",
            "5",
            "--question-count",
            &questions.to_string(),
            "--example-count",
            &examples.to_string(),
        ],
    ));
    dir
}

fn stage_line<'a>(err: &'a str, name: &str) -> &'a str {
    err.lines()
        .find(|l| l.starts_with(&format!("stage {name} ")))
        .unwrap_or_else(|| panic!("no stage {name} in\n{err}"))
}

#[test]
fn index_prints_counts_and_hits_the_cache_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("docs")).unwrap();
    fs::write(
        dir.path().join("docs/a.txt"),
        "The quart of volume. A mile of distance.",
    )
    .unwrap();
    fs::write(dir.path().join("docs/b.txt"), "Day and night").unwrap();
    let first = ok(lra(dir.path(), &["index", "--corpus", "docs"]));
    assert!(
        stdout(&first).contains("indexed 11 tokens in 2 documents"),
        "{}",
        stdout(&first)
    );
    assert!(stage_line(&stderr(&first), "index").contains("computed"));
    let second = ok(lra(dir.path(), &["index", "--corpus", "docs", "--out", "index.json"]));
    assert!(stage_line(&stderr(&second), "index").contains("cached"));
    assert_eq!(stdout(&first), stdout(&second));
    assert!(dir.path().join("index.json").exists());
}

#[test]
fn missing_corpus_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = lra(dir.path(), &["index", "--corpus", "no/such/dir"]);
    assert_eq!(o.status.code(), Some(exit::IO));
    assert!(stderr(&o).contains("no/such/dir"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lra(dir.path(), &[]).status.code(), Some(exit::USAGE));
    assert_eq!(
        lra(dir.path(), &["solve-sat", "--bogus"]).status.code(),
        Some(exit::USAGE)
    );
    assert_eq!(
        lra(dir.path(), &["inspect", "nocolon"]).status.code(),
        Some(exit::USAGE)
    );
}

#[test]
fn config_errors_are_categorized() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[params]\nnum_simm = 3\n").unwrap();
    let o = lra(dir.path(), &["-c", "bad.toml", "build"]);
    assert_eq!(o.status.code(), Some(exit::CONFIG), "{}", stderr(&o));
    let o = lra(dir.path(), &["index", "--corpus", ".", "--no-svd", "--top-n", "5"]);
    assert_eq!(o.status.code(), Some(exit::CONFIG), "{}", stderr(&o));
    let o = lra(dir.path(), &["build", "--corpus", ".", "--no-synonyms"]);
    assert_eq!(o.status.code(), Some(exit::CONFIG), "{}", stderr(&o));
    assert!(stderr(&o).contains("no word pairs"));
}

#[test]
fn malformed_inputs_report_line_numbers() {
    let s = suite(2, 4);
    let root = s.path().join("suite");
    let text = fs::read_to_string(root.join("sat.txt")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[6] = "q";
    fs::write(root.join("bad_sat.txt"), lines.join("\n")).unwrap();
    let o = lra(&root, &["-c", "lra.toml", "solve-sat", "--sat", "bad_sat.txt"]);
    assert_eq!(o.status.code(), Some(exit::INPUT), "{}", stderr(&o));
    assert!(stderr(&o).contains("bad_sat.txt:7:"), "{}", stderr(&o));

    fs::write(
        root.join("bad_nm.csv"),
        "modifier,head,class\nlaser,printer,inst\nflu,virus,bogus\n",
    )
    .unwrap();
    let o = lra(
        &root,
        &["-c", "lra.toml", "classify-nm", "--majority", "--nm", "bad_nm.csv"],
    );
    assert_eq!(o.status.code(), Some(exit::INPUT), "{}", stderr(&o));
    assert!(stderr(&o).contains(":3:"), "{}", stderr(&o));
}

#[test]
fn changing_one_parameter_recomputes_only_later_stages() {
    let s = suite(6, 0);
    let root = s.path().join("suite");
    let first = ok(lra(&root, &["-c", "lra.toml", "build", "--task", "sat"]));
    for stage in ["index", "families", "matrix", "space"] {
        assert!(stage_line(&stderr(&first), stage).contains("computed"));
    }
    let k = ok(lra(&root, &["-c", "lra.toml", "build", "--task", "sat", "--k", "20"]));
    let err = stderr(&k);
    for stage in ["index", "families", "matrix"] {
        assert!(stage_line(&err, stage).contains("cached"), "{err}");
    }
    assert!(stage_line(&err, "space").contains("computed"), "{err}");

    let p = ok(lra(
        &root,
        &["-c", "lra.toml", "build", "--task", "sat", "--num-patterns", "50"],
    ));
    let err = stderr(&p);
    assert!(stage_line(&err, "families").contains("cached"), "{err}");
    assert!(stage_line(&err, "matrix").contains("computed"), "{err}");

    let again = ok(lra(&root, &["-c", "lra.toml", "build", "--task", "sat"]));
    for stage in ["index", "families", "matrix", "space"] {
        assert!(stage_line(&stderr(&again), stage).contains("cached"));
    }
    assert_eq!(stdout(&first), stdout(&again));
}

#[test]
fn more_patterns_than_available_warns_and_proceeds() {
    let s = suite(3, 0);
    let root = s.path().join("suite");
    let o = ok(lra(
        &root,
        &["-c", "lra.toml", "build", "--num-patterns", "100000", "--no-cache"],
    ));
    assert!(stderr(&o).contains("distinct patterns available"), "{}", stderr(&o));
    let report = stdout(&o);
    assert!(report.contains("density"), "{report}");
    assert!(report.contains("limited by rank"), "{report}");
}

#[test]
fn cache_directory_follows_the_environment() {
    let s = suite(2, 0);
    let root = s.path().join("suite");
    let cache = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lra"))
        .args(["-c", "lra.toml", "index"])
        .current_dir(&root)
        .env("LRA_CACHE_DIR", cache.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(fs::read_dir(cache.path().join("index")).unwrap().count(), 1);
    assert!(!root.join(".lra-cache").exists());
}

#[test]
fn corrupt_cache_entries_are_rebuilt() {
    let s = suite(3, 0);
    let root = s.path().join("suite");
    let first = ok(lra(&root, &["-c", "lra.toml", "solve-sat"]));
    for dir in ["index", "families", "space"] {
        for entry in fs::read_dir(root.join(".lra-cache").join(dir)).unwrap() {
            fs::write(entry.unwrap().path(), "{ not json").unwrap();
        }
    }
    for entry in fs::read_dir(root.join(".lra-cache/matrix")).unwrap() {
        fs::write(entry.unwrap().path().join("matrix.coo"), "garbage").unwrap();
    }
    let second = ok(lra(&root, &["-c", "lra.toml", "solve-sat"]));
    assert_eq!(stdout(&first), stdout(&second));
    assert!(stage_line(&stderr(&second), "matrix").contains("computed"));
    let third = ok(lra(&root, &["-c", "lra.toml", "solve-sat"]));
    assert!(stage_line(&stderr(&third), "matrix").contains("cached"));
}

#[test]
fn worker_count_does_not_change_results() {
    let s = suite(8, 10);
    let root = s.path().join("suite");
    let one = ok(lra(
        &root,
        &[
            "-c",
            "lra.toml",
            "solve-sat",
            "--workers",
            "1",
            "--no-cache",
            "--report",
            "w1",
        ],
    ));
    let four = ok(lra(
        &root,
        &[
            "-c",
            "lra.toml",
            "solve-sat",
            "--workers",
            "4",
            "--no-cache",
            "--report",
            "w4",
        ],
    ));
    assert_eq!(stdout(&one), stdout(&four));
    assert_eq!(
        fs::read(root.join("w1.json")).unwrap(),
        fs::read(root.join("w4.json")).unwrap()
    );
    assert_eq!(
        fs::read(root.join("w1.pairings.txt")).unwrap(),
        fs::read(root.join("w4.pairings.txt")).unwrap()
    );
}

#[test]
fn pairing_log_lists_every_combination() {
    let s = suite(2, 0);
    let root = s.path().join("suite");
    ok(lra(&root, &["-c", "lra.toml", "solve-sat", "--log", "pairings.txt"]));
    let log = fs::read_to_string(root.join("pairings.txt")).unwrap();
    let headers = log.lines().filter(|l| l.starts_with("question ")).count();
    assert_eq!(headers, 10);
    // at most 16 cosines per block; the original is missing only when its row is empty
    for block in log.split("question ").skip(1) {
        let n = block.lines().skip(1).count();
        assert!(n <= 16, "{block}");
        assert!(block.matches("original").count() <= 1, "{block}");
    }
}

#[test]
fn classification_beats_the_majority_baseline() {
    let s = suite(0, 60);
    let root = s.path().join("suite");
    let o = ok(lra(
        &root,
        &["-c", "lra.toml", "classify-nm", "--check", "--report", "nm"],
    ));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(root.join("nm.json")).unwrap()).unwrap();
    let acc = |key: &str| report[key]["report"]["recall"].as_f64().unwrap();
    let majority = report["majority_five"]["recall"].as_f64().unwrap();
    assert!(acc("five") > majority + 30.0, "{}", stdout(&o));
    assert!(acc("thirty") > majority + 30.0, "{}", stdout(&o));
    assert_eq!(report["search"]["mode"], "two-stage");
    assert_eq!(report["search"]["shortlist"], 30);
    assert!(report["search"]["agreement"].as_f64().unwrap() > 0.9);
    assert!(stdout(&o).contains("5 classes"));
}

#[test]
fn majority_mode_needs_no_corpus() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("nm.csv"),
        "modifier,head,class\nflu,virus,cs\nstorm,damage,cs\nlaser,printer,inst\nmorning,exercise,tat\n",
    )
    .unwrap();
    let o = ok(lra(
        dir.path(),
        &["classify-nm", "--majority", "--nm", "nm.csv", "--report", "m"],
    ));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(report["thirty"]["report"]["recall"].as_f64().unwrap(), 50.0);
    assert_eq!(report["five"]["report"]["recall"].as_f64().unwrap(), 50.0);
    assert!(stdout(&o).contains("predictor: majority class"));
}

#[test]
fn baselines_and_inspect_run() {
    let s = suite(6, 0);
    let root = s.path().join("suite");
    for strategy in ["vsm", "highest", "lowest", "random", "attributional"] {
        let o = ok(lra(&root, &["-c", "lra.toml", "baseline-vsm", "--strategy", strategy]));
        assert!(stdout(&o).starts_with(&format!("baseline: {strategy}")));
    }
    let stem = fs::read_to_string(root.join("sat.txt"))
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    let o = ok(lra(&root, &["-c", "lra.toml", "inspect", &stem, "--top", "3"]));
    let text = stdout(&o);
    assert!(text.contains("largest weights in the weighted matrix"), "{text}");
    assert!(text.contains("word1"), "{text}");
}

#[test]
fn ablation_table_has_every_variant() {
    let s = suite(10, 0);
    let root = s.path().join("suite");
    let o = ok(lra(
        &root,
        &["-c", "lra.toml", "ablate", "--extended", "--report", "ab"],
    ));
    let rows: serde_json::Value = serde_json::from_slice(&fs::read(root.join("ab.json")).unwrap()).unwrap();
    let labels: Vec<&str> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["label"].as_str().unwrap())
        .collect();
    assert_eq!(
        labels,
        [
            "full",
            "no-svd",
            "no-synonyms",
            "no-svd,no-synonyms",
            "no-symmetry",
            "all-alternates",
            "vsm baseline"
        ]
    );
    assert!(stdout(&o).contains("ablation over 10 questions"));
}

#[test]
fn cache_flag_beats_the_environment() {
    let s = suite(2, 0);
    let root = s.path().join("suite");
    let (env_dir, flag_dir) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o = Command::new(env!("CARGO_BIN_EXE_lra"))
        .args(["-c", "lra.toml", "index", "--cache-dir"])
        .arg(flag_dir.path())
        .current_dir(&root)
        .env("LRA_CACHE_DIR", env_dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(flag_dir.path().join("index").exists());
    assert!(!env_dir.path().join("index").exists());
}
