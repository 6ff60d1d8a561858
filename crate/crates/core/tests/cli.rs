use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use motifmdl::bench::Metrics;

fn motifmdl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motifmdl")).args(args).output().expect("spawn motifmdl")
}

fn ok(args: &[&str]) -> String {
    let out = motifmdl(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &Path, rel: &str) -> String {
    dir.join(rel).to_string_lossy().into_owned()
}

/// Generates and injects a small database; returns the injected db path.
fn injected_db(dir: &Path, kind: &str) -> String {
    ok(&["gen", "--output-dir", &path(dir, "data"), "--graphs", "150", "--seed", "4"]);
    ok(&[
        "inject",
        "--input",
        &path(dir, "data/db.csv"),
        "--output-dir",
        &path(dir, "data"),
        "--inject",
        kind,
        "--seed",
        "5",
        "--graph-frac",
        "0.05",
    ]);
    path(dir, "data/injected.csv")
}

#[test]
fn search_score_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let db = injected_db(dir.path(), "path");
    ok(&["search", "--input", &db, "--output-dir", &path(dir.path(), "fit"), "--kmax", "4"]);
    for f in ["motif_table.json", "covers.json", "trace.csv", "run.json"] {
        assert!(dir.path().join("fit").join(f).exists(), "missing {f}");
    }
    ok(&[
        "score",
        "--input",
        &db,
        "--output-dir",
        &path(dir.path(), "s"),
        "--kmax",
        "4",
        "--labels",
        &path(dir.path(), "data/labels.csv"),
        "--baselines",
    ]);
    for f in ["scores.csv", "scores_smt.csv", "scores_entropy.csv", "scores_multiedges.csv", "features.csv"] {
        assert!(dir.path().join("s").join(f).exists(), "missing {f}");
    }
    ok(&["eval", "--input", &path(dir.path(), "s/scores.csv"), "--output-dir", &path(dir.path(), "e")]);
    let text = fs::read_to_string(dir.path().join("e/metrics.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    for k in ["precision@10", "precision@100", "precision@1000", "AUC", "AP"] {
        assert!(json.get(k).is_some(), "metrics lack {k}");
    }
    let m: Metrics = serde_json::from_str(&text).unwrap();
    assert!((0.0..=1.0).contains(&m.auc));
}

#[test]
fn stored_table_reproduces_fitted_scores() {
    let dir = tempfile::tempdir().unwrap();
    let db = injected_db(dir.path(), "type");
    ok(&["search", "--input", &db, "--output-dir", &path(dir.path(), "fit"), "--kmax", "4", "--weighted"]);
    ok(&["score", "--input", &db, "--output-dir", &path(dir.path(), "a"), "--kmax", "4", "--weighted"]);
    ok(&[
        "score",
        "--input",
        &db,
        "--output-dir",
        &path(dir.path(), "b"),
        "--kmax",
        "4",
        "--weighted",
        "--table",
        &path(dir.path(), "fit/motif_table.json"),
    ]);
    let a = fs::read(dir.path().join("a/scores.csv")).unwrap();
    let b = fs::read(dir.path().join("b/scores.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn decode_check_reports_all_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let db = injected_db(dir.path(), "path");
    assert_eq!(ok(&["decode-check", "--input", &db, "--kmax", "4"]).trim(), "OK 150/150");
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let db = injected_db(dir.path(), "path");
    for t in ["1", "3"] {
        ok(&[
            "--threads",
            t,
            "search",
            "--input",
            &db,
            "--output-dir",
            &path(dir.path(), &format!("t{t}")),
            "--kmax",
            "4",
        ]);
        ok(&[
            "--threads",
            t,
            "score",
            "--input",
            &db,
            "--output-dir",
            &path(dir.path(), &format!("t{t}")),
            "--kmax",
            "4",
        ]);
    }
    for f in ["motif_table.json", "covers.json", "trace.csv", "scores.csv"] {
        let a = fs::read(dir.path().join("t1").join(f)).unwrap();
        let b = fs::read(dir.path().join("t3").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}

#[test]
fn same_seed_same_injection() {
    let dir = tempfile::tempdir().unwrap();
    injected_db(dir.path(), "path");
    let first = fs::read(dir.path().join("data/mutations.json")).unwrap();
    injected_db(dir.path(), "path");
    assert_eq!(first, fs::read(dir.path().join("data/mutations.json")).unwrap());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let db = injected_db(dir.path(), "path");
    let cfg = path(dir.path(), "cfg.json");
    fs::write(&cfg, r#"{"kmax": 4, "weighted": true}"#).unwrap();
    ok(&["--config", &cfg, "search", "--input", &db, "--output-dir", &path(dir.path(), "o"), "--kmax", "3"]);
    let run: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/run.json")).unwrap()).unwrap();
    assert_eq!(run["k_max"], 3);
    assert_eq!(run["weighted"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(motifmdl(&["search", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(motifmdl(&[]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let out = motifmdl(&["search", "--input", "/definitely/missing.csv", "--output-dir", &path(dir.path(), "x")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let bad = path(dir.path(), "bad.csv");
    fs::write(&bad, "graph_id,src,dst,src_type,dst_type,mult\ng,0,1,A,B,zero\n").unwrap();
    assert_eq!(motifmdl(&["search", "--input", &bad, "--output-dir", &path(dir.path(), "x")]).status.code(), Some(2));
    assert_eq!(
        motifmdl(&["search", "--input", &bad, "--output-dir", &path(dir.path(), "x"), "--kmin", "2"]).status.code(),
        Some(1)
    );
}
