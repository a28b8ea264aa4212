use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use sentitrade::pipeline::config::ClassifierConfig;
use sentitrade::pipeline::manifest::sha256_file;
use sentitrade::pipeline::synthetic::{generate, SynthFiles, SynthOptions};
use sentitrade::pipeline::{compare, run, run_all, LabelRecord, RunConfig, Stage, REPORT_TABLES};
use sentitrade::sentiment::Polarity;
use sentitrade::Error;

fn synth(dir: &Path) -> SynthFiles {
    generate(dir, &SynthOptions::default()).unwrap()
}

fn hashes(root: &Path) -> BTreeMap<PathBuf, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), sha256_file(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn same_config_gives_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let files = synth(tmp.path());
    let mut cfg = RunConfig::load(&files.btc).unwrap();
    cfg.out_dir = tmp.path().join("a");
    run_all(&cfg).unwrap();
    cfg.out_dir = tmp.path().join("b");
    run_all(&cfg).unwrap();
    let a = hashes(&tmp.path().join("a"));
    let b = hashes(&tmp.path().join("b"));
    assert!(a.keys().any(|k| k.ends_with("report/models.tsv")));
    assert_eq!(a, b);
}

#[test]
fn stage_without_prerequisites_is_a_dependency_error() {
    let tmp = tempfile::tempdir().unwrap();
    let files = synth(tmp.path());
    let cfg = RunConfig::load(&files.btc).unwrap();
    match run(&cfg, &[Stage::Backtest]) {
        Err(Error::Dependency { stage, requires }) => {
            assert_eq!(stage, "backtest");
            assert_eq!(requires, "features");
        }
        other => panic!("expected a dependency error, got {other:?}"),
    }
    run(&cfg, &[Stage::Ingest, Stage::Label, Stage::Features]).unwrap();
    let err = run(&cfg, &[Stage::Backtest]).unwrap_err();
    assert!(matches!(&err, Error::Dependency { requires, .. } if requires == "train"));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn eth_with_blockchain_fails_validation_listing_everything() {
    let tmp = tempfile::tempdir().unwrap();
    let files = synth(tmp.path());
    let text = std::fs::read_to_string(&files.btc)
        .unwrap()
        .replace("currency = \"BTC\"", "currency = \"ETH\"")
        .replace("folds = 5", "folds = 1");
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, text).unwrap();
    match RunConfig::load(&bad) {
        Err(Error::Config(problems)) => {
            assert_eq!(problems.len(), 2, "{problems:?}");
            assert!(problems[0].contains("blockchain"));
            assert!(problems[1].contains("cv.folds"));
        }
        other => panic!("expected a configuration error, got {other:?}"),
    }
}

#[test]
fn unknown_keys_and_missing_files_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let files = synth(tmp.path());
    let text = std::fs::read_to_string(&files.btc).unwrap();
    let typo = tmp.path().join("typo.toml");
    std::fs::write(&typo, text.replace("[cv]\n", "[cv]\nfold = 3\n")).unwrap();
    assert!(matches!(RunConfig::load(&typo), Err(Error::Config(_))));
    std::fs::remove_file(tmp.path().join("macro.csv")).unwrap();
    let err = RunConfig::load(&files.btc).unwrap_err();
    assert!(err.to_string().contains("macro_data"));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn compare_with_itself_and_without_sentiment() {
    let tmp = tempfile::tempdir().unwrap();
    let files = synth(tmp.path());
    let all = RunConfig::load(&files.btc).unwrap();
    let nosent = RunConfig::load(&files.btc_no_sentiment).unwrap();
    run_all(&all).unwrap();
    run_all(&nosent).unwrap();

    let same = compare(&all.out(), &all.out()).unwrap();
    assert!(!same.rows.is_empty());
    assert!(same.rows.iter().all(|r| r.delta() == Some(0.0)));

    let diff = compare(&all.out(), &nosent.out().join("backtest/manifest.json")).unwrap();
    assert_eq!(diff.columns.0, diff.columns.1 + 6);
    assert_eq!(diff.feature_sets, ("all".to_string(), "no-sentiment".to_string()));
}

#[test]
fn compare_rejects_different_frames() {
    let tmp = tempfile::tempdir().unwrap();
    let files = synth(tmp.path());
    let a = RunConfig::load(&files.btc).unwrap();
    let mut b = a.clone();
    b.out_dir = tmp.path().join("short-frames");
    b.backtest.frame_len = 30;
    run_all(&a).unwrap();
    run_all(&b).unwrap();
    assert!(matches!(compare(&a.out(), &b.out()), Err(Error::Comparison(_))));
    let missing = tmp.path().join("nothing");
    assert!(matches!(compare(&a.out(), &missing), Err(Error::Dependency { .. })));
}

#[test]
fn late_stages_leave_earlier_artifacts_alone() {
    let tmp = tempfile::tempdir().unwrap();
    let files = synth(tmp.path());
    let cfg = RunConfig::load(&files.btc).unwrap();
    run_all(&cfg).unwrap();
    let root = cfg.out();
    let before = hashes(&root);
    run(&cfg, &[Stage::Train, Stage::Backtest, Stage::Report]).unwrap();
    assert_eq!(before, hashes(&root));
}

#[test]
fn changed_reports_are_kept_in_history() {
    let tmp = tempfile::tempdir().unwrap();
    let files = synth(tmp.path());
    let mut cfg = RunConfig::load(&files.btc).unwrap();
    run_all(&cfg).unwrap();
    let root = cfg.out();
    let first = std::fs::read(root.join("report/models.tsv")).unwrap();
    cfg.backtest.cost_rate = 0.01;
    run(&cfg, &[Stage::Backtest, Stage::Report]).unwrap();
    let second = std::fs::read(root.join("report/models.tsv")).unwrap();
    assert_ne!(first, second);
    let hist: Vec<_> = std::fs::read_dir(root.join("report/history")).unwrap().collect();
    assert_eq!(hist.len(), 1);
    let kept = hist[0].as_ref().unwrap().path();
    assert_eq!(std::fs::read(kept.join("models.tsv")).unwrap(), first);
    for t in REPORT_TABLES {
        assert!(kept.join(t).is_file());
    }
}

#[test]
fn label_stage_votes_over_external_classifiers() {
    let tmp = tempfile::tempdir().unwrap();
    let files = synth(tmp.path());
    let mut cfg = RunConfig::load(&files.btc).unwrap();
    let stub = env!("CARGO_BIN_EXE_protocol-stub").to_string();
    let external = |mode: &str| ClassifierConfig::External {
        command: vec![stub.clone(), "classifier".into(), "--mode".into(), mode.into()],
    };
    cfg.sentiment.classifiers = vec![
        ClassifierConfig::Lexicon { path: None },
        external("shuffle"),
        external("neutral"),
    ];
    run(&cfg, &[Stage::Ingest, Stage::Label]).unwrap();
    let text = std::fs::read_to_string(cfg.out().join("label/labels.jsonl")).unwrap();
    let records: Vec<LabelRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!records.is_empty());
    for r in &records {
        // two lexicon votes always outweigh the neutral one
        assert_eq!(r.votes.len(), 3);
        assert_eq!(r.votes[0], r.votes[1]);
        assert_eq!(r.votes[2], Polarity::Neutral);
        assert_eq!(r.label, r.votes[0]);
    }
}

#[test]
fn command_line_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let exe = env!("CARGO_BIN_EXE_sentitrade");
    let status = |args: &[&str]| Command::new(exe).args(args).output().unwrap().status.code();
    let data = tmp.path().join("data");
    assert_eq!(status(&["synth", "--out", data.to_str().unwrap()]), Some(0));
    let config = data.join("config.toml");
    let c = config.to_str().unwrap();
    let out = tmp.path().join("out");
    let o = out.to_str().unwrap();
    assert_eq!(status(&["train", "--config", c, "--out", o]), Some(3));
    assert_eq!(status(&["run", "--config", c, "--out", o, "--stage", "ingest"]), Some(0));
    assert_eq!(status(&["run", "--config", c, "--out", o, "--stage", "nope"]), Some(2));
    assert_eq!(status(&["ingest", "--config", "/does/not/exist.toml"]), Some(2));
    let eth = std::fs::read_to_string(&config).unwrap().replace("\"BTC\"", "\"ETH\"");
    let bad = tmp.path().join("eth.toml");
    std::fs::write(&bad, eth).unwrap();
    assert_eq!(status(&["features", "--config", bad.to_str().unwrap()]), Some(2));
    let cmp = Command::new(exe).args(["compare", o, o]).output().unwrap();
    assert_eq!(cmp.status.code(), Some(3));
}

fn keys(v: &toml::Value, out: &mut Vec<String>) {
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                out.push(k.clone());
                keys(v, out);
            }
        }
        toml::Value::Array(a) => a.iter().for_each(|v| keys(v, out)),
        _ => {}
    }
}

#[test]
fn schema_document_covers_every_key() {
    let doc = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/config.md")).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let files = synth(tmp.path());
    let mut found = Vec::new();
    for path in [&files.btc, &files.btc_no_sentiment, &files.eth] {
        let mut cfg = RunConfig::load(path).unwrap();
        cfg.sentiment.classifiers.push(ClassifierConfig::External { command: vec!["x".into()] });
        let value: toml::Value = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
        keys(&value, &mut found);
    }
    // engagement metric names are free-form
    found.retain(|k| k != "retweets" && k != "score");
    for k in found {
        let documented = doc.contains(&format!("`{k}`")) || doc.contains(&format!("{k}]`"));
        assert!(documented, "`{k}` is not documented");
    }
}
