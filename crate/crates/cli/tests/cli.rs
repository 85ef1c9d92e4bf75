use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scribeforge::stackmix::IndexFile;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn toy_copy() -> (tempfile::TempDir, PathBuf) {
    let tmp = tempfile::tempdir().unwrap();
    let work = tmp.path().join("toy");
    copy_dir(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/toy"), &work);
    (tmp, work)
}

fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &to.join(entry.file_name()));
        } else {
            std::fs::copy(entry.path(), to.join(entry.file_name())).unwrap();
        }
    }
}

fn scribeforge(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scribeforge"))
        .args(["--jobs", "2"])
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn ok_report(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn sha(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

fn head_manifest(work: &Path, n: usize) -> &'static str {
    let text = std::fs::read_to_string(work.join("manifest.tsv")).unwrap();
    let head: String = text.lines().take(n).map(|l| format!("{l}\n")).collect();
    std::fs::write(work.join("small.tsv"), head).unwrap();
    "small.tsv"
}

#[test]
fn segment_three_lines_tiles_each_width() {
    let (_tmp, work) = toy_copy();
    let manifest = head_manifest(&work, 3);
    let report = ok_report(&scribeforge(
        &work,
        &["segment", "--manifest", manifest, "--posteriors", "posteriors", "--out", "seg.json"],
    ));
    assert_eq!(report["succeeded"], 3);
    let file = IndexFile::load(work.join("seg.json")).unwrap();
    assert_eq!(file.lines.len(), 3);
    for line in &file.lines {
        assert!(line.boundaries().unwrap().tiles_width(), "{}", line.id);
    }
}

#[test]
fn empty_manifest_is_not_an_error() {
    let (_tmp, work) = toy_copy();
    std::fs::write(work.join("empty.tsv"), "").unwrap();
    let out = scribeforge(
        &work,
        &["--strict", "segment", "--manifest", "empty.tsv", "--posteriors", "posteriors", "--out", "seg.json"],
    );
    let report = ok_report(&out);
    assert_eq!(report["processed"], 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
    assert!(IndexFile::load(work.join("seg.json")).unwrap().lines.is_empty());
}

#[test]
fn corrupted_posteriors_are_named_and_strict_fails() {
    let (_tmp, work) = toy_copy();
    let manifest = head_manifest(&work, 3);
    let path = work.join("posteriors/line_01.ctcp");
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[..4].copy_from_slice(b"XXXX");
    std::fs::write(&path, bytes).unwrap();
    std::fs::remove_file(work.join("posteriors/line_02.ctcp")).unwrap();

    let args = ["segment", "--manifest", manifest, "--posteriors", "posteriors", "--out", "seg.json"];
    let report = ok_report(&scribeforge(&work, &args));
    assert_eq!(report["succeeded"], 1);
    let failures = report["failures"].as_array().unwrap();
    assert_eq!(failures.len(), 2);
    assert_eq!(failures[0]["id"], "line_01");
    let reason = failures[0]["error"].as_str().unwrap();
    assert!(reason.contains("line_01.ctcp") && reason.contains("magic"), "{reason}");
    assert_eq!(failures[1]["id"], "line_02");

    let strict = scribeforge(&work, &[&["--strict"], &args[..]].concat());
    assert!(!strict.status.success());
}

#[test]
fn build_index_rejects_missing_boundaries() {
    let (_tmp, work) = toy_copy();
    let manifest = head_manifest(&work, 2);
    ok_report(&scribeforge(
        &work,
        &["segment", "--manifest", manifest, "--posteriors", "posteriors", "--out", "seg.json"],
    ));
    let out = scribeforge(
        &work,
        &["build-index", "--manifest", "manifest.tsv", "--boundaries", "seg.json", "--out", "index.json"],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line_02"));
}

fn build_index(work: &Path) {
    ok_report(&scribeforge(
        work,
        &["build-index", "--manifest", "manifest.tsv", "--boundaries", "boundaries.json", "--out", "index.json"],
    ));
}

#[test]
fn synthesis_is_reproducible_and_round_trips() {
    let (_tmp, work) = toy_copy();
    build_index(&work);
    let run = |dir: &str| {
        let report = ok_report(&scribeforge(
            &work,
            &["--seed", "3", "synthesize", "--index", "index.json", "--corpus", "corpus.txt", "--n-lines", "5", "--out-dir", dir],
        ));
        assert_eq!(report["succeeded"], 5);
    };
    run("a");
    run("b");
    let pngs: Vec<PathBuf> = std::fs::read_dir(work.join("a"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .collect();
    assert_eq!(pngs.len(), 5);
    for p in &pngs {
        assert_eq!(sha(p), sha(&work.join("b").join(p.file_name().unwrap())));
    }
    assert_eq!(sha(&work.join("a/provenance.jsonl")), sha(&work.join("b/provenance.jsonl")));

    // the output manifest is a valid input
    let report = ok_report(&scribeforge(
        &work,
        &["augment", "--manifest", "a/manifest.tsv", "--out-dir", "aug"],
    ));
    assert_eq!(report["succeeded"], 5);
}

#[test]
fn out_of_alphabet_corpus_fails() {
    let (_tmp, work) = toy_copy();
    build_index(&work);
    std::fs::write(work.join("bad.txt"), "ABC\nÆØÅ\n").unwrap();
    let out = scribeforge(
        &work,
        &["synthesize", "--index", "index.json", "--corpus", "bad.txt", "--n-lines", "3", "--out-dir", "s"],
    );
    assert!(!out.status.success());
}

#[test]
fn page_mode_writes_one_image() {
    let (_tmp, work) = toy_copy();
    build_index(&work);
    ok_report(&scribeforge(
        &work,
        &["synthesize", "--index", "index.json", "--corpus", "corpus.txt", "--n-lines", "4", "--page", "--out-dir", "p"],
    ));
    let page = scribeforge::RasterImage::load(work.join("p/page.png")).unwrap();
    assert!(page.height() > 4 * 128);
    assert_eq!(std::fs::read_to_string(work.join("p/page.txt")).unwrap().lines().count(), 4);
}

#[test]
fn augment_with_zero_proba_copies_inputs() {
    let (_tmp, work) = toy_copy();
    std::fs::write(work.join("off.json"), r#"{"blot": {"proba": 0.0}}"#).unwrap();
    ok_report(&scribeforge(
        &work,
        &["--config", "off.json", "augment", "--manifest", "manifest.tsv", "--out-dir", "aug"],
    ));
    for i in 0..20 {
        let name = format!("line_{i:02}.png");
        assert_eq!(sha(&work.join("images").join(&name)), sha(&work.join("aug").join(&name)));
    }
}

#[test]
fn augment_keeps_labels_and_is_reproducible() {
    let (_tmp, work) = toy_copy();
    for dir in ["x", "y"] {
        ok_report(&scribeforge(
            &work,
            &["--seed", "8", "augment", "--manifest", "manifest.tsv", "--boundaries", "boundaries.json", "--out-dir", dir],
        ));
    }
    let labels = |p: &Path| -> Vec<(String, String)> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| {
                let cols: Vec<&str> = l.split('\t').collect();
                (cols[0].to_string(), cols[2].to_string())
            })
            .collect()
    };
    assert_eq!(labels(&work.join("manifest.tsv")), labels(&work.join("x/manifest.tsv")));
    let mut changed = 0;
    for i in 0..20 {
        let name = format!("line_{i:02}.png");
        assert_eq!(sha(&work.join("x").join(&name)), sha(&work.join("y").join(&name)));
        changed += usize::from(sha(&work.join("x").join(&name)) != sha(&work.join("images").join(&name)));
    }
    assert!(changed > 0);
}

#[test]
fn evaluate_prints_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("pred.tsv"),
        "id\tprediction\ttruth\n1\tthe cat\tthe hat\n2\tAB\tab\n",
    )
    .unwrap();
    let report = ok_report(&scribeforge(tmp.path(), &["evaluate", "--input", "pred.tsv", "--out", "m/metrics.json"]));
    let m = &report;
    assert!((m["cer"].as_f64().unwrap() - 300.0 / 9.0).abs() < 1e-9, "{m}");
    assert_eq!(m["wer"].as_f64().unwrap(), 100.0 * 2.0 / 3.0);
    assert_eq!(m["acc"].as_f64().unwrap(), 0.0);
    assert_eq!(m["n"], 2);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("m/metrics.json")).unwrap()).unwrap();
    assert_eq!(&saved, m);

    let lower = ok_report(&scribeforge(tmp.path(), &["evaluate", "--input", "pred.tsv", "--lowercase"]));
    assert_eq!(lower["acc"].as_f64().unwrap(), 50.0);
}

#[test]
fn preview_with_one_sample_is_one_row() {
    let (_tmp, work) = toy_copy();
    let report = ok_report(&scribeforge(
        &work,
        &["preview", "--mode", "originals", "--manifest", "manifest.tsv", "--samples", "1", "--out", "one.png"],
    ));
    assert_eq!(report["succeeded"], 1);
    let sheet = scribeforge::RasterImage::load(work.join("one.png")).unwrap();
    assert_eq!(sheet.height(), 128);
}
