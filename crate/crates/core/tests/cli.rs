mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use common::*;
use ocix::service::cli::run;

/// Runs the CLI in-process and returns (exit code, stdout, stderr).
fn ocix(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("ocix").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Ingests `corpus` and builds an index; returns the index directory.
fn built(dir: &Path, corpus: &str) -> std::path::PathBuf {
    let input = dir.join("dump.jsonl");
    fs::write(&input, corpus).unwrap();
    let store = dir.join("store");
    let index = dir.join("index");
    let (code, _, err) = ocix(&["ingest", "--store", path(&store), path(&input)]);
    assert_eq!(code, 0, "{err}");
    let (code, _, err) = ocix(&["build", "--store", path(&store), "--index-dir", path(&index), "--agent", "tester"]);
    assert_eq!(code, 0, "{err}");
    index
}

#[test]
fn count_on_two_record_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let index = built(dir.path(), TWO_RECORDS);
    let (code, out, _) = ocix(&["query", "--index-dir", path(&index), "--count", "10.1/b"]);
    assert_eq!((code, out.as_str()), (0, "1\n"));
    let (code, out, _) = ocix(&["query", "--index-dir", path(&index), "--count", "https://doi.org/10.1/A"]);
    assert_eq!((code, out.as_str()), (0, "0\n"));
}

#[test]
fn malformed_oci_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let index = built(dir.path(), TWO_RECORDS);
    let (code, out, err) = ocix(&["query", "--index-dir", path(&index), "--oci", "oci:bogus"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.starts_with("error: MalformedOci"), "{err}");

    let (code, _, err) = ocix(&["query", "--index-dir", path(&index), "--oci", "oci:020010036013911-020010036013910"]);
    assert_eq!(code, 2);
    assert!(err.contains("UnknownOci"), "{err}");
}

#[test]
fn query_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let index = built(dir.path(), TWO_RECORDS);
    let idx = path(&index);

    let (code, out, _) = ocix(&["query", "--index-dir", idx, "--oci", "oci:020010036013910-020010036013911"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["cited"], "10.1/b");
    assert_eq!(v["license"], "CC0-1.0");

    let (_, out, _) = ocix(&["query", "--index-dir", idx, "--citations", "10.1/b", "--format", "csv"]);
    assert_eq!(out.lines().count(), 3);
    assert!(out.starts_with("# license: CC0-1.0\n"));

    let (_, out, _) = ocix(&["query", "--index-dir", idx, "--references", "10.1/b"]);
    assert_eq!(out.trim_end(), r#"{"records":[],"license":"CC0-1.0"}"#);

    let (code, _, err) = ocix(&["query", "--index-dir", idx, "--metadata", "10.1/zz"]);
    assert_eq!(code, 2);
    assert!(err.contains("UnknownDoi"));

    let (code, out, _) = ocix(&["query", "--index-dir", idx, "--provenance", "10.1/a"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["snapshots"][0]["agent"], "tester");
    assert_eq!(v["snapshots"][0]["snapshot_number"], 1);
    assert!(v["snapshots"][0]["invalidated_at"].is_null());
}

#[test]
fn invalid_doi_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let index = built(dir.path(), TWO_RECORDS);
    let (code, _, err) = ocix(&["query", "--index-dir", path(&index), "--citations", "not-a-doi"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error: InvalidDoi"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(ocix(&[]).0, 1);
    assert_eq!(ocix(&["frobnicate"]).0, 1);
    assert_eq!(ocix(&["query", "--index-dir", "x"]).0, 1);
    assert_eq!(ocix(&["query", "--count", "10.1/a", "--oci", "oci:x"]).0, 1);
    assert_eq!(ocix(&["export", "--format", "xml"]).0, 1);
    assert_eq!(ocix(&["serve", "--port", "notaport"]).0, 1);
    let (code, out, _) = ocix(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("ingest"));
}

#[test]
fn missing_index_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing");
    let (code, _, err) = ocix(&["stats", "--index-dir", path(&missing)]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error: IoFailure"), "{err}");
}

#[test]
fn export_formats() {
    let dir = tempfile::tempdir().unwrap();
    let index = built(dir.path(), TWO_RECORDS);
    let csv = dir.path().join("out.csv");
    let nt = dir.path().join("out.nt");
    assert_eq!(ocix(&["export", "--index-dir", path(&index), "--format", "csv", "--output", path(&csv)]).0, 0);
    assert_eq!(ocix(&["export", "--index-dir", path(&index), "--format", "nt", "--output", path(&nt)]).0, 0);
    let csv = fs::read_to_string(csv).unwrap();
    assert_eq!(csv, fs::read_to_string(index.join("citations.csv")).unwrap());
    assert_eq!(csv.lines().nth(2).unwrap(), "oci:020010036013910-020010036013911,10.1/a,10.1/b,2020,P2Y,no,no,no");
    let nt = fs::read_to_string(nt).unwrap();
    assert_eq!(check_ntriples(&nt).unwrap().len(), 5);

    let (code, out, _) = ocix(&["export", "--index-dir", path(&index), "--format", "nt"]);
    assert_eq!(code, 0);
    assert_eq!(out, nt);
}

#[test]
fn export_nt_of_empty_index_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let index = built(dir.path(), "");
    let nt = dir.path().join("empty.nt");
    let (code, _, _) = ocix(&["export", "--index-dir", path(&index), "--format", "nt", "--output", path(&nt)]);
    assert_eq!(code, 0);
    assert_eq!(fs::read(nt).unwrap(), b"");
}

#[test]
fn ingest_report_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = format!(
        "{TWO_RECORDS}not json\n{{\"doi\":\"bad\"}}\n{{\"doi\":\"10.1/c\",\"references\":[\"10.1/a\",\"10.1/zz\"]}}\n"
    );
    let input = dir.path().join("dump.jsonl");
    fs::write(&input, corpus).unwrap();
    let store = dir.path().join("store");
    let (code, out, _) = ocix(&["ingest", "--store", path(&store), path(&input)]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["lines_read"], 5);
    assert_eq!(v["report"]["resources_accepted"], 3);
    assert_eq!(v["report"]["malformed_lines"]["count"], 2);
    assert_eq!(v["report"]["malformed_lines"]["sample_lines"], serde_json::json!([3, 4]));

    let index = dir.path().join("index");
    assert_eq!(ocix(&["build", "--store", path(&store), "--index-dir", path(&index)]).0, 0);

    let reference = dir.path().join("ref.csv");
    fs::write(&reference, "citing,cited\n10.1/a,10.1/b\n10.1/c,10.1/a\n10.1/b,10.1/a\n10.1/c,10.1/b\n").unwrap();
    let (code, out, _) = ocix(&["stats", "--index-dir", path(&index), "--reference", path(&reference)]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["stats"]["citation_links"], 3);
    assert_eq!(v["stats"]["dangling_citations"], 1);
    assert_eq!(v["stats"]["bibliographic_resources"], 4);
    assert_eq!(v["coverage"]["percent"], "50.0");
    assert_eq!(v["license"], "CC0-1.0");
}

#[test]
fn binary_reads_stdin_and_uses_env() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let index = dir.path().join("index");
    let exe = env!("CARGO_BIN_EXE_ocix");

    let mut child = Command::new(exe)
        .args(["ingest", "--store", path(&store), "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::null())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(TWO_RECORDS.as_bytes()).unwrap();
    assert!(child.wait().unwrap().success());

    let status = Command::new(exe)
        .args(["build", "--store", path(&store)])
        .env("INDEX_DIR", &index)
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success());

    let out = Command::new(exe).args(["query", "--count", "10.1/b"]).env("INDEX_DIR", &index).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, b"1\n");

    let out = Command::new(exe).args(["query", "--oci", "oci:bogus"]).env("INDEX_DIR", &index).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("MalformedOci"));

    let out = Command::new(exe).arg("nonsense").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
