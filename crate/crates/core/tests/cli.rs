mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Child, Stdio};

use common::{bin, fixture, run};
use framescope::report::Report;

const THREE_LINES: &str = concat!(
    r#"{"id":"1","author_id":"a","created_at":"2020-03-20T10:00:00Z","text":"Stay home #COVID19","is_retweet":false}"#, "\n",
    r#"{"id":"2","author_id":"b","created_at":"2020-03-20T11:00:00Z","text":"Wash your hands #coronavirus","is_retweet":false}"#, "\n",
    r#"{"id":"3","author_id":"a","created_at":"2020-03-20T12:00:00Z","text":"Again from a #covid19","is_retweet":false}"#, "\n",
);

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn filter_drops_the_repeat_author() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("raw.jsonl");
    std::fs::write(&input, THREE_LINES).unwrap();
    let output = dir.path().join("out.jsonl");
    run(&["filter", "--input", &s(&input), "--output", &s(&output)]);

    let text = String::from_utf8(read(&output)).unwrap();
    let ids: Vec<String> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["id"].as_str().unwrap().to_owned())
        .collect();
    assert_eq!(ids, ["1", "2"]);
    let ledger = String::from_utf8(read(&dir.path().join("out.ledger.csv"))).unwrap();
    assert_eq!(ledger, "date,collected,retained\n2020-03-20,3,2\n");
}

#[test]
fn train_is_deterministic_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let input = s(&fixture("tweets_1000.jsonl"));
    let out = |n: &str| s(&dir.path().join(n));
    run(&["train", "--input", &input, "--output", &out("a.json"), "--topics", "4", "--seed", "42"]);
    run(&["train", "--input", &input, "--output", &out("b.json"), "--topics", "4", "--seed", "42"]);
    assert_eq!(read(&dir.path().join("a.json")), read(&dir.path().join("b.json")));
    assert_eq!(read(&dir.path().join("a.coherence.csv")), read(&dir.path().join("b.coherence.csv")));

    let seeded = bin()
        .args(["train", "--input", &input, "--output", &out("env.json"), "--topics", "4"])
        .env("FRAMESCOPE_SEED", "42")
        .status()
        .unwrap();
    assert!(seeded.success());
    assert_eq!(read(&dir.path().join("a.json")), read(&dir.path().join("env.json")));

    run(&["train", "--input", &input, "--output", &out("c.json"), "--topics", "4", "--seed", "7"]);
    assert_ne!(read(&dir.path().join("a.json")), read(&dir.path().join("c.json")));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = walk(dir)
        .into_iter()
        .map(|p| (s(p.strip_prefix(dir).unwrap()), read(&p)))
        .collect();
    files.sort();
    files
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}

#[test]
fn every_subcommand_rewrites_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let report_dir = common::full_pipeline(dir.path());
    let p = |n: &str| s(&dir.path().join(n));
    run(&["export-vis", "--model", &p("k4.json"), "--input", &p("filtered.jsonl"), "--output", &p("vis.json")]);
    let reports = [s(&report_dir.join("report.json")), s(&report_dir.join("report.json"))];
    run(&["compare", "--input", &reports[0], "--input", &reports[1], "--output", &p("compare")]);
    let before = snapshot(dir.path());

    common::full_pipeline(dir.path());
    run(&["export-vis", "--model", &p("k4.json"), "--input", &p("filtered.jsonl"), "--output", &p("vis.json")]);
    run(&["compare", "--input", &reports[0], "--input", &reports[1], "--output", &p("compare")]);
    let after = snapshot(dir.path());

    assert_eq!(before.len(), after.len());
    for ((name, a), (_, b)) in before.iter().zip(&after) {
        assert!(a == b, "{name} changed on re-run");
    }
    assert!(before.iter().any(|(n, _)| n.ends_with("vis.json")));
    assert!(before.iter().any(|(n, _)| n.ends_with("comparison.md")));
}

#[test]
fn failures_exit_nonzero_naming_the_path() {
    let out = bin()
        .args(["train", "--input", "/no/such/tweets.jsonl", "--output", "/tmp/never.json"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with("framescope: "));
    assert!(stderr.contains("/no/such/tweets.jsonl"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("model.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = bin()
        .args(["export-vis", "--model", &s(&bad), "--output", &s(&dir.path().join("vis.json"))])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains(&s(&bad)));
}

#[test]
fn report_rejects_a_model_from_another_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.jsonl");
    std::fs::write(&raw, THREE_LINES).unwrap();
    let model = s(&dir.path().join("m.json"));
    run(&["train", "--input", &s(&raw), "--output", &model, "--topics", "2"]);
    let out = bin()
        .args([
            "report", "--input", &s(&fixture("tweets_1000.jsonl")), "--model", &model,
            "--output", &s(&dir.path().join("r")),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("vocabulary"));
}

struct Served(Child);

impl Drop for Served {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn serve(vis: &Path, labels: &Path) -> (Served, String) {
    let mut child = bin()
        .args(["serve", "--vis", &s(vis), "--labels", &s(labels), "--port", "0"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line
        .trim()
        .rsplit("http://")
        .next()
        .unwrap_or_else(|| panic!("unexpected banner {line:?}"))
        .to_owned();
    (Served(child), addr)
}

fn http(addr: &str, method: &str, path: &str, body: &str) -> (u16, String) {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut raw = String::new();
    stream.read_to_string(&mut raw).unwrap();
    let status = raw.split_whitespace().nth(1).unwrap().parse().unwrap();
    let body = raw.split_once("\r\n\r\n").map(|(_, b)| b.to_owned()).unwrap_or_default();
    (status, body)
}

#[test]
fn labels_round_trip_through_serve_into_the_next_report() {
    let dir = tempfile::tempdir().unwrap();
    let report_dir = common::full_pipeline(dir.path());
    let p = |n: &str| dir.path().join(n);
    run(&["export-vis", "--model", &s(&p("k4.json")), "--output", &s(&p("vis.json"))]);
    let labels = p("labels.json");

    let (_server, addr) = serve(&p("vis.json"), &labels);
    let (status, vis) = http(&addr, "GET", "/api/vis", "");
    assert_eq!(status, 200);
    assert_eq!(vis.as_bytes(), read(&p("vis.json")));

    let (status, body) = http(&addr, "GET", "/api/labels", "");
    assert_eq!((status, body.as_str()), (200, "{}"));

    let put = r#"{"2":{"label":"Home life","author":"analyst","timestamp":"2020-04-02T10:00:00Z"}}"#;
    let (status, _) = http(&addr, "PUT", "/api/labels", put);
    assert_eq!(status, 200);
    let (_, body) = http(&addr, "GET", "/api/labels", "");
    let got: serde_json::Value = serde_json::from_str(&body).unwrap();
    let sent: serde_json::Value = serde_json::from_str(put).unwrap();
    assert_eq!(got, sent);

    // Invalid labels are rejected and leave the file alone.
    let (status, _) = http(&addr, "PUT", "/api/labels", r#"{"9":{"label":"x"}}"#);
    assert_eq!(status, 400);
    let (status, _) = http(&addr, "PUT", "/api/labels", r#"{"1":{"label":"  "}}"#);
    assert_eq!(status, 400);
    let (status, _) = http(&addr, "DELETE", "/api/labels", "");
    assert_eq!(status, 405);
    let on_disk: serde_json::Value = serde_json::from_slice(&read(&labels)).unwrap();
    assert_eq!(on_disk, sent);

    let (status, _) = http(&addr, "GET", "/../../etc/passwd", "");
    assert!(status == 400 || status == 404);

    run(&[
        "report", "--input", &s(&p("filtered.jsonl")), "--model", &s(&p("k4.json")),
        "--labels", &s(&labels), "--output", &s(&p("labelled")),
    ]);
    let md = String::from_utf8(read(&p("labelled/report.md"))).unwrap();
    assert!(md.contains("Topic #2: Home life"), "{md}");
    assert!(md.contains("Topic #1 (unlabeled)"));
    let unlabelled = String::from_utf8(read(&report_dir.join("report.md"))).unwrap();
    assert!(!unlabelled.contains("Home life"));
}

#[test]
fn compare_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report_dir = common::full_pipeline(dir.path());
    let report = s(&report_dir.join("report.json"));
    let out = dir.path().join("cmp");
    run(&["compare", "--input", &report, "--input", &report, "--output", &s(&out)]);
    for name in ["comparison.json", "comparison.md", "comparison.csv", "frame_bars.csv"] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let single = bin()
        .args(["compare", "--input", &report, "--output", &s(&dir.path().join("one"))])
        .output()
        .unwrap();
    assert!(!single.status.success());

    let parsed = Report::load(&report).unwrap();
    assert_eq!(parsed.corpus.label, "fixture");
    assert_eq!(parsed.models.len(), 2);
}
