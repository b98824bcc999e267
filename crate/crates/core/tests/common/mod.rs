#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use chrono::{TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use framescope::corpus::{Corpus, Tweet};
use framescope::topicmodel::LdaModel;

const STEMS: [&str; 6] = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot"];

/// Term `j` of planted topic `k`: purely alphabetic so it survives
/// preprocessing untouched.
pub fn planted_term(k: usize, j: usize) -> String {
    let a = (b'a' + (j / 26) as u8) as char;
    let b = (b'a' + (j % 26) as u8) as char;
    format!("{}{a}{b}", STEMS[k])
}

pub struct Planted {
    pub corpus: Corpus,
    /// Planted topic of each document.
    pub labels: Vec<usize>,
    pub topics: usize,
    pub terms_per_topic: usize,
}

/// Single-topic documents over disjoint per-topic vocabularies; document `d`
/// belongs to topic `d % topics`.
pub fn planted_corpus(topics: usize, docs: usize, doc_len: usize, terms_per_topic: usize, seed: u64) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Utc.with_ymd_and_hms(2020, 3, 1, 0, 0, 0).unwrap();
    let mut tweets = Vec::with_capacity(docs);
    let mut labels = Vec::with_capacity(docs);
    for d in 0..docs {
        let k = d % topics;
        let words: Vec<String> = (0..doc_len)
            .map(|_| planted_term(k, rng.gen_range(0..terms_per_topic)))
            .collect();
        tweets.push(Tweet {
            id: d.to_string(),
            author_id: format!("a{d}"),
            created_at: start + chrono::Duration::seconds(d as i64),
            text: words.join(" "),
            is_retweet: false,
            lang: None,
        });
        labels.push(k);
    }
    Planted {
        corpus: Corpus::new("planted", tweets),
        labels,
        topics,
        terms_per_topic,
    }
}

/// Planted topic a vocabulary term came from.
pub fn term_topic(term: &str) -> usize {
    STEMS.iter().position(|s| term.starts_with(s)).expect("planted term")
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Fraction of token assignments that agree with the planted source topic
/// under the best one-to-one mapping of learned to planted topics. Returns
/// the purity and the mapping (learned topic -> planted topic).
pub fn best_match_purity(model: &LdaModel) -> (f64, Vec<usize>) {
    let k = model.num_topics();
    let mut confusion = vec![vec![0u64; k]; k];
    for (t, row) in model.topic_term_counts().iter().enumerate() {
        for (w, &c) in row.iter().enumerate() {
            confusion[t][term_topic(&model.vocabulary()[w])] += u64::from(c);
        }
    }
    let total = model.total_tokens() as f64;
    permutations(k)
        .into_iter()
        .map(|perm| {
            let hits: u64 = (0..k).map(|t| confusion[t][perm[t]]).sum();
            (hits as f64 / total, perm)
        })
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap()
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_framescope"));
    cmd.env_remove("FRAMESCOPE_SEED");
    cmd
}

/// Runs the binary and returns stderr; panics with the diagnostic on failure.
pub fn run(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("spawning framescope");
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(out.status.success(), "framescope {args:?} failed: {stderr}");
    stderr
}

/// filter -> train K=4 and K=16 -> frames -> report over the bundled fixture,
/// seed 42. Returns the report directory.
pub fn full_pipeline(work: &Path) -> PathBuf {
    let p = |name: &str| work.join(name).to_string_lossy().into_owned();
    let input = fixture("tweets_1000.jsonl").to_string_lossy().into_owned();
    run(&["filter", "--input", &input, "--output", &p("filtered.jsonl")]);
    for k in ["4", "16"] {
        run(&[
            "train", "--input", &p("filtered.jsonl"), "--output", &p(&format!("k{k}.json")),
            "--topics", k, "--seed", "42",
        ]);
    }
    run(&["frames", "--input", &p("filtered.jsonl"), "--output", &p("frames"), "--model", &p("k4.json")]);
    run(&[
        "report", "--input", &p("filtered.jsonl"), "--model", &p("k4.json"), "--model", &p("k16.json"),
        "--label", "fixture", "--output", &p("report"),
    ]);
    work.join("report")
}

/// Compares `actual` against the golden file, or rewrites the golden file
/// when FRAMESCOPE_BLESS is set.
pub fn check_golden(name: &str, actual: &[u8]) -> Result<(), String> {
    let path = golden_dir().join(name);
    if std::env::var_os("FRAMESCOPE_BLESS").is_some() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return Ok(());
    }
    let expected = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        let first = expected
            .iter()
            .zip(actual)
            .position(|(a, b)| a != b)
            .unwrap_or(expected.len().min(actual.len()));
        Err(format!(
            "{name} differs from golden at byte {first} ({} vs {} bytes)",
            actual.len(),
            expected.len()
        ))
    }
}
