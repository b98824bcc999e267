//! Frame lexicons and lexicon matching.
//!
//! Matching runs on lightly tokenised text (see [`match_tokens`]): lowercase,
//! exact word forms, no stopword or domain-term removal. Multi-word entries
//! match contiguous token runs; at each position the longest entry wins and
//! consumes its tokens, so `front line` never also fires `front` and `line`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::textprep::{match_tokens, PrepConfig, TokenList};
use crate::topicmodel::LdaModel;

/// Fixed column order of every frame table.
pub const FRAME_ORDER: [&str; 5] = ["war", "family", "storm", "monster", "tsunami"];

const BUILTIN: [(&str, &str); 5] = [
    ("war", include_str!("../data/lexicons/war.txt")),
    ("family", include_str!("../data/lexicons/family.txt")),
    ("storm", include_str!("../data/lexicons/storm.txt")),
    ("monster", include_str!("../data/lexicons/monster.txt")),
    ("tsunami", include_str!("../data/lexicons/tsunami.txt")),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameLexicon {
    pub name: String,
    entries: Vec<Vec<String>>,
}

impl FrameLexicon {
    /// Parses lexicon text: one entry per line, spaces separate the tokens
    /// of an n-gram, `#` starts a comment line. Duplicates are dropped.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let name = name.into();
        let mut entries: Vec<Vec<String>> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let entry: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
            if !entries.contains(&entry) {
                entries.push(entry);
            }
        }
        if entries.is_empty() {
            return Err(Error::EmptyInput(format!("lexicon `{name}` has no entries")));
        }
        Ok(FrameLexicon { name, entries })
    }

    pub fn from_entries<I, S>(name: impl Into<String>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let text: Vec<String> = entries.into_iter().map(|s| s.as_ref().to_owned()).collect();
        Self::parse(name, &text.join("\n"))
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let key = name.to_lowercase();
        BUILTIN
            .iter()
            .find(|(n, _)| *n == key)
            .ok_or_else(|| Error::UnknownLexicon(name.to_owned()))
            .and_then(|(n, text)| Self::parse(n.to_uppercase(), text))
    }

    /// Every bundled lexicon, in [`FRAME_ORDER`].
    pub fn builtins() -> Vec<Self> {
        FRAME_ORDER
            .iter()
            .map(|n| Self::builtin(n).expect("bundled lexicon"))
            .collect()
    }

    /// A bundled name (`war`, `storm`, ...) or a path to a lexicon file. A
    /// file lexicon is named after its file stem, uppercased.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if BUILTIN.iter().any(|(n, _)| n.eq_ignore_ascii_case(name_or_path)) {
            return Self::builtin(name_or_path);
        }
        let path = Path::new(name_or_path);
        if !path.exists() {
            return Err(Error::UnknownLexicon(name_or_path.to_owned()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_uppercase())
            .unwrap_or_default();
        Self::parse(name, &text)
    }

    pub fn entries(&self) -> &[Vec<String>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, entry: &str) -> bool {
        let probe: Vec<&str> = entry.split_whitespace().collect();
        self.entries.iter().any(|e| e.iter().map(String::as_str).eq(probe.iter().copied()))
    }

    pub fn entry_text(&self, idx: usize) -> String {
        self.entries[idx].join(" ")
    }

    pub fn hash(&self) -> String {
        let lines: Vec<String> = self.entries.iter().map(|e| e.join(" ")).collect();
        crate::content_hash(
            std::iter::once(self.name.as_str()).chain(lines.iter().map(String::as_str)),
        )
    }

    fn matcher(&self) -> Matcher<'_> {
        let mut by_head: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, entry) in self.entries.iter().enumerate() {
            by_head.entry(entry[0].as_str()).or_default().push(i);
        }
        for candidates in by_head.values_mut() {
            candidates.sort_by(|&a, &b| {
                self.entries[b].len().cmp(&self.entries[a].len()).then(a.cmp(&b))
            });
        }
        Matcher { lex: self, by_head }
    }
}

struct Matcher<'a> {
    lex: &'a FrameLexicon,
    by_head: HashMap<&'a str, Vec<usize>>,
}

impl Matcher<'_> {
    /// Per-entry occurrence counts, indexed by entry.
    fn scan(&self, tokens: &[String]) -> BTreeMap<usize, usize> {
        let mut hits = BTreeMap::new();
        let mut i = 0;
        while i < tokens.len() {
            let found = self.by_head.get(tokens[i].as_str()).and_then(|cands| {
                cands.iter().copied().find(|&e| {
                    let entry = &self.lex.entries[e];
                    tokens.len() - i >= entry.len()
                        && entry.iter().zip(&tokens[i..]).all(|(a, b)| a == b)
                })
            });
            match found {
                Some(e) => {
                    *hits.entry(e).or_insert(0) += 1;
                    i += self.lex.entries[e].len();
                }
                None => i += 1,
            }
        }
        hits
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameMatch {
    pub doc_id: String,
    pub frame: String,
    /// Matched entries and their occurrence counts, in lexicon order.
    pub entries: Vec<(String, usize)>,
}

impl FrameMatch {
    pub fn occurrences(&self) -> usize {
        self.entries.iter().map(|(_, n)| n).sum()
    }
}

/// Matches one token list against `lex`. `None` when nothing fires.
pub fn match_doc(doc_id: &str, tokens: &[String], lex: &FrameLexicon) -> Option<FrameMatch> {
    let hits = lex.matcher().scan(tokens);
    if hits.is_empty() {
        return None;
    }
    Some(FrameMatch {
        doc_id: doc_id.to_owned(),
        frame: lex.name.clone(),
        entries: hits.into_iter().map(|(e, n)| (lex.entry_text(e), n)).collect(),
    })
}

/// Match-ready tokens for every tweet of a corpus.
pub fn corpus_match_tokens(corpus: &Corpus) -> Vec<TokenList> {
    corpus.tweets().par_iter().map(|t| match_tokens(&t.text)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub entry: String,
    pub count: usize,
    pub share: f64,
}

impl fmt::Display for ProfileRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({:.2}%, {})", self.entry, self.share * 100.0, self.count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameCoverage {
    pub frame: String,
    pub total: usize,
    pub n_matched: usize,
    pub pct: f64,
    /// Documents with two or more entry occurrences.
    pub n_multi: usize,
    /// Entries with at least one occurrence, by count then entry text.
    pub term_profile: Vec<ProfileRow>,
}

/// Coverage over pre-tokenised documents.
pub fn coverage_tokens(docs: &[TokenList], lex: &FrameLexicon) -> Result<FrameCoverage> {
    if docs.is_empty() {
        return Err(Error::EmptyInput("coverage of an empty corpus".into()));
    }
    let matcher = lex.matcher();
    let per_doc: Vec<BTreeMap<usize, usize>> = docs.par_iter().map(|d| matcher.scan(d)).collect();

    let mut entry_counts = vec![0usize; lex.len()];
    let (mut n_matched, mut n_multi) = (0, 0);
    for hits in &per_doc {
        let occurrences: usize = hits.values().sum();
        if occurrences >= 1 {
            n_matched += 1;
        }
        if occurrences >= 2 {
            n_multi += 1;
        }
        for (&e, &n) in hits {
            entry_counts[e] += n;
        }
    }

    Ok(FrameCoverage {
        frame: lex.name.clone(),
        total: docs.len(),
        n_matched,
        pct: n_matched as f64 / docs.len() as f64,
        n_multi,
        term_profile: ranked_profile(lex, &entry_counts),
    })
}

fn ranked_profile(lex: &FrameLexicon, counts: &[usize]) -> Vec<ProfileRow> {
    let all: usize = counts.iter().sum();
    let mut rows: Vec<ProfileRow> = counts
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(e, &n)| ProfileRow {
            entry: lex.entry_text(e),
            count: n,
            share: n as f64 / all as f64,
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.entry.cmp(&b.entry)));
    rows
}

pub fn coverage(corpus: &Corpus, lex: &FrameLexicon) -> Result<FrameCoverage> {
    coverage_tokens(&corpus_match_tokens(corpus), lex)
}

/// Per-entry occurrence counts over `docs`, in lexicon order.
pub fn entry_counts(docs: &[TokenList], lex: &FrameLexicon) -> Vec<usize> {
    let matcher = lex.matcher();
    let mut counts = vec![0usize; lex.len()];
    for hits in docs.iter().map(|d| matcher.scan(d)) {
        for (e, n) in hits {
            counts[e] += n;
        }
    }
    counts
}

/// Keeps the `n` entries used most often in `docs`, ties broken by entry
/// text. Asking for more entries than exist returns the whole lexicon.
pub fn truncate_tokens(lex: &FrameLexicon, docs: &[TokenList], n: usize) -> Result<FrameLexicon> {
    if n == 0 {
        return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
    }
    if n >= lex.len() {
        if n > lex.len() {
            log::warn!("cutoff {n} exceeds {} entries of {}", lex.len(), lex.name);
        }
        return Ok(lex.clone());
    }
    let counts = entry_counts(docs, lex);
    let mut order: Vec<usize> = (0..lex.len()).collect();
    order.sort_by(|&a, &b| {
        counts[b]
            .cmp(&counts[a])
            .then_with(|| lex.entry_text(a).cmp(&lex.entry_text(b)))
    });
    Ok(FrameLexicon {
        name: lex.name.clone(),
        entries: order.into_iter().take(n).map(|e| lex.entries[e].clone()).collect(),
    })
}

pub fn truncate(lex: &FrameLexicon, corpus: &Corpus, n: usize) -> Result<FrameLexicon> {
    truncate_tokens(lex, &corpus_match_tokens(corpus), n)
}

/// Documents × frames binary incidence, rows in corpus order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyMatrix {
    pub frames: Vec<String>,
    pub doc_ids: Vec<String>,
    cells: Vec<u8>,
}

impl ContingencyMatrix {
    pub fn from_rows(frames: Vec<String>, rows: &[Vec<u8>]) -> Result<Self> {
        let k = frames.len();
        if rows.iter().any(|r| r.len() != k || r.iter().any(|&c| c > 1)) {
            return Err(Error::InvalidArgument(
                "rows must have one 0/1 cell per frame".into(),
            ));
        }
        Ok(ContingencyMatrix {
            frames,
            doc_ids: (1..=rows.len()).map(|i| i.to_string()).collect(),
            cells: rows.concat(),
        })
    }

    pub fn num_rows(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn row(&self, i: usize) -> &[u8] {
        let k = self.frames.len();
        &self.cells[i * k..(i + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.cells.chunks(self.frames.len().max(1))
    }

    pub fn column_sums(&self) -> Vec<usize> {
        let mut sums = vec![0usize; self.frames.len()];
        for row in self.rows() {
            for (s, &c) in sums.iter_mut().zip(row) {
                *s += usize::from(c);
            }
        }
        sums
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for f in &self.frames {
            out.push(',');
            out.push_str(f);
        }
        out.push('\n');
        for (id, row) in self.doc_ids.iter().zip(self.rows()) {
            out.push_str(id);
            for c in row {
                out.push(',');
                out.push_str(&c.to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub fn contingency_tokens(
    ids: &[String],
    docs: &[TokenList],
    lexicons: &[FrameLexicon],
) -> Result<ContingencyMatrix> {
    if lexicons.len() < 2 {
        return Err(Error::InvalidArgument("need at least two lexicons".into()));
    }
    if docs.is_empty() {
        return Err(Error::EmptyInput("contingency of an empty corpus".into()));
    }
    let matchers: Vec<Matcher<'_>> = lexicons.iter().map(FrameLexicon::matcher).collect();
    let rows: Vec<Vec<u8>> = docs
        .par_iter()
        .map(|d| {
            matchers
                .iter()
                .map(|m| u8::from(!m.scan(d).is_empty()))
                .collect()
        })
        .collect();
    Ok(ContingencyMatrix {
        frames: lexicons.iter().map(|l| l.name.clone()).collect(),
        doc_ids: ids.to_vec(),
        cells: rows.concat(),
    })
}

pub fn contingency(corpus: &Corpus, lexicons: &[FrameLexicon]) -> Result<ContingencyMatrix> {
    let ids: Vec<String> = corpus.iter().map(|t| t.id.clone()).collect();
    contingency_tokens(&ids, &corpus_match_tokens(corpus), lexicons)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameTopicProfile {
    pub frame: String,
    pub topics: usize,
    pub matched_docs: usize,
    pub profile: Vec<f64>,
}

/// Mean inferred topic mixture over the documents that match `lex`. Matched
/// documents go through the full preprocessing pipeline before inference.
pub fn frame_topic_profile(
    model: &LdaModel,
    corpus: &Corpus,
    lex: &FrameLexicon,
    prep: &PrepConfig,
) -> Result<FrameTopicProfile> {
    let texts: Vec<&str> = corpus.iter().map(|t| t.text.as_str()).collect();
    profile_texts(model, &texts, &corpus_match_tokens(corpus), lex, prep)
}

pub(crate) fn profile_texts(
    model: &LdaModel,
    texts: &[&str],
    match_docs: &[TokenList],
    lex: &FrameLexicon,
    prep: &PrepConfig,
) -> Result<FrameTopicProfile> {
    let matcher = lex.matcher();
    let selected: Vec<&str> = texts
        .iter()
        .zip(match_docs)
        .filter(|(_, toks)| !matcher.scan(toks).is_empty())
        .map(|(text, _)| *text)
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no document matches frame {}",
            lex.name
        )));
    }
    let thetas: Vec<Vec<f64>> = selected
        .par_iter()
        .map(|text| model.infer(&prep.preprocess(text)).theta)
        .collect();
    let k = model.num_topics();
    let mut mean = vec![0.0; k];
    for theta in &thetas {
        for (m, t) in mean.iter_mut().zip(theta) {
            *m += t;
        }
    }
    let n = thetas.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(FrameTopicProfile {
        frame: lex.name.clone(),
        topics: k,
        matched_docs: thetas.len(),
        profile: mean,
    })
}
