//! Report assembly: every table and figure dataset for one corpus, analyst
//! topic labels, and the multi-corpus frame comparison.
//!
//! Structured output keeps full precision; rounding happens only when
//! rendering Markdown and CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::frames::{
    contingency_tokens, corpus_match_tokens, coverage_tokens, profile_texts, truncate_tokens,
    FrameCoverage, FrameLexicon, FrameTopicProfile,
};
use crate::stats::{cochran_q, format_p, zipf_fit, CochranResult, ZipfFit};
use crate::textprep::{top_terms, BagOfWords, PrepConfig, TermCount, TokenList};
use crate::topicmodel::{LdaModel, TopicTerm};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicLabel {
    pub label: String,
    #[serde(default)]
    pub author: String,
    #[serde(default)]
    pub timestamp: String,
}

/// Analyst labels keyed by 1-based topic number.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TopicLabelSet(pub BTreeMap<u32, TopicLabel>);

impl TopicLabelSet {
    pub fn get(&self, id: u32) -> Option<&TopicLabel> {
        self.0.get(&id)
    }

    pub fn insert(&mut self, id: u32, label: TopicLabel) {
        self.0.insert(id, label);
    }

    pub fn validate(&self, topics: usize) -> Result<()> {
        for (&id, label) in &self.0 {
            if id == 0 || id as usize > topics {
                return Err(Error::TopicOutOfRange { id, topics });
            }
            if label.label.trim().is_empty() {
                return Err(Error::InvalidArgument(format!("topic {id} has an empty label")));
            }
        }
        Ok(())
    }

    /// Parses and validates a labels document. Empty input means no labels.
    pub fn parse(bytes: &[u8], topics: usize) -> Result<Self> {
        if bytes.iter().all(u8::is_ascii_whitespace) {
            return Ok(Self::default());
        }
        let set: TopicLabelSet = serde_json::from_slice(bytes)?;
        set.validate(topics)?;
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>, topics: usize) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&bytes, topics).map_err(|e| match e {
            Error::Json(err) => Error::Corrupt {
                path: path.to_path_buf(),
                reason: err.to_string(),
            },
            other => other,
        })
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        write_atomic(path.as_ref(), &bytes)
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct ReportConfig {
    /// Lexicon cutoffs, ascending.
    pub cutoffs: Vec<usize>,
    pub top_terms: usize,
    pub topic_terms: usize,
    pub coherence_terms: usize,
    pub prep: PrepConfig,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            cutoffs: vec![30, 50],
            top_terms: 30,
            topic_terms: 10,
            coherence_terms: 10,
            prep: PrepConfig::default(),
        }
    }
}

pub struct ModelInput {
    pub model: LdaModel,
    pub labels: TopicLabelSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub label: String,
    pub total_docs: usize,
    pub vocab_size: usize,
    pub vocab_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconSummary {
    pub name: String,
    pub entries: usize,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicListing {
    pub id: u32,
    pub label: Option<String>,
    pub coherence: f64,
    pub terms: Vec<TopicTerm>,
}

impl TopicListing {
    pub fn title(&self) -> String {
        match &self.label {
            Some(label) => format!("Topic #{}: {label}", self.id),
            None => format!("Topic #{} (unlabeled)", self.id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    pub topics: usize,
    pub passes: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub listings: Vec<TopicListing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffCoverage {
    pub n: usize,
    pub entries: usize,
    pub n_matched: usize,
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSection {
    pub name: String,
    pub coverage: FrameCoverage,
    pub cutoffs: Vec<CutoffCoverage>,
    pub zipf: Option<ZipfFit>,
    pub topic_profiles: Vec<FrameTopicProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format_version: u32,
    pub corpus: CorpusSummary,
    pub lexicons: Vec<LexiconSummary>,
    pub cutoffs: Vec<usize>,
    pub top_terms: Vec<TermCount>,
    pub models: Vec<ModelSection>,
    pub frames: Vec<FrameSection>,
    pub cochran: Option<CochranResult>,
}

pub fn build_report(
    corpus: &Corpus,
    models: &[ModelInput],
    lexicons: &[FrameLexicon],
    cfg: &ReportConfig,
) -> Result<Report> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("report over an empty corpus".into()));
    }
    if cfg.cutoffs.contains(&0) || cfg.cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("cutoffs must be positive and ascending".into()));
    }

    let texts: Vec<&str> = corpus.iter().map(|t| t.text.as_str()).collect();
    let prepared = cfg.prep.prepare(texts.iter().copied())?;
    let vocab = &prepared.vocab;
    for input in models {
        if input.model.vocab_hash() != vocab.hash() {
            return Err(Error::VocabularyMismatch {
                model: input.model.vocab_hash().to_owned(),
                corpus: vocab.hash(),
            });
        }
        input.labels.validate(input.model.num_topics())?;
    }
    let bags = &prepared.bags;

    let analytics: Vec<TokenList> = texts.iter().map(|t| cfg.prep.analytics_tokens(t)).collect();
    let top = top_terms(&analytics, cfg.top_terms)?;

    let model_sections = models
        .iter()
        .map(|input| model_section(input, bags, cfg))
        .collect::<Result<Vec<_>>>()?;

    let match_docs = corpus_match_tokens(corpus);
    let frames = lexicons
        .iter()
        .map(|lex| frame_section(lex, models, &texts, &match_docs, cfg))
        .collect::<Result<Vec<_>>>()?;

    let cochran = if lexicons.len() >= 2 {
        let ids: Vec<String> = corpus.iter().map(|t| t.id.clone()).collect();
        match cochran_q(&contingency_tokens(&ids, &match_docs, lexicons)?) {
            Ok(r) => Some(r),
            Err(Error::Degenerate(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    Ok(Report {
        format_version: REPORT_FORMAT_VERSION,
        corpus: CorpusSummary {
            label: corpus.label.clone(),
            total_docs: corpus.len(),
            vocab_size: vocab.len(),
            vocab_hash: vocab.hash(),
        },
        lexicons: lexicons
            .iter()
            .map(|l| LexiconSummary {
                name: l.name.clone(),
                entries: l.len(),
                hash: l.hash(),
            })
            .collect(),
        cutoffs: cfg.cutoffs.clone(),
        top_terms: top,
        models: model_sections,
        frames,
        cochran,
    })
}

fn model_section(input: &ModelInput, bags: &[BagOfWords], cfg: &ReportConfig) -> Result<ModelSection> {
    let model = &input.model;
    let coherence = model.coherence(bags, cfg.coherence_terms.min(model.vocab_size()).max(2))?;
    let listings = model
        .top_topic_terms(cfg.topic_terms)?
        .into_iter()
        .zip(coherence)
        .enumerate()
        .map(|(t, (terms, coherence))| {
            let id = t as u32 + 1;
            TopicListing {
                id,
                label: input.labels.get(id).map(|l| l.label.clone()),
                coherence,
                terms,
            }
        })
        .collect();
    let c = model.config();
    Ok(ModelSection {
        topics: c.topics,
        passes: c.passes,
        alpha: c.alpha,
        beta: c.beta,
        seed: c.seed,
        listings,
    })
}

fn frame_section(
    lex: &FrameLexicon,
    models: &[ModelInput],
    texts: &[&str],
    match_docs: &[TokenList],
    cfg: &ReportConfig,
) -> Result<FrameSection> {
    let coverage = coverage_tokens(match_docs, lex)?;
    let cutoffs = cfg
        .cutoffs
        .iter()
        .map(|&n| {
            let cut = truncate_tokens(lex, match_docs, n)?;
            let cov = coverage_tokens(match_docs, &cut)?;
            Ok(CutoffCoverage {
                n,
                entries: cut.len(),
                n_matched: cov.n_matched,
                pct: cov.pct,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let counts: Vec<u64> = coverage.term_profile.iter().map(|r| r.count as u64).collect();
    let zipf = zipf_fit(&counts).ok();
    let mut topic_profiles = Vec::new();
    for input in models {
        match profile_texts(&input.model, texts, match_docs, lex, &cfg.prep) {
            Ok(p) => topic_profiles.push(p),
            Err(Error::EmptyInput(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(FrameSection {
        name: lex.name.clone(),
        coverage,
        cutoffs,
        zipf,
        topic_profiles,
    })
}

/// `1234567` → `1,234,567`.
pub fn thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// Two-decimal rendering with thousands separators.
fn documents(n: usize) -> String {
    match n {
        1 => "1 document".to_owned(),
        n => format!("{} documents", thousands(n as u64)),
    }
}

pub fn decimal2(x: f64) -> String {
    let s = format!("{:.2}", x.abs());
    let (int, frac) = s.split_once('.').unwrap_or((&s, "00"));
    let int: u64 = int.parse().unwrap_or(0);
    let sign = if x < 0.0 && s != "0.00" { "-" } else { "" };
    format!("{sign}{}.{frac}", thousands(int))
}

pub fn percent(p: f64) -> String {
    format!("{:.2}%", p * 100.0)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(bytes: &[u8], origin: &Path) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| Error::Corrupt {
            path: origin.to_path_buf(),
            reason: e.to_string(),
        })?;
        let found = value.get("format_version").and_then(|v| v.as_u64()).unwrap_or(0);
        if found != u64::from(REPORT_FORMAT_VERSION) {
            return Err(Error::VersionMismatch {
                path: origin.to_path_buf(),
                found: found as u32,
                expected: REPORT_FORMAT_VERSION,
            });
        }
        serde_json::from_value(value).map_err(|e| Error::Corrupt {
            path: origin.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&bytes, path)
    }

    /// Wide coverage layout: matched documents and share at each cutoff, then the
    /// corpus size.
    pub fn coverage_table_csv(&self) -> String {
        let mut out = String::from("frame");
        for n in &self.cutoffs {
            let _ = write!(out, ",n_matched_{n},pct_{n}");
        }
        out.push_str(",n_matched_full,pct_full,total\n");
        for f in &self.frames {
            out.push_str(&csv_field(&f.name));
            for c in &f.cutoffs {
                let _ = write!(out, ",{},{}", c.n_matched, c.pct);
            }
            let _ = writeln!(out, ",{},{},{}", f.coverage.n_matched, f.coverage.pct, f.coverage.total);
        }
        out
    }

    pub fn coverage_csv(&self) -> String {
        let mut out = String::from("frame,n_matched,pct,n_multi\n");
        for f in &self.frames {
            let c = &f.coverage;
            let _ = writeln!(out, "{},{},{},{}", csv_field(&f.name), c.n_matched, c.pct, c.n_multi);
        }
        out
    }

    pub fn profile_csv(&self) -> String {
        let mut out = String::from("frame,entry,count,share\n");
        for f in &self.frames {
            for row in &f.coverage.term_profile {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    csv_field(&f.name),
                    csv_field(&row.entry),
                    row.count,
                    row.share
                );
            }
        }
        out
    }

    pub fn top_terms_csv(&self) -> String {
        let mut out = String::from("rank,term,count\n");
        for (i, t) in self.top_terms.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", i + 1, csv_field(&t.term), t.count);
        }
        out
    }

    pub fn topics_csv(&self, section: &ModelSection) -> String {
        let mut out = String::from("topic,label,coherence,rank,term,weight\n");
        for l in &section.listings {
            for (r, t) in l.terms.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    l.id,
                    csv_field(l.label.as_deref().unwrap_or("")),
                    l.coherence,
                    r + 1,
                    csv_field(&t.term),
                    t.weight
                );
            }
        }
        out
    }

    /// Figures 4–5 data: mean topic mixture of each frame's documents.
    pub fn frame_topics_csv(&self) -> String {
        let mut out = String::from("frame,topics,matched_docs,topic,probability\n");
        for f in &self.frames {
            for p in &f.topic_profiles {
                for (t, v) in p.profile.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        csv_field(&f.name),
                        p.topics,
                        p.matched_docs,
                        t + 1,
                        v
                    );
                }
            }
        }
        out
    }

    pub fn zipf_csv(&self) -> String {
        let mut out = String::from("frame,slope,intercept,r_squared,n_points\n");
        for f in &self.frames {
            match &f.zipf {
                Some(z) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        csv_field(&f.name),
                        z.slope,
                        z.intercept,
                        z.r_squared,
                        z.n_points
                    );
                }
                None => {
                    let _ = writeln!(out, "{},,,,", csv_field(&f.name));
                }
            }
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut md = String::new();
        let _ = writeln!(md, "# Frame report: {}\n", self.corpus.label);
        let _ = writeln!(
            md,
            "{} documents, {} preprocessed terms.\n",
            thousands(self.corpus.total_docs as u64),
            thousands(self.corpus.vocab_size as u64)
        );

        let _ = writeln!(md, "## Most common words\n");
        let list: Vec<String> = self.top_terms.iter().map(ToString::to_string).collect();
        let _ = writeln!(md, "{}\n", list.join(", "));

        for section in &self.models {
            let _ = writeln!(
                md,
                "## Topics (K = {}, {} passes, seed {})\n",
                section.topics, section.passes, section.seed
            );
            for l in &section.listings {
                let terms: Vec<String> = l.terms.iter().map(ToString::to_string).collect();
                let _ = writeln!(
                    md,
                    "- {} [coherence {:.4}]: {}",
                    l.title(),
                    l.coherence,
                    terms.join(", ")
                );
            }
            md.push('\n');
        }

        let _ = writeln!(md, "## Frame coverage\n");
        let mut header = String::from("| Frame |");
        let mut rule = String::from("|---|");
        for n in &self.cutoffs {
            let _ = write!(header, " # with ≥1 of {n} | % ({n} terms) |");
            rule.push_str("---:|---:|");
        }
        header.push_str(" # with ≥1 (full) | % (full) | Total |");
        rule.push_str("---:|---:|---:|");
        let _ = writeln!(md, "{header}\n{rule}");
        for f in &self.frames {
            let mut row = format!("| {} |", f.name);
            for c in &f.cutoffs {
                let _ = write!(row, " {} | {} |", thousands(c.n_matched as u64), percent(c.pct));
            }
            let _ = write!(
                row,
                " {} | {} | {} |",
                thousands(f.coverage.n_matched as u64),
                percent(f.coverage.pct),
                thousands(f.coverage.total as u64)
            );
            let _ = writeln!(md, "{row}");
        }
        md.push('\n');

        let _ = writeln!(md, "## Frame terms\n");
        for f in &self.frames {
            let rows: Vec<String> = f.coverage.term_profile.iter().map(ToString::to_string).collect();
            let _ = writeln!(
                md,
                "- {} ({} with more than one term): {}",
                f.name,
                documents(f.coverage.n_multi),
                if rows.is_empty() { "none".to_owned() } else { rows.join(", ") }
            );
        }
        md.push('\n');

        let _ = writeln!(md, "## Frame-topic profiles\n");
        for f in &self.frames {
            for p in &f.topic_profiles {
                let values: Vec<String> = p
                    .profile
                    .iter()
                    .enumerate()
                    .map(|(t, v)| format!("#{} {:.3}", t + 1, v))
                    .collect();
                let _ = writeln!(
                    md,
                    "- {} / K = {} ({}): {}",
                    f.name,
                    p.topics,
                    documents(p.matched_docs),
                    values.join(", ")
                );
            }
        }
        md.push('\n');

        let _ = writeln!(md, "## Rank-frequency fits\n");
        for f in &self.frames {
            match &f.zipf {
                Some(z) => {
                    let _ = writeln!(
                        md,
                        "- {}: slope {:.3}, intercept {:.3}, R² {:.3} over {} terms",
                        f.name, z.slope, z.intercept, z.r_squared, z.n_points
                    );
                }
                None => {
                    let _ = writeln!(md, "- {}: fewer than 3 terms used", f.name);
                }
            }
        }
        md.push('\n');

        let _ = writeln!(md, "## Cochran's Q\n");
        match &self.cochran {
            Some(c) => {
                let _ = writeln!(
                    md,
                    "Q = {}, df = {}, p {}",
                    decimal2(c.q),
                    c.df,
                    render_p(c.p)
                );
            }
            None => {
                let _ = writeln!(md, "Not computed: no document separates the frames.");
            }
        }
        md
    }

    /// Writes `report.json`, `report.md` and the CSV side files into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files: Vec<(String, String)> = vec![
            ("report.json".into(), self.to_json()?),
            ("report.md".into(), self.to_markdown()),
            ("top_terms.csv".into(), self.top_terms_csv()),
            ("coverage_table.csv".into(), self.coverage_table_csv()),
            ("coverage.csv".into(), self.coverage_csv()),
            ("profile.csv".into(), self.profile_csv()),
            ("frame_topics.csv".into(), self.frame_topics_csv()),
            ("zipf.csv".into(), self.zipf_csv()),
        ];
        for section in &self.models {
            files.push((format!("topics_k{}.csv", section.topics), self.topics_csv(section)));
        }
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

fn render_p(p: f64) -> String {
    let s = format_p(p);
    if s.starts_with('<') {
        s
    } else {
        format!("= {s}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameComparisonRow {
    pub corpus: String,
    pub pct: Vec<f64>,
    pub total: usize,
    pub q: Option<f64>,
    pub df: Option<usize>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarDatum {
    pub frame: String,
    pub corpus: String,
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub frames: Vec<String>,
    pub rows: Vec<FrameComparisonRow>,
    /// Grouped-bar data, frame-major.
    pub bars: Vec<BarDatum>,
}

/// One row per report, in input order. All reports must use identical
/// lexicons in identical order.
pub fn compare_corpora(reports: &[Report]) -> Result<Comparison> {
    if reports.len() < 2 {
        return Err(Error::InvalidArgument("comparison needs at least two reports".into()));
    }
    let reference = &reports[0].lexicons;
    for r in &reports[1..] {
        if &r.lexicons != reference {
            return Err(Error::LexiconMismatch(format!(
                "`{}` and `{}`",
                reports[0].corpus.label, r.corpus.label
            )));
        }
    }
    let frames: Vec<String> = reference.iter().map(|l| l.name.clone()).collect();
    let rows: Vec<FrameComparisonRow> = reports
        .iter()
        .map(|r| FrameComparisonRow {
            corpus: r.corpus.label.clone(),
            pct: r.frames.iter().map(|f| f.coverage.pct).collect(),
            total: r.corpus.total_docs,
            q: r.cochran.as_ref().map(|c| c.q),
            df: r.cochran.as_ref().map(|c| c.df),
            p: r.cochran.as_ref().map(|c| c.p),
        })
        .collect();
    let bars = frames
        .iter()
        .enumerate()
        .flat_map(|(j, frame)| {
            rows.iter().map(move |row| BarDatum {
                frame: frame.clone(),
                corpus: row.corpus.clone(),
                pct: row.pct[j],
            })
        })
        .collect();
    Ok(Comparison { frames, rows, bars })
}

impl Comparison {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_markdown(&self) -> String {
        let df = self.rows.iter().find_map(|r| r.df);
        let mut md = String::from("|  |");
        for f in &self.frames {
            let _ = write!(md, " {f} |");
        }
        match df {
            Some(df) => {
                let _ = writeln!(md, " Tweets Tot. | Cochran Q statistic (df = {df}) |");
            }
            None => md.push_str(" Tweets Tot. | Cochran Q statistic |\n"),
        }
        md.push_str("|---|");
        for _ in &self.frames {
            md.push_str("---:|");
        }
        md.push_str("---:|---|\n");
        for row in &self.rows {
            let _ = write!(md, "| {} |", row.corpus);
            for p in &row.pct {
                let _ = write!(md, " {} |", percent(*p));
            }
            let q = match (row.q, row.p) {
                (Some(q), Some(p)) => format!("Q = {}, p {}", decimal2(q), render_p(p)),
                _ => "n/a".to_owned(),
            };
            let _ = writeln!(md, " {} | {} |", thousands(row.total as u64), q);
        }
        md
    }

    pub fn table_csv(&self) -> String {
        let mut out = String::from("corpus");
        for f in &self.frames {
            let _ = write!(out, ",{}", csv_field(f));
        }
        out.push_str(",total,q,df,p\n");
        for row in &self.rows {
            out.push_str(&csv_field(&row.corpus));
            for p in &row.pct {
                let _ = write!(out, ",{p}");
            }
            let opt = |v: Option<String>| v.unwrap_or_default();
            let _ = writeln!(
                out,
                ",{},{},{},{}",
                row.total,
                opt(row.q.map(|x| x.to_string())),
                opt(row.df.map(|x| x.to_string())),
                opt(row.p.map(|x| x.to_string()))
            );
        }
        out
    }

    pub fn bars_csv(&self) -> String {
        let mut out = String::from("frame,corpus,pct\n");
        for b in &self.bars {
            let _ = writeln!(out, "{},{},{}", csv_field(&b.frame), csv_field(&b.corpus), b.pct);
        }
        out
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, body) in [
            ("comparison.json", self.to_json()?),
            ("comparison.md", self.to_markdown()),
            ("comparison.csv", self.table_csv()),
            ("frame_bars.csv", self.bars_csv()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_rendering() {
        assert_eq!(thousands(0), "0");
        assert_eq!(thousands(203_756), "203,756");
        assert_eq!(thousands(1_213_420), "1,213,420");
        assert_eq!(decimal2(47_226.72), "47,226.72");
        assert_eq!(decimal2(8.0 / 3.0), "2.67");
        assert_eq!(percent(0.0532), "5.32%");
        assert_eq!(percent(0.1206), "12.06%");
    }

    #[test]
    fn labels_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.json");
        let mut set = TopicLabelSet::default();
        set.insert(
            3,
            TopicLabel {
                label: "Politics".into(),
                author: "analyst".into(),
                timestamp: "2020-05-01T00:00:00Z".into(),
            },
        );
        set.save(&path).unwrap();
        assert_eq!(TopicLabelSet::load(&path, 4).unwrap(), set);

        let mut bad = TopicLabelSet::default();
        bad.insert(
            7,
            TopicLabel {
                label: "x".into(),
                author: String::new(),
                timestamp: String::new(),
            },
        );
        bad.save(&path).unwrap();
        assert!(matches!(
            TopicLabelSet::load(&path, 4),
            Err(Error::TopicOutOfRange { id: 7, topics: 4 })
        ));

        std::fs::write(&path, "").unwrap();
        assert!(TopicLabelSet::load(&path, 4).unwrap().0.is_empty());
        std::fs::write(&path, "{not json").unwrap();
        assert!(matches!(TopicLabelSet::load(&path, 4), Err(Error::Corrupt { .. })));
        assert!(TopicLabelSet::parse(br#"{"1":{"label":"  "}}"#, 4).is_err());
    }

    #[test]
    fn listing_titles() {
        let mut l = TopicListing {
            id: 2,
            label: None,
            coherence: 0.0,
            terms: vec![],
        };
        assert_eq!(l.title(), "Topic #2 (unlabeled)");
        l.label = Some("Community".into());
        assert_eq!(l.title(), "Topic #2: Community");
    }
}
