//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//!
//! Training is a single sequential sampler driven by a seeded ChaCha stream,
//! so identical (corpus order, config, seed) triples produce identical
//! assignments. A trained model is immutable and can be shared across
//! threads for inference.

mod coherence;
mod infer;
mod vis;

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::{BagOfWords, Vocabulary, WeightedBag};

pub use infer::Inference;
pub use vis::{classical_mds, jensen_shannon, FrameOverlay, VisData, VisTerm, VisTopic, VIS_FORMAT_VERSION};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub topics: usize,
    /// Full sweeps over every token position.
    pub passes: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub infer_iters: usize,
    pub burn_in: usize,
}

impl LdaConfig {
    /// Defaults for `topics` topics: alpha = 1/K, beta = 0.01, 6 passes.
    pub fn new(topics: usize) -> Self {
        LdaConfig {
            topics,
            passes: 6,
            alpha: 1.0 / topics.max(1) as f64,
            beta: 0.01,
            seed: 42,
            infer_iters: 50,
            burn_in: 25,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_owned()));
        if self.topics == 0 {
            return bad("topic count must be positive");
        }
        if self.topics > u16::MAX as usize {
            return bad("topic count too large");
        }
        if self.passes == 0 {
            return bad("passes must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be positive");
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta must be positive");
        }
        if self.infer_iters == 0 {
            return bad("infer_iters must be at least 1");
        }
        if self.burn_in >= self.infer_iters {
            return bad("burn_in must be smaller than infer_iters");
        }
        Ok(())
    }
}

/// Trained LDA state: count tables, per-token assignments and the vocabulary
/// they index.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    config: LdaConfig,
    vocabulary: Vec<String>,
    vocab_hash: String,
    /// K rows of V term counts.
    topic_term: Vec<Vec<u32>>,
    topic_totals: Vec<u64>,
    /// D rows of K topic counts.
    doc_topic: Vec<Vec<u32>>,
    doc_words: Vec<Vec<u32>>,
    assignments: Vec<Vec<u16>>,
    empty_docs: usize,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    config: LdaConfig,
    vocab_hash: String,
    vocabulary: Vec<String>,
    topic_term: Vec<Vec<u32>>,
    topic_totals: Vec<u64>,
    doc_topic: Vec<Vec<u32>>,
    doc_lengths: Vec<u32>,
    doc_words: Vec<Vec<u32>>,
    assignments: Vec<Vec<u16>>,
    empty_docs: usize,
}

/// Trains on bags of words. Each bag is expanded to a token sequence in term
/// order. Zero-length documents keep their row but are never sampled.
pub fn train(bags: &[BagOfWords], vocab: &Vocabulary, cfg: &LdaConfig) -> Result<LdaModel> {
    train_observed(bags, vocab, cfg, |_, _| {})
}

/// As [`train`], calling `observer(sweep, model)` after every sweep
/// (1-based).
pub fn train_observed<F>(
    bags: &[BagOfWords],
    vocab: &Vocabulary,
    cfg: &LdaConfig,
    mut observer: F,
) -> Result<LdaModel>
where
    F: FnMut(usize, &LdaModel),
{
    cfg.validate()?;
    if bags.iter().all(BagOfWords::is_empty) {
        return Err(Error::EmptyInput("no tokens to train on".into()));
    }
    if let Some(&(w, _)) = bags.iter().flat_map(|b| b.0.iter()).find(|(w, _)| *w >= vocab.len()) {
        return Err(Error::InvalidArgument(format!(
            "term index {w} outside vocabulary of {}",
            vocab.len()
        )));
    }
    if vocab.len() < cfg.topics {
        log::warn!("vocabulary ({}) smaller than topic count ({})", vocab.len(), cfg.topics);
    }

    let doc_words: Vec<Vec<u32>> = bags
        .iter()
        .map(|bag| {
            bag.iter()
                .flat_map(|(w, c)| std::iter::repeat_n(w as u32, c as usize))
                .collect()
        })
        .collect();
    let empty_docs = doc_words.iter().filter(|d| d.is_empty()).count();
    if empty_docs > 0 {
        log::info!("skipping {empty_docs} zero-length documents");
    }

    let k = cfg.topics;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = LdaModel {
        config: cfg.clone(),
        vocabulary: vocab.terms().to_vec(),
        vocab_hash: vocab.hash(),
        topic_term: vec![vec![0; vocab.len()]; k],
        topic_totals: vec![0; k],
        doc_topic: vec![vec![0; k]; doc_words.len()],
        assignments: doc_words
            .iter()
            .map(|d| d.iter().map(|_| rng.gen_range(0..k) as u16).collect())
            .collect(),
        doc_words,
        empty_docs,
        index: HashMap::new(),
    };
    model.rebuild_counts();
    model.rebuild_index();

    for sweep in 1..=cfg.passes {
        model.sweep(&mut rng);
        debug_assert_eq!(model.check_counts(), Ok(()));
        observer(sweep, &model);
    }
    Ok(model)
}

/// The tf-idf variant: weights are rounded to integer pseudo-counts and
/// zero-weight terms are dropped.
pub fn train_weighted(
    weighted: &[WeightedBag],
    vocab: &Vocabulary,
    cfg: &LdaConfig,
) -> Result<LdaModel> {
    let bags: Vec<BagOfWords> = weighted
        .iter()
        .map(|wb| {
            BagOfWords(
                wb.0.iter()
                    .map(|&(t, w)| (t, w.max(0.0).round() as u32))
                    .filter(|&(_, c)| c > 0)
                    .collect(),
            )
        })
        .collect();
    train(&bags, vocab, cfg)
}

impl LdaModel {
    fn rebuild_counts(&mut self) {
        for row in &mut self.topic_term {
            row.iter_mut().for_each(|c| *c = 0);
        }
        self.topic_totals.iter_mut().for_each(|c| *c = 0);
        for (d, (words, zs)) in self.doc_words.iter().zip(&self.assignments).enumerate() {
            let row = &mut self.doc_topic[d];
            row.iter_mut().for_each(|c| *c = 0);
            for (&w, &z) in words.iter().zip(zs) {
                let z = z as usize;
                row[z] += 1;
                self.topic_term[z][w as usize] += 1;
                self.topic_totals[z] += 1;
            }
        }
    }

    fn rebuild_index(&mut self) {
        self.index = self
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    /// One decrement-sample-increment pass over every token position.
    fn sweep(&mut self, rng: &mut ChaCha8Rng) {
        let k = self.config.topics;
        let alpha = self.config.alpha;
        let beta = self.config.beta;
        let v_beta = self.vocabulary.len() as f64 * beta;
        let mut cumulative = vec![0.0f64; k];

        for d in 0..self.doc_words.len() {
            for i in 0..self.doc_words[d].len() {
                let w = self.doc_words[d][i] as usize;
                let old = self.assignments[d][i] as usize;
                self.doc_topic[d][old] -= 1;
                self.topic_term[old][w] -= 1;
                self.topic_totals[old] -= 1;

                let mut total = 0.0;
                for (t, slot) in cumulative.iter_mut().enumerate() {
                    total += (f64::from(self.doc_topic[d][t]) + alpha)
                        * (f64::from(self.topic_term[t][w]) + beta)
                        / (self.topic_totals[t] as f64 + v_beta);
                    *slot = total;
                }
                let u = rng.gen::<f64>() * total;
                let new = cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);

                self.assignments[d][i] = new as u16;
                self.doc_topic[d][new] += 1;
                self.topic_term[new][w] += 1;
                self.topic_totals[new] += 1;
            }
        }
    }

    /// Recomputes every count table from the assignments and compares; also
    /// checks the marginal identities.
    pub fn check_counts(&self) -> std::result::Result<(), String> {
        let k = self.config.topics;
        let v = self.vocabulary.len();
        let mut topic_term = vec![vec![0u32; v]; k];
        let mut totals = vec![0u64; k];
        for (d, (words, zs)) in self.doc_words.iter().zip(&self.assignments).enumerate() {
            if words.len() != zs.len() {
                return Err(format!("doc {d}: {} words, {} assignments", words.len(), zs.len()));
            }
            let mut row = vec![0u32; k];
            for (&w, &z) in words.iter().zip(zs) {
                let (w, z) = (w as usize, z as usize);
                if z >= k || w >= v {
                    return Err(format!("doc {d}: assignment ({w}, {z}) out of range"));
                }
                row[z] += 1;
                topic_term[z][w] += 1;
                totals[z] += 1;
            }
            if row != self.doc_topic[d] {
                return Err(format!("doc {d}: doc-topic counts disagree with assignments"));
            }
            let row_sum: u64 = row.iter().map(|&c| u64::from(c)).sum();
            if row_sum != words.len() as u64 {
                return Err(format!("doc {d}: topic counts do not sum to the length"));
            }
        }
        if topic_term != self.topic_term {
            return Err("topic-term counts disagree with assignments".into());
        }
        for t in 0..k {
            let row_sum: u64 = self.topic_term[t].iter().map(|&c| u64::from(c)).sum();
            if row_sum != self.topic_totals[t] || totals[t] != self.topic_totals[t] {
                return Err(format!("topic {t}: totals inconsistent"));
            }
        }
        let tokens: u64 = self.doc_words.iter().map(|d| d.len() as u64).sum();
        if self.topic_totals.iter().sum::<u64>() != tokens {
            return Err("topic totals do not sum to the token count".into());
        }
        Ok(())
    }

    pub fn config(&self) -> &LdaConfig {
        &self.config
    }

    pub fn num_topics(&self) -> usize {
        self.config.topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn vocab_hash(&self) -> &str {
        &self.vocab_hash
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn topic_term_counts(&self) -> &[Vec<u32>] {
        &self.topic_term
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_totals
    }

    pub fn doc_topic_counts(&self) -> &[Vec<u32>] {
        &self.doc_topic
    }

    pub fn assignments(&self) -> &[Vec<u16>] {
        &self.assignments
    }

    pub fn num_docs(&self) -> usize {
        self.doc_words.len()
    }

    pub fn doc_length(&self, d: usize) -> usize {
        self.doc_words[d].len()
    }

    pub fn empty_docs(&self) -> usize {
        self.empty_docs
    }

    pub fn total_tokens(&self) -> u64 {
        self.topic_totals.iter().sum()
    }

    /// φ: `(n_kw + β) / (n_k + Vβ)`, one row per topic.
    pub fn phi(&self) -> Vec<Vec<f64>> {
        let beta = self.config.beta;
        let v_beta = self.vocabulary.len() as f64 * beta;
        self.topic_term
            .iter()
            .zip(&self.topic_totals)
            .map(|(row, &total)| {
                let denom = total as f64 + v_beta;
                row.iter().map(|&c| (f64::from(c) + beta) / denom).collect()
            })
            .collect()
    }

    /// θ: `(n_dk + α) / (len_d + Kα)`, one row per training document.
    pub fn theta(&self) -> Vec<Vec<f64>> {
        let alpha = self.config.alpha;
        let k_alpha = self.config.topics as f64 * alpha;
        self.doc_topic
            .iter()
            .zip(&self.doc_words)
            .map(|(row, words)| {
                let denom = words.len() as f64 + k_alpha;
                row.iter().map(|&c| (f64::from(c) + alpha) / denom).collect()
            })
            .collect()
    }

    /// Top `n` terms of every topic by φ, ties broken lexicographically.
    pub fn top_topic_terms(&self, n: usize) -> Result<Vec<Vec<TopicTerm>>> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let phi = self.phi();
        Ok(self
            .topic_term
            .iter()
            .zip(&phi)
            .map(|(counts, weights)| {
                let mut order: Vec<usize> = (0..counts.len()).collect();
                // Terms are stored sorted, so index order is lexicographic.
                order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
                order
                    .into_iter()
                    .take(n)
                    .map(|w| TopicTerm {
                        term: self.vocabulary[w].clone(),
                        weight: weights[w],
                    })
                    .collect()
            })
            .collect())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut bytes = self.to_json()?;
        bytes.push(b'\n');
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            config: self.config.clone(),
            vocab_hash: self.vocab_hash.clone(),
            vocabulary: self.vocabulary.clone(),
            topic_term: self.topic_term.clone(),
            topic_totals: self.topic_totals.clone(),
            doc_topic: self.doc_topic.clone(),
            doc_lengths: self.doc_words.iter().map(|d| d.len() as u32).collect(),
            doc_words: self.doc_words.clone(),
            assignments: self.assignments.clone(),
            empty_docs: self.empty_docs,
        };
        Ok(serde_json::to_vec(&file)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&bytes, path)
    }

    pub fn from_json(bytes: &[u8], origin: &Path) -> Result<Self> {
        let corrupt = |reason: String| Error::Corrupt {
            path: origin.to_path_buf(),
            reason,
        };
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| corrupt(e.to_string()))?;
        let found = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| corrupt("missing format_version".into()))?;
        if found != u64::from(MODEL_FORMAT_VERSION) {
            return Err(Error::VersionMismatch {
                path: origin.to_path_buf(),
                found: found as u32,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let file: ModelFile = serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;
        file.config.validate().map_err(|e| corrupt(e.to_string()))?;

        let k = file.config.topics;
        let v = file.vocabulary.len();
        if file.topic_term.len() != k
            || file.topic_term.iter().any(|r| r.len() != v)
            || file.topic_totals.len() != k
            || file.doc_topic.iter().any(|r| r.len() != k)
            || file.doc_topic.len() != file.doc_words.len()
            || file.doc_lengths.len() != file.doc_words.len()
            || file.assignments.len() != file.doc_words.len()
        {
            return Err(corrupt("table dimensions disagree".into()));
        }
        if file
            .doc_lengths
            .iter()
            .zip(&file.doc_words)
            .any(|(&n, d)| n as usize != d.len())
        {
            return Err(corrupt("document lengths disagree with tokens".into()));
        }
        if crate::content_hash(file.vocabulary.iter().map(String::as_str)) != file.vocab_hash {
            return Err(corrupt("vocabulary hash mismatch".into()));
        }

        let mut model = LdaModel {
            config: file.config,
            vocabulary: file.vocabulary,
            vocab_hash: file.vocab_hash,
            topic_term: file.topic_term,
            topic_totals: file.topic_totals,
            doc_topic: file.doc_topic,
            doc_words: file.doc_words,
            assignments: file.assignments,
            empty_docs: file.empty_docs,
            index: HashMap::new(),
        };
        model.check_counts().map_err(corrupt)?;
        model.rebuild_index();
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicTerm {
    pub term: String,
    pub weight: f64,
}

impl fmt::Display for TopicTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} {}", self.weight, self.term)
    }
}
