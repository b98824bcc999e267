//! Tokenisation, the preprocessing pipeline, vocabulary construction,
//! bag-of-words and tf-idf weighting, and corpus-level term counts.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");
pub const BUNDLED_EXCLUSIONS: &str = include_str!("../data/exclusions.txt");

/// Tokens shorter than this are dropped.
pub const MIN_TOKEN_CHARS: usize = 3;

pub type TokenList = Vec<String>;

fn url_pattern() -> &'static Regex {
    static URL: OnceLock<Regex> = OnceLock::new();
    URL.get_or_init(|| Regex::new(r"(?i)\b(?:https?://|www\.)\S*").expect("valid regex"))
}

/// Lowercases, removes URLs and splits on every non-alphanumeric character.
/// `@` and `#` prefixes fall away as separators, leaving the handle or tag
/// body as a token. Pure-digit tokens are dropped.
pub fn tokenize(text: &str) -> TokenList {
    let lowered = text.to_lowercase();
    let stripped = url_pattern().replace_all(&lowered, " ");
    stripped
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !t.chars().all(|c| c.is_ascii_digit()))
        .map(str::to_owned)
        .collect()
}

/// Tokens as seen by frame matching: tokenized, short tokens removed, nothing
/// else filtered.
pub fn match_tokens(text: &str) -> TokenList {
    tokenize(text)
        .into_iter()
        .filter(|t| t.chars().count() >= MIN_TOKEN_CHARS)
        .collect()
}

/// Parses a word-list file: one term per line, `#` starts a comment line.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn read_word_list(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&text))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrepConfig {
    pub stopwords: HashSet<String>,
    pub exclusions: HashSet<String>,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            stopwords: parse_word_list(BUNDLED_STOPWORDS).into_iter().collect(),
            exclusions: parse_word_list(BUNDLED_EXCLUSIONS).into_iter().collect(),
        }
    }
}

impl PrepConfig {
    /// Fingerprint over both lists; part of the model's provenance.
    pub fn hash(&self) -> String {
        let stop: BTreeSet<&str> = self.stopwords.iter().map(String::as_str).collect();
        let excl: BTreeSet<&str> = self.exclusions.iter().map(String::as_str).collect();
        crate::content_hash(
            stop.into_iter()
                .chain(std::iter::once("\u{0}"))
                .chain(excl),
        )
    }

    /// tokenize, then drop short tokens, stopwords and domain terms, in that
    /// order. No stemming or lemmatisation.
    pub fn preprocess(&self, text: &str) -> TokenList {
        tokenize(text)
            .into_iter()
            .filter(|t| t.chars().count() >= MIN_TOKEN_CHARS)
            .filter(|t| !self.stopwords.contains(t))
            .filter(|t| !self.exclusions.contains(t))
            .collect()
    }

    /// Preprocesses every text and builds the vocabulary and bags the topic
    /// model trains on.
    pub fn prepare<'a, I>(&self, texts: I) -> Result<Prepared>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let docs: Vec<TokenList> = texts.into_iter().map(|t| self.preprocess(t)).collect();
        let vocab = Vocabulary::build(&docs)?;
        let bags = docs.iter().map(|d| vocab.to_bow(d).0).collect();
        Ok(Prepared { docs, vocab, bags })
    }

    /// Tokens for corpus-wide term counts: only stopwords are removed.
    pub fn analytics_tokens(&self, text: &str) -> TokenList {
        tokenize(text)
            .into_iter()
            .filter(|t| !self.stopwords.contains(t))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub docs: Vec<TokenList>,
    pub vocab: Vocabulary,
    pub bags: Vec<BagOfWords>,
}

/// Dense term index, sorted lexicographically, with document frequencies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    total_docs: usize,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn build(docs: &[TokenList]) -> Result<Self> {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in docs {
            let unique: BTreeSet<&str> = doc.iter().map(String::as_str).collect();
            for term in unique {
                *df.entry(term).or_insert(0) += 1;
            }
        }
        if df.is_empty() {
            return Err(Error::EmptyInput("no tokens to build a vocabulary from".into()));
        }
        let (terms, doc_freq): (Vec<String>, Vec<usize>) =
            df.into_iter().map(|(t, n)| (t.to_owned(), n)).unzip();
        Ok(Self::from_parts(terms, doc_freq, docs.len()))
    }

    fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>, total_docs: usize) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            terms,
            doc_freq,
            total_docs,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, idx: usize) -> &str {
        &self.terms[idx]
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self, idx: usize) -> usize {
        self.doc_freq[idx]
    }

    pub fn total_docs(&self) -> usize {
        self.total_docs
    }

    /// Hash of the term list; ties a model to the corpus it was trained on.
    pub fn hash(&self) -> String {
        crate::content_hash(self.terms.iter().map(String::as_str))
    }

    /// Counts the in-vocabulary tokens of `tokens`. Returns the bag and the
    /// number of out-of-vocabulary tokens dropped.
    pub fn to_bow(&self, tokens: &[String]) -> (BagOfWords, usize) {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        let mut oov = 0;
        for tok in tokens {
            match self.index_of(tok) {
                Some(i) => *counts.entry(i).or_insert(0) += 1,
                None => oov += 1,
            }
        }
        (BagOfWords(counts.into_iter().collect()), oov)
    }

    /// Token ids in document order, dropping out-of-vocabulary tokens.
    pub fn encode(&self, tokens: &[String]) -> (Vec<usize>, usize) {
        let ids: Vec<usize> = tokens.iter().filter_map(|t| self.index_of(t)).collect();
        let oov = tokens.len() - ids.len();
        (ids, oov)
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            terms: Vec<String>,
            doc_freq: Vec<usize>,
            total_docs: usize,
        }
        let raw = Raw::deserialize(d)?;
        if raw.terms.len() != raw.doc_freq.len() {
            return Err(serde::de::Error::custom("terms and doc_freq differ in length"));
        }
        Ok(Vocabulary::from_parts(raw.terms, raw.doc_freq, raw.total_docs))
    }
}

/// Sparse term counts with strictly increasing term indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BagOfWords(pub Vec<(usize, u32)>);

impl BagOfWords {
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&(_, c)| u64::from(c)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().copied()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightedBag(pub Vec<(usize, f64)>);

/// `count · ln(total_docs / df)`; a term present in every document weighs 0.
pub fn tfidf_weight(bags: &[BagOfWords], vocab: &Vocabulary) -> Vec<WeightedBag> {
    let n = vocab.total_docs() as f64;
    bags.iter()
        .map(|bag| {
            WeightedBag(
                bag.iter()
                    .map(|(term, count)| {
                        let df = vocab.doc_freq(term);
                        let idf = if df >= vocab.total_docs() {
                            0.0
                        } else {
                            (n / df as f64).ln()
                        };
                        (term, f64::from(count) * idf)
                    })
                    .collect(),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermCount {
    pub term: String,
    pub count: u64,
}

impl fmt::Display for TermCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.term, self.count)
    }
}

/// The `k` most frequent tokens, ties broken lexicographically.
pub fn top_terms(docs: &[TokenList], k: usize) -> Result<Vec<TermCount>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for tok in docs.iter().flatten() {
        *counts.entry(tok.as_str()).or_insert(0) += 1;
    }
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ok(ranked
        .into_iter()
        .take(k)
        .map(|(term, count)| TermCount {
            term: term.to_owned(),
            count,
        })
        .collect())
}

/// Writes one document per line, tokens separated by single spaces.
pub fn write_token_dump(docs: &[TokenList], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for doc in docs {
        text.push_str(&doc.join(" "));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> TokenList {
        s.split_whitespace().map(str::to_owned).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("Fighting @realDonaldTrump #COVID19 https://t.co/x"),
            toks("fighting realdonaldtrump covid19")
        );
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("WAR war War"), toks("war war war"));
        assert_eq!(tokenize("don't 2020 3rd"), toks("don t 3rd"));
    }

    #[test]
    fn preprocess_examples() {
        let cfg = PrepConfig::default();
        assert_eq!(cfg.preprocess("We are fighting #covid19 at home"), toks("fighting home"));
        assert!(cfg.preprocess("aa fo go").is_empty());
        assert!(cfg.preprocess("https://t.co/abc www.example.com/x").is_empty());
    }

    #[test]
    fn bundled_lists_cover_twitter_tags() {
        let cfg = PrepConfig::default();
        for w in ["amp", "https", "http", "rt", "t.co", "the", "are"] {
            assert!(cfg.stopwords.contains(w), "{w}");
        }
        for w in ["covid", "corona", "ncov2019", "coronavirus"] {
            assert!(cfg.exclusions.contains(w), "{w}");
        }
        // Terms the published top-30 list keeps must survive.
        for w in ["people", "us", "get", "like", "one", "would"] {
            assert!(!cfg.stopwords.contains(w), "{w}");
        }
    }

    #[test]
    fn analytics_tokens_keep_domain_terms() {
        let cfg = PrepConfig::default();
        assert_eq!(cfg.analytics_tokens("Help us fight #covid19"), toks("help us fight covid19"));
    }

    #[test]
    fn vocabulary_examples() {
        let v = Vocabulary::build(&[toks("a b"), toks("b c")]).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.doc_freq(v.index_of("b").unwrap()), 2);
        assert_eq!(v.doc_freq(v.index_of("a").unwrap()), 1);
        assert_eq!(v.doc_freq(v.index_of("c").unwrap()), 1);

        let v = Vocabulary::build(&[toks("x x x")]).unwrap();
        assert_eq!((v.len(), v.doc_freq(0)), (1, 1));

        assert!(Vocabulary::build(&[vec![], vec![]]).is_err());
    }

    #[test]
    fn vocabulary_matches_set_union_on_synthetic_docs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let docs: Vec<TokenList> = (0..1000)
            .map(|_| {
                (0..rng.gen_range(0..12))
                    .map(|_| format!("w{}", rng.gen_range(0..400)))
                    .collect()
            })
            .collect();
        let v = Vocabulary::build(&docs).unwrap();

        let mut union: Vec<String> = Vec::new();
        for d in &docs {
            for t in d {
                if !union.contains(t) {
                    union.push(t.clone());
                }
            }
        }
        union.sort();
        assert_eq!(v.terms(), union.as_slice());
        for (i, term) in union.iter().enumerate() {
            let df = docs.iter().filter(|d| d.contains(term)).count();
            assert_eq!(v.doc_freq(i), df);
        }
        assert_eq!(v.total_docs(), 1000);
    }

    #[test]
    fn bow_examples() {
        let v = Vocabulary::build(&[toks("a b")]).unwrap();
        let (bag, oov) = v.to_bow(&toks("a b a"));
        assert_eq!(bag.0, vec![(0, 2), (1, 1)]);
        assert_eq!(oov, 0);
        let (bag, oov) = v.to_bow(&[]);
        assert!(bag.is_empty() && oov == 0);
        let (bag, oov) = v.to_bow(&toks("a zzz"));
        assert_eq!((bag.total(), oov), (1, 1));
    }

    #[test]
    fn tfidf_examples() {
        let docs = [toks("a a b"), toks("b c"), toks("b")];
        let v = Vocabulary::build(&docs).unwrap();
        let bags: Vec<_> = docs.iter().map(|d| v.to_bow(d).0).collect();
        let w = tfidf_weight(&bags, &v);
        let a = v.index_of("a").unwrap();
        let b = v.index_of("b").unwrap();
        let wa = w[0].0.iter().find(|(t, _)| *t == a).unwrap().1;
        assert!((wa - 2.0 * 3f64.ln()).abs() < 1e-12);
        for bag in &w {
            for &(t, x) in &bag.0 {
                if t == b {
                    assert_eq!(x, 0.0);
                }
            }
        }

        let single = [toks("x y y")];
        let v = Vocabulary::build(&single).unwrap();
        let bags: Vec<_> = single.iter().map(|d| v.to_bow(d).0).collect();
        assert!(tfidf_weight(&bags, &v)[0].0.iter().all(|&(_, x)| x == 0.0));
    }

    #[test]
    fn top_terms_examples() {
        let out = top_terms(&[toks("a a b")], 1).unwrap();
        assert_eq!(out, vec![TermCount { term: "a".into(), count: 2 }]);
        assert!(top_terms(&[toks("a")], 0).is_err());
        let people = TermCount {
            term: "people".into(),
            count: 19153,
        };
        assert_eq!(people.to_string(), "people (19153)");
    }

    #[test]
    fn top_terms_match_counting_oracle() {
        // Term i planted (20 - i) times, spread across documents.
        let mut docs: Vec<TokenList> = vec![Vec::new(); 7];
        let mut slot = 0;
        for i in 0..20 {
            for _ in 0..(20 - i) {
                docs[slot % 7].push(format!("t{i:02}"));
                slot += 3;
            }
        }
        let mut oracle: BTreeMap<String, u64> = BTreeMap::new();
        for t in docs.iter().flatten() {
            *oracle.entry(t.clone()).or_default() += 1;
        }
        let mut expected: Vec<(String, u64)> = oracle.into_iter().collect();
        expected.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let got = top_terms(&docs, 5).unwrap();
        let got: Vec<(String, u64)> = got.into_iter().map(|t| (t.term, t.count)).collect();
        assert_eq!(got, expected[..5].to_vec());
        assert_eq!(got[0], ("t00".to_string(), 20));
    }

    proptest! {
        #[test]
        fn preprocess_output_is_clean(text in "[ a-zA-Z0-9#@./:_'-]{0,80}|\\PC{0,40}") {
            let cfg = PrepConfig::default();
            for tok in cfg.preprocess(&text) {
                prop_assert!(tok.chars().count() >= MIN_TOKEN_CHARS);
                prop_assert!(!cfg.stopwords.contains(&tok));
                prop_assert!(!cfg.exclusions.contains(&tok));
            }
        }

        #[test]
        fn bow_plus_oov_equals_token_count(
            vocab_docs in prop::collection::vec(prop::collection::vec("[a-e]{1,2}", 1..6), 1..5),
            query in prop::collection::vec("[a-f]{1,2}", 0..20),
        ) {
            let v = Vocabulary::build(&vocab_docs).unwrap();
            let (bag, oov) = v.to_bow(&query);
            prop_assert_eq!(bag.total() as usize + oov, query.len());
            prop_assert!(bag.0.windows(2).all(|w| w[0].0 < w[1].0));
        }

        #[test]
        fn vocabulary_ignores_doc_order(
            mut docs in prop::collection::vec(prop::collection::vec("[a-h]{1,3}", 1..6), 1..8),
            rot in 0usize..8,
        ) {
            let a = Vocabulary::build(&docs).unwrap();
            let r = rot % docs.len();
            docs.rotate_left(r);
            docs.reverse();
            let b = Vocabulary::build(&docs).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn tfidf_zero_iff_ubiquitous(
            docs in prop::collection::vec(prop::collection::vec("[a-d]", 1..5), 1..6),
        ) {
            let v = Vocabulary::build(&docs).unwrap();
            let bags: Vec<_> = docs.iter().map(|d| v.to_bow(d).0).collect();
            for wb in tfidf_weight(&bags, &v) {
                for (t, w) in wb.0 {
                    prop_assert!(w >= 0.0);
                    prop_assert_eq!(w == 0.0, v.doc_freq(t) == v.total_docs());
                }
            }
        }
    }
}
