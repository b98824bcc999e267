//! Document ingestion and the collection rules: hashtag filter, retweet drop
//! and one-document-per-author deduplication, plus the cumulative per-day
//! collection ledger.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::Path;

use chrono::{DateTime, NaiveDate, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hashtag bodies retained by default. Case variants listed in the original
/// collection (`#nCoV2019`, `#2019nCoV`, `#COVID19`) fold onto these.
pub const DEFAULT_HASHTAGS: [&str; 6] = [
    "covid19",
    "coronavirus",
    "ncov2019",
    "2019ncov",
    "ncov",
    "ncov19",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub author_id: String,
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub is_retweet: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
}

impl Tweet {
    fn validate(&self) -> std::result::Result<(), &'static str> {
        if self.id.is_empty() {
            return Err("empty id");
        }
        if self.text.trim().is_empty() {
            return Err("empty text");
        }
        Ok(())
    }
}

/// An ordered collection of tweets, sorted non-decreasing by `created_at`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub label: String,
    tweets: Vec<Tweet>,
}

impl Corpus {
    /// Builds a corpus, stable-sorting by timestamp so that equal timestamps
    /// keep their input order.
    pub fn new(label: impl Into<String>, mut tweets: Vec<Tweet>) -> Self {
        tweets.sort_by_key(|t| t.created_at);
        Corpus {
            label: label.into(),
            tweets,
        }
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Tweet> {
        self.tweets.iter()
    }

    fn retain_with(&self, mut keep: impl FnMut(&Tweet) -> bool) -> Corpus {
        Corpus {
            label: self.label.clone(),
            tweets: self.tweets.iter().filter(|t| keep(t)).cloned().collect(),
        }
    }

    /// Index range of each UTC calendar day, in date order.
    pub fn day_ranges(&self) -> Vec<(NaiveDate, Range<usize>)> {
        let mut out: Vec<(NaiveDate, Range<usize>)> = Vec::new();
        for (i, tweet) in self.tweets.iter().enumerate() {
            let day = tweet.created_at.date_naive();
            match out.last_mut() {
                Some((d, range)) if *d == day => range.end = i + 1,
                _ => out.push((day, i..i + 1)),
            }
        }
        out
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Tweet;
    type IntoIter = std::slice::Iter<'a, Tweet>;

    fn into_iter(self) -> Self::IntoIter {
        self.tweets.iter()
    }
}

/// Result of reading a record file.
#[derive(Debug)]
pub struct LoadOutcome {
    pub corpus: Corpus,
    /// 1-based line numbers of rejected records.
    pub malformed: Vec<usize>,
    /// Records that were not in timestamp order in the file.
    pub reordered: bool,
}

/// Reads one JSON record per line. Blank lines are ignored. Records that fail
/// to parse, have an empty id or text, or repeat an earlier id are reported as
/// malformed; more than 1% malformed records is a hard error.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<LoadOutcome> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_corpus(BufReader::new(file), label, path)
}

pub fn read_corpus<R: BufRead>(reader: R, label: String, origin: &Path) -> Result<LoadOutcome> {
    let mut tweets = Vec::new();
    let mut malformed = Vec::new();
    let mut seen_ids = HashSet::new();
    let mut records = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records += 1;
        let parsed = serde_json::from_str::<Tweet>(&line)
            .ok()
            .filter(|t| t.validate().is_ok() && !seen_ids.contains(&t.id));
        match parsed {
            Some(mut tweet) => {
                tweet.created_at = tweet.created_at.trunc_subsecs(0);
                seen_ids.insert(tweet.id.clone());
                tweets.push(tweet);
            }
            None => malformed.push(idx + 1),
        }
    }

    if records == 0 {
        log::warn!("{}: no records", origin.display());
    }
    if malformed.len() * 100 > records {
        return Err(Error::MalformedRecords {
            path: origin.to_path_buf(),
            count: malformed.len(),
            total: records,
            lines: malformed,
        });
    }
    if !malformed.is_empty() {
        log::warn!(
            "{}: {} malformed (lines {:?})",
            origin.display(),
            malformed.len(),
            malformed
        );
    }

    let reordered = tweets.windows(2).any(|w| w[0].created_at > w[1].created_at);
    if reordered {
        log::warn!("{}: records re-sorted by created_at", origin.display());
    }
    Ok(LoadOutcome {
        corpus: Corpus::new(label, tweets),
        malformed,
        reordered,
    })
}

pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for tweet in corpus {
        serde_json::to_writer(&mut out, tweet)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Lowercased bodies of the `#`-prefixed tokens in `text`. A `#` counts only
/// at the start of the text or after a non-word character.
pub fn hashtags(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let starts_tag = chars[i] == '#' && (i == 0 || !is_word_char(chars[i - 1]));
        if !starts_tag {
            i += 1;
            continue;
        }
        let end = chars[i + 1..]
            .iter()
            .position(|&c| !is_word_char(c))
            .map_or(chars.len(), |p| i + 1 + p);
        if end > i + 1 {
            out.push(chars[i + 1..end].iter().collect::<String>().to_lowercase());
        }
        i = end.max(i + 1);
    }
    out
}

pub fn default_hashtags() -> BTreeSet<String> {
    DEFAULT_HASHTAGS.iter().map(|s| s.to_string()).collect()
}

/// Keeps tweets carrying at least one of `tags` as a hashtag. Tags are
/// compared case-insensitively; a leading `#` on a tag is ignored.
pub fn filter_by_hashtags(corpus: &Corpus, tags: &BTreeSet<String>) -> Result<Corpus> {
    if tags.is_empty() {
        return Err(Error::InvalidArgument("hashtag set is empty".into()));
    }
    let wanted: HashSet<String> = tags
        .iter()
        .map(|t| t.trim_start_matches('#').to_lowercase())
        .collect();
    Ok(corpus.retain_with(|t| hashtags(&t.text).iter().any(|h| wanted.contains(h))))
}

/// Drops tweets whose `lang` is set and differs from `lang`. Tweets without a
/// language tag pass.
pub fn filter_by_lang(corpus: &Corpus, lang: &str) -> Corpus {
    corpus.retain_with(|t| t.lang.as_deref().is_none_or(|l| l.eq_ignore_ascii_case(lang)))
}

pub fn drop_retweets(corpus: &Corpus) -> Corpus {
    corpus.retain_with(|t| !t.is_retweet)
}

/// Keeps the earliest tweet of each author across the whole corpus.
pub fn dedup_by_author(corpus: &Corpus) -> Corpus {
    let mut seen = HashSet::new();
    corpus.retain_with(|t| seen.insert(t.author_id.clone()))
}

#[derive(Debug, Clone, Default)]
pub struct CollectionRules {
    pub hashtags: BTreeSet<String>,
    pub lang: Option<String>,
}

impl CollectionRules {
    pub fn standard() -> Self {
        CollectionRules {
            hashtags: default_hashtags(),
            lang: None,
        }
    }
}

/// Applies the rules in their fixed order: language, hashtags, retweets, then
/// author deduplication. Reversing the last two can change the result because
/// a retweet may shadow the same author's later original.
pub fn apply_collection_rules(corpus: &Corpus, rules: &CollectionRules) -> Result<Corpus> {
    let by_lang = match &rules.lang {
        Some(lang) => filter_by_lang(corpus, lang),
        None => corpus.clone(),
    };
    let tagged = filter_by_hashtags(&by_lang, &rules.hashtags)?;
    Ok(dedup_by_author(&drop_retweets(&tagged)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub date: NaiveDate,
    pub collected: usize,
    pub retained: usize,
}

/// Cumulative per-day collection counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionLedger {
    pub rows: Vec<LedgerRow>,
}

impl CollectionLedger {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,collected,retained\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                row.date.format("%Y-%m-%d"),
                row.collected,
                row.retained
            ));
        }
        out
    }
}

/// Builds the cumulative ledger from the raw stream and its filtered subset.
pub fn ledger(raw: &Corpus, filtered: &Corpus) -> Result<CollectionLedger> {
    let collected: BTreeMap<NaiveDate, usize> = raw
        .day_ranges()
        .into_iter()
        .map(|(d, r)| (d, r.len()))
        .collect();
    let retained: BTreeMap<NaiveDate, usize> = filtered
        .day_ranges()
        .into_iter()
        .map(|(d, r)| (d, r.len()))
        .collect();
    if let Some(day) = retained.keys().find(|d| !collected.contains_key(d)) {
        return Err(Error::DayMismatch(format!(
            "filtered corpus has tweets on {day}, raw corpus has none"
        )));
    }

    let mut rows = Vec::with_capacity(collected.len());
    let (mut total_collected, mut total_retained) = (0, 0);
    for (date, n) in collected {
        total_collected += n;
        total_retained += retained.get(&date).copied().unwrap_or(0);
        if total_retained > total_collected {
            return Err(Error::DayMismatch(format!(
                "retained {total_retained} exceeds collected {total_collected} by {date}"
            )));
        }
        rows.push(LedgerRow {
            date,
            collected: total_collected,
            retained: total_retained,
        });
    }
    Ok(CollectionLedger { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn tweet(id: usize, author: &str, secs: i64, text: &str, rt: bool) -> Tweet {
        Tweet {
            id: id.to_string(),
            author_id: author.to_string(),
            created_at: Utc.timestamp_opt(1_584_662_400 + secs, 0).unwrap(),
            text: text.to_string(),
            is_retweet: rt,
            lang: None,
        }
    }

    fn ids(c: &Corpus) -> Vec<String> {
        c.iter().map(|t| t.id.clone()).collect()
    }

    #[test]
    fn reads_well_formed_lines() {
        let data = r#"{"id":"1","author_id":"a","created_at":"2020-03-20T10:00:00Z","text":"one #covid19","is_retweet":false}
{"id":"2","author_id":"b","created_at":"2020-03-20T10:00:01Z","text":"two","is_retweet":true}
{"id":"3","author_id":"c","created_at":"2020-03-20T10:00:02Z","text":"three","is_retweet":false,"lang":"en"}
"#;
        let out = read_corpus(data.as_bytes(), "t".into(), Path::new("mem")).unwrap();
        assert_eq!(out.corpus.len(), 3);
        assert!(out.malformed.is_empty());
        assert_eq!(out.corpus.tweets()[2].lang.as_deref(), Some("en"));
    }

    #[test]
    fn empty_input_gives_empty_corpus() {
        let out = read_corpus("".as_bytes(), "t".into(), Path::new("mem")).unwrap();
        assert!(out.corpus.is_empty());
    }

    fn numbered_lines(n: usize, bad: &[usize]) -> String {
        (1..=n)
            .map(|i| {
                if bad.contains(&i) {
                    "{not json".to_string()
                } else {
                    format!(
                        r#"{{"id":"{i}","author_id":"u{i}","created_at":"2020-03-20T00:00:00Z","text":"t {i}","is_retweet":false}}"#
                    )
                }
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn one_malformed_in_hundred_is_reported() {
        let data = numbered_lines(100, &[37]);
        let out = read_corpus(data.as_bytes(), "t".into(), Path::new("mem")).unwrap();
        assert_eq!(out.corpus.len(), 99);
        assert_eq!(out.malformed, vec![37]);
    }

    #[test]
    fn two_malformed_in_hundred_is_fatal() {
        let data = numbered_lines(100, &[3, 50]);
        match read_corpus(data.as_bytes(), "t".into(), Path::new("mem")) {
            Err(Error::MalformedRecords { lines, .. }) => assert_eq!(lines, vec![3, 50]),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_and_blank_text_are_malformed() {
        let mut data = numbered_lines(200, &[]);
        data.push_str(
            "\n{\"id\":\"5\",\"author_id\":\"x\",\"created_at\":\"2020-03-20T00:00:00Z\",\"text\":\"dup\",\"is_retweet\":false}",
        );
        data.push_str(
            "\n{\"id\":\"z\",\"author_id\":\"x\",\"created_at\":\"2020-03-20T00:00:00Z\",\"text\":\"   \",\"is_retweet\":false}",
        );
        let out = read_corpus(data.as_bytes(), "t".into(), Path::new("mem")).unwrap();
        assert_eq!(out.malformed, vec![201, 202]);
    }

    #[test]
    fn hashtag_tokens() {
        assert_eq!(hashtags("Stay home #COVID19"), vec!["covid19"]);
        assert_eq!(hashtags("#a,#B_c! x#y ##z"), vec!["a", "b_c", "z"]);
        assert!(hashtags("covid19 # alone").is_empty());
    }

    #[test]
    fn hashtag_filter_examples() {
        let c = Corpus::new(
            "t",
            vec![
                tweet(1, "a", 0, "Stay home #COVID19", false),
                tweet(2, "b", 1, "Stay home covid19", false),
                tweet(3, "c", 2, "#nCoV2019 update", false),
                tweet(4, "d", 3, "#covid19pandemic is not a listed tag", false),
            ],
        );
        let out = filter_by_hashtags(&c, &default_hashtags()).unwrap();
        assert_eq!(ids(&out), vec!["1", "3"]);
        let empty = Corpus::new("e", vec![]);
        assert!(filter_by_hashtags(&empty, &default_hashtags()).unwrap().is_empty());
        assert!(filter_by_hashtags(&c, &BTreeSet::new()).is_err());
    }

    #[test]
    fn retweets_dropped() {
        let c = Corpus::new(
            "t",
            vec![
                tweet(1, "a", 0, "x", true),
                tweet(2, "b", 1, "x", false),
                tweet(3, "c", 2, "x", true),
            ],
        );
        assert_eq!(ids(&drop_retweets(&c)), vec!["2"]);
    }

    #[test]
    fn retweet_counting_fixture() {
        let tweets = (0..100)
            .map(|i| tweet(i, &format!("u{i}"), i as i64, "x", i % 5 < 2))
            .collect();
        let c = Corpus::new("t", tweets);
        assert_eq!(drop_retweets(&c).len(), 60);
    }

    #[test]
    fn dedup_keeps_first_per_author() {
        let c = Corpus::new(
            "t",
            ["a", "b", "a", "c", "b"]
                .iter()
                .enumerate()
                .map(|(i, a)| tweet(i + 1, a, i as i64, "x", false))
                .collect(),
        );
        assert_eq!(ids(&dedup_by_author(&c)), vec!["1", "2", "4"]);
    }

    #[test]
    fn dedup_tie_keeps_file_order() {
        let c = Corpus::new(
            "t",
            vec![tweet(1, "a", 5, "first", false), tweet(2, "a", 5, "second", false)],
        );
        assert_eq!(ids(&dedup_by_author(&c)), vec!["1"]);
    }

    #[test]
    fn rule_order_matters() {
        // Author `a` retweets first, then posts an original.
        let c = Corpus::new(
            "t",
            vec![
                tweet(1, "a", 0, "#covid19 rt", true),
                tweet(2, "a", 1, "#covid19 original", false),
            ],
        );
        let fixed = apply_collection_rules(&c, &CollectionRules::standard()).unwrap();
        assert_eq!(ids(&fixed), vec!["2"]);
        let reversed = drop_retweets(&dedup_by_author(&c));
        assert!(reversed.is_empty());
    }

    #[test]
    fn lang_filter_passes_untagged() {
        let mut en = tweet(1, "a", 0, "x", false);
        en.lang = Some("en".into());
        let mut de = tweet(2, "b", 1, "x", false);
        de.lang = Some("de".into());
        let none = tweet(3, "c", 2, "x", false);
        let c = Corpus::new("t", vec![en, de, none]);
        assert_eq!(ids(&filter_by_lang(&c, "EN")), vec!["1", "3"]);
    }

    /// Two days of 25 tweets. Day 1 has 5 retweets; day 2 has 5 authors who
    /// already posted on day 1.
    fn two_day_fixture() -> Corpus {
        let day = 86_400;
        let mut tweets = Vec::new();
        for i in 0..25 {
            tweets.push(tweet(i, &format!("u{i}"), i as i64 * 60, "#covid19", i >= 20));
        }
        for i in 0..25 {
            let author = if i < 5 { format!("u{i}") } else { format!("v{i}") };
            tweets.push(tweet(100 + i, &author, day + i as i64 * 60, "#covid19", false));
        }
        Corpus::new("t", tweets)
    }

    #[test]
    fn two_day_ledger() {
        let raw = two_day_fixture();
        let filtered = apply_collection_rules(&raw, &CollectionRules::standard()).unwrap();
        assert_eq!(filtered.len(), 40);
        let l = ledger(&raw, &filtered).unwrap();
        let pairs: Vec<_> = l.rows.iter().map(|r| (r.collected, r.retained)).collect();
        assert_eq!(pairs, vec![(25, 20), (50, 40)]);
        assert_eq!(
            l.to_csv(),
            "date,collected,retained\n2020-03-20,25,20\n2020-03-21,50,40\n"
        );
    }

    #[test]
    fn single_day_and_empty_ledgers() {
        let raw = Corpus::new(
            "t",
            (0..10).map(|i| tweet(i, "a", i as i64, "x", false)).collect(),
        );
        let kept = Corpus::new("t", raw.tweets()[..7].to_vec());
        let l = ledger(&raw, &kept).unwrap();
        assert_eq!(l.rows.len(), 1);
        assert_eq!((l.rows[0].collected, l.rows[0].retained), (10, 7));

        let empty = Corpus::new("e", vec![]);
        assert!(ledger(&empty, &empty).unwrap().rows.is_empty());
    }

    #[test]
    fn ledger_rejects_foreign_days() {
        let raw = Corpus::new("t", vec![tweet(1, "a", 0, "x", false)]);
        let other = Corpus::new("t", vec![tweet(2, "a", 3 * 86_400, "x", false)]);
        assert!(matches!(ledger(&raw, &other), Err(Error::DayMismatch(_))));
    }

    proptest::proptest! {
        #[test]
        fn dedup_is_idempotent(authors in proptest::collection::vec(0u8..12, 0..60), rts in proptest::collection::vec(proptest::bool::ANY, 60)) {
            let c = Corpus::new(
                "p",
                authors
                    .iter()
                    .enumerate()
                    .map(|(i, a)| tweet(i, &format!("u{a}"), (i / 3) as i64, "#covid19 x", rts[i]))
                    .collect(),
            );
            let once = dedup_by_author(&c);
            proptest::prop_assert_eq!(ids(&dedup_by_author(&once)), ids(&once));
            let distinct: HashSet<&u8> = authors.iter().collect();
            proptest::prop_assert_eq!(once.len(), distinct.len());
            let rules = CollectionRules::standard();
            let filtered = apply_collection_rules(&c, &rules).unwrap();
            proptest::prop_assert_eq!(ids(&apply_collection_rules(&filtered, &rules).unwrap()), ids(&filtered));
        }
    }
}
