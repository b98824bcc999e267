//! Discourse-framing toolkit for tweet corpora.
//!
//! The pipeline runs in fixed stages: [`corpus`] applies the collection rules,
//! [`textprep`] turns text into tokens and bags of words, [`topicmodel`] fits a
//! collapsed-Gibbs LDA model, [`frames`] matches frame lexicons, [`stats`]
//! compares frames, and [`report`] assembles the tables. [`serve`] hosts the
//! data endpoints used by the topic explorer.

pub mod corpus;
pub mod error;
pub mod frames;
pub mod report;
pub mod serve;
pub mod stats;
pub mod textprep;
pub mod topicmodel;

pub use error::{Error, Result};

/// Hex SHA-256 of `parts` joined by newlines.
pub(crate) fn content_hash<'a, I>(parts: I) -> String
where
    I: IntoIterator<Item = &'a str>,
{
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part.as_bytes());
        hasher.update(b"\n");
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
