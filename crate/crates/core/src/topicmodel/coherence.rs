use std::collections::HashSet;

use super::LdaModel;
use crate::error::{Error, Result};
use crate::textprep::BagOfWords;

impl LdaModel {
    /// UMass coherence of every topic over its `top_n` terms (ordered by φ,
    /// descending): `Σ_{i<j} ln((D(w_i, w_j) + 1) / D(w_j))`, where `D` counts
    /// documents of `bags` containing the term(s).
    pub fn coherence(&self, bags: &[BagOfWords], top_n: usize) -> Result<Vec<f64>> {
        if top_n < 2 {
            return Err(Error::InvalidArgument("coherence needs at least 2 terms".into()));
        }
        if top_n > self.vocab_size() {
            return Err(Error::InvalidArgument(format!(
                "top_n {top_n} exceeds vocabulary size {}",
                self.vocab_size()
            )));
        }
        let doc_sets: Vec<HashSet<usize>> = bags
            .iter()
            .map(|b| b.iter().map(|(w, _)| w).collect())
            .collect();
        let df = |w: usize| doc_sets.iter().filter(|s| s.contains(&w)).count();
        let co_df = |a: usize, b: usize| {
            doc_sets
                .iter()
                .filter(|s| s.contains(&a) && s.contains(&b))
                .count()
        };

        let tops = self.top_topic_terms(top_n)?;
        tops.iter()
            .map(|terms| {
                let ids: Vec<usize> = terms
                    .iter()
                    .map(|t| self.term_index(&t.term).expect("term from this model"))
                    .collect();
                let mut score = 0.0;
                for j in 1..ids.len() {
                    let dj = df(ids[j]);
                    if dj == 0 {
                        return Err(Error::Degenerate(format!(
                            "term `{}` occurs in no document",
                            self.vocabulary[ids[j]]
                        )));
                    }
                    for i in 0..j {
                        score += ((co_df(ids[i], ids[j]) as f64 + 1.0) / dj as f64).ln();
                    }
                }
                Ok(score)
            })
            .collect()
    }
}
