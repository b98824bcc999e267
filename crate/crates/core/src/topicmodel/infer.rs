use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LdaModel;

/// Topic mixture of one held-out document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inference {
    pub theta: Vec<f64>,
    /// Tokens not in the model vocabulary.
    pub oov: usize,
    /// No in-vocabulary tokens were left; `theta` is uniform.
    pub empty: bool,
}

impl LdaModel {
    /// Fold-in Gibbs sampling with the topic-term counts frozen. Runs
    /// `infer_iters` sweeps seeded from the model's seed and averages θ over
    /// the sweeps after `burn_in`.
    pub fn infer(&self, tokens: &[String]) -> Inference {
        let ids: Vec<usize> = tokens.iter().filter_map(|t| self.term_index(t)).collect();
        let oov = tokens.len() - ids.len();
        let mut out = self.infer_ids(&ids);
        out.oov = oov;
        out
    }

    pub fn infer_ids(&self, words: &[usize]) -> Inference {
        let cfg = &self.config;
        let k = cfg.topics;
        if words.is_empty() {
            return Inference {
                theta: vec![1.0 / k as f64; k],
                oov: 0,
                empty: true,
            };
        }

        let v_beta = self.vocabulary.len() as f64 * cfg.beta;
        // The topic-term factor never changes during fold-in.
        let word_factor: Vec<Vec<f64>> = words
            .iter()
            .map(|&w| {
                (0..k)
                    .map(|t| {
                        (f64::from(self.topic_term[t][w]) + cfg.beta)
                            / (self.topic_totals[t] as f64 + v_beta)
                    })
                    .collect()
            })
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut z: Vec<usize> = words.iter().map(|_| rng.gen_range(0..k)).collect();
        let mut counts = vec![0u32; k];
        for &t in &z {
            counts[t] += 1;
        }

        let k_alpha = k as f64 * cfg.alpha;
        let denom = words.len() as f64 + k_alpha;
        let mut theta_sum = vec![0.0f64; k];
        let mut kept = 0usize;
        let mut cumulative = vec![0.0f64; k];

        for iter in 0..cfg.infer_iters {
            for (i, factors) in word_factor.iter().enumerate() {
                counts[z[i]] -= 1;
                let mut total = 0.0;
                for t in 0..k {
                    total += (f64::from(counts[t]) + cfg.alpha) * factors[t];
                    cumulative[t] = total;
                }
                let u = rng.gen::<f64>() * total;
                let new = cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);
                z[i] = new;
                counts[new] += 1;
            }
            if iter >= cfg.burn_in {
                for t in 0..k {
                    theta_sum[t] += (f64::from(counts[t]) + cfg.alpha) / denom;
                }
                kept += 1;
            }
        }

        Inference {
            theta: theta_sum.into_iter().map(|s| s / kept as f64).collect(),
            oov: 0,
            empty: false,
        }
    }
}
