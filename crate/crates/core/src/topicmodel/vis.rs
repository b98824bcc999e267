//! Topic-visualisation export: topic prevalence, term saliency, a 2-D topic
//! layout and sparse φ for client-side relevance ranking.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::LdaModel;

pub const VIS_FORMAT_VERSION: u32 = 1;

/// Default relevance weight for the explorer's term ranking.
pub const DEFAULT_LAMBDA: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisTopic {
    /// 1-based topic number.
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub prevalence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisTerm {
    pub term: String,
    pub p: f64,
    pub saliency: f64,
}

/// Wire format served to the explorer.
///
/// `phi` lists `[topic id, term index, φ]` for every term the topic has
/// assigned tokens; any other entry of topic `k` equals `phi_floor[k - 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisData {
    pub format_version: u32,
    pub lambda: f64,
    pub topics: Vec<VisTopic>,
    pub terms: Vec<VisTerm>,
    pub phi: Vec<(u32, u32, f64)>,
    pub phi_floor: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frames: Vec<FrameOverlay>,
}

/// Mean topic mixture of the documents matching one frame lexicon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameOverlay {
    pub frame: String,
    pub matched_docs: usize,
    pub profile: Vec<f64>,
}

impl VisData {
    /// Dense φ rebuilt from the sparse encoding.
    pub fn dense_phi(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = self
            .phi_floor
            .iter()
            .map(|&f| vec![f; self.terms.len()])
            .collect();
        for &(k, w, value) in &self.phi {
            out[k as usize - 1][w as usize] = value;
        }
        out
    }

    /// Relevance of term `w` in topic `k` (0-based): `λ·ln φ + (1−λ)·ln(φ/p(w))`.
    pub fn relevance(&self, phi: &[Vec<f64>], k: usize, w: usize, lambda: f64) -> f64 {
        let value = phi[k][w];
        lambda * value.ln() + (1.0 - lambda) * (value / self.terms[w].p).ln()
    }
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).ln())
        .sum()
}

/// Jensen–Shannon divergence (natural log) of two distributions.
pub fn jensen_shannon(p: &[f64], q: &[f64]) -> f64 {
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    (0.5 * kl(p, &m) + 0.5 * kl(q, &m)).max(0.0)
}

/// Classical multidimensional scaling into two dimensions: eigen-decompose
/// the double-centred squared-distance matrix and scale the top two
/// eigenvectors by the root of their eigenvalues. Each axis is oriented so
/// its largest-magnitude coordinate is positive.
pub fn classical_mds(dist: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let n = dist.len();
    if n < 2 {
        return vec![[0.0, 0.0]; n];
    }
    let sq = DMatrix::from_fn(n, n, |i, j| dist[i][j] * dist[i][j]);
    let centre = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - 1.0 / n as f64);
    let b = -0.5 * &centre * sq * &centre;
    let b = 0.5 * (&b + b.transpose());
    let eig = SymmetricEigen::new(b);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| {
        eig.eigenvalues[c]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&c))
    });

    let top = eig.eigenvalues[order[0]].max(0.0);
    let mut coords = vec![[0.0; 2]; n];
    for (axis, &idx) in order.iter().take(2).enumerate() {
        let lambda = eig.eigenvalues[idx];
        if lambda <= top * 1e-12 {
            continue;
        }
        let vec = eig.eigenvectors.column(idx);
        let pivot = (0..n)
            .max_by(|&a, &c| {
                vec[a]
                    .abs()
                    .partial_cmp(&vec[c].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(c.cmp(&a))
            })
            .unwrap_or(0);
        let sign = if vec[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coords[i][axis] = sign * vec[i] * lambda.sqrt();
        }
    }
    coords
}

impl LdaModel {
    /// Topic prevalence, proportional to the tokens assigned to each topic.
    pub fn prevalence(&self) -> Vec<f64> {
        let total = self.total_tokens() as f64;
        self.topic_totals.iter().map(|&n| n as f64 / total).collect()
    }

    /// Pairwise Jensen–Shannon divergences between φ rows.
    pub fn topic_divergences(&self) -> Vec<Vec<f64>> {
        let phi = self.phi();
        let k = phi.len();
        let mut out = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let d = jensen_shannon(&phi[i], &phi[j]);
                out[i][j] = d;
                out[j][i] = d;
            }
        }
        out
    }

    pub fn export_vis(&self) -> VisData {
        let phi = self.phi();
        let prevalence = self.prevalence();
        let k = phi.len();
        let v = self.vocab_size();

        let coords = classical_mds(&self.topic_divergences());
        let topics = (0..k)
            .map(|t| VisTopic {
                id: t as u32 + 1,
                x: coords[t][0],
                y: coords[t][1],
                prevalence: prevalence[t],
            })
            .collect();

        let terms = (0..v)
            .map(|w| {
                let p: f64 = (0..k).map(|t| prevalence[t] * phi[t][w]).sum();
                let distinctiveness: f64 = (0..k)
                    .map(|t| {
                        let posterior = prevalence[t] * phi[t][w] / p;
                        if posterior > 0.0 {
                            posterior * (posterior / prevalence[t]).ln()
                        } else {
                            0.0
                        }
                    })
                    .sum();
                VisTerm {
                    term: self.vocabulary[w].clone(),
                    p,
                    saliency: p * distinctiveness,
                }
            })
            .collect();

        let mut sparse = Vec::new();
        for t in 0..k {
            for w in 0..v {
                if self.topic_term[t][w] > 0 {
                    sparse.push((t as u32 + 1, w as u32, phi[t][w]));
                }
            }
        }
        let v_beta = v as f64 * self.config.beta;
        let phi_floor = self
            .topic_totals
            .iter()
            .map(|&n| self.config.beta / (n as f64 + v_beta))
            .collect();

        VisData {
            format_version: VIS_FORMAT_VERSION,
            lambda: DEFAULT_LAMBDA,
            topics,
            terms,
            phi: sparse,
            phi_floor,
            frames: Vec::new(),
        }
    }
}
