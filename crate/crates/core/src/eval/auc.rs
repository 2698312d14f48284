//! Clique prediction: hide cliques, learn a scorer from embeddings of the
//! remaining graph, and rank hidden cliques against random non-cliques.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::agm::AffiliationMatrix;
use crate::cliques::CliqueIndex;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::trainer::sample_non_clique;

/// Rank-sum (Mann-Whitney) AUC; tied scores share their average rank.
pub fn auc(positives: &[f64], negatives: &[f64]) -> Result<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::Degenerate(
            "AUC needs at least one positive and one negative".into(),
        ));
    }
    let mut all: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        // ranks i+1..=j+1 averaged
        let rank = (i + j + 2) as f64 / 2.0;
        rank_sum += rank * all[i..=j].iter().filter(|x| x.1).count() as f64;
        i = j + 1;
    }
    let np = positives.len() as f64;
    let nn = negatives.len() as f64;
    Ok((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

/// Per-community products of the subset's rows (the summands of the affinity).
pub fn product_features(theta: &AffiliationMatrix, subset: &[VertexId]) -> Vec<f64> {
    let mut f = vec![1.0; theta.cols()];
    for &v in subset {
        for (x, y) in f.iter_mut().zip(theta.row(v)) {
            *x *= y;
        }
    }
    f
}

/// L2-regularized logistic regression on standardized features, fit by
/// full-batch gradient descent.
#[derive(Debug, Clone)]
pub struct LogisticScorer {
    weights: Vec<f64>,
    bias: f64,
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl LogisticScorer {
    pub fn fit(features: &[Vec<f64>], labels: &[bool], l2: f64, iterations: usize, lr: f64) -> Result<Self> {
        if features.is_empty() || features.len() != labels.len() {
            return Err(Error::Degenerate("logistic fit needs matching, nonempty data".into()));
        }
        let dim = features[0].len();
        let n = features.len() as f64;
        let mean: Vec<f64> = (0..dim)
            .map(|j| features.iter().map(|x| x[j]).sum::<f64>() / n)
            .collect();
        let scale: Vec<f64> = (0..dim)
            .map(|j| {
                let var = features.iter().map(|x| (x[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    1.0 / var.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        let xs: Vec<Vec<f64>> = features
            .iter()
            .map(|x| (0..dim).map(|j| (x[j] - mean[j]) * scale[j]).collect())
            .collect();
        let mut weights = vec![0.0; dim];
        let mut bias = 0.0;
        for _ in 0..iterations {
            let mut gw = vec![0.0; dim];
            let mut gb = 0.0;
            for (x, &y) in xs.iter().zip(labels) {
                let z = bias + x.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>();
                let err = sigmoid(z) - if y { 1.0 } else { 0.0 };
                gb += err;
                for (g, xi) in gw.iter_mut().zip(x) {
                    *g += err * xi;
                }
            }
            bias -= lr * gb / n;
            for (w, g) in weights.iter_mut().zip(&gw) {
                *w -= lr * (g / n + l2 * *w);
            }
        }
        Ok(LogisticScorer {
            weights,
            bias,
            mean,
            scale,
        })
    }

    pub fn score(&self, features: &[f64]) -> f64 {
        let z = self.bias
            + features
                .iter()
                .enumerate()
                .map(|(j, x)| (x - self.mean[j]) * self.scale[j] * self.weights[j])
                .sum::<f64>();
        sigmoid(z)
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Graph with hidden cliques removed plus labelled test subsets.
#[derive(Debug, Clone)]
pub struct CliquePredictionSplit {
    pub clique_size: usize,
    pub train: Graph,
    /// Hidden cliques of the original graph.
    pub positives: Vec<Vec<VertexId>>,
    /// Random subsets that are not cliques in the original graph.
    pub negatives: Vec<Vec<VertexId>>,
    pub removed_edges: usize,
    /// `removed_edges / E` of the original graph.
    pub achieved_fraction: f64,
}

fn clique_edges(clique: &[VertexId]) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
    clique
        .iter()
        .enumerate()
        .flat_map(move |(i, &u)| clique[i + 1..].iter().map(move |&v| (u.min(v), u.max(v))))
}

/// Hides edge-disjoint `m`-cliques, in random order, until at least
/// `target_fraction` of the edges are removed (or the cliques run out), then
/// draws as many non-clique negatives.
pub fn build_clique_split<R: Rng + ?Sized>(
    graph: &Graph,
    m: usize,
    target_fraction: f64,
    rng: &mut R,
) -> Result<CliquePredictionSplit> {
    if !(target_fraction > 0.0 && target_fraction < 0.5) {
        return Err(Error::Parameter(format!(
            "hidden edge fraction must be in (0, 0.5), got {target_fraction}"
        )));
    }
    let index = CliqueIndex::enumerate(graph, m)?;
    let mut order: Vec<usize> = (0..index.len()).collect();
    order.shuffle(rng);
    let target = (target_fraction * graph.edge_count() as f64).ceil() as usize;
    let mut removed: HashSet<(VertexId, VertexId)> = HashSet::new();
    let mut positives = Vec::new();
    for i in order {
        if removed.len() >= target {
            break;
        }
        let clique = &index.cliques()[i];
        if clique_edges(clique).all(|e| !removed.contains(&e)) {
            removed.extend(clique_edges(clique));
            positives.push(clique.clone());
        }
    }
    let negatives: Vec<Vec<VertexId>> = (0..positives.len())
        .filter_map(|_| sample_non_clique(graph, m, rng))
        .collect();
    let mut removed_list: Vec<_> = removed.into_iter().collect();
    removed_list.sort_unstable();
    let train = graph.without_edges(&removed_list)?;
    Ok(CliquePredictionSplit {
        clique_size: m,
        removed_edges: removed_list.len(),
        achieved_fraction: removed_list.len() as f64 / graph.edge_count() as f64,
        train,
        positives,
        negatives,
    })
}

/// Settings for the logistic scorer used in clique prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorerConfig {
    /// Training positives (and negatives) drawn from the train graph.
    pub max_examples: usize,
    pub l2: f64,
    pub iterations: usize,
    pub lr: f64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            max_examples: 4000,
            l2: 1e-4,
            iterations: 300,
            lr: 0.5,
        }
    }
}

/// Fits a logistic scorer on product features of train-graph cliques versus
/// train-graph non-cliques, then returns the AUC of hidden cliques against
/// the split's negatives.
pub fn clique_prediction_auc<R: Rng + ?Sized>(
    split: &CliquePredictionSplit,
    theta: &AffiliationMatrix,
    cfg: ScorerConfig,
    rng: &mut R,
) -> Result<f64> {
    if split.positives.is_empty() || split.negatives.is_empty() {
        return Err(Error::Degenerate("clique split has an empty test class".into()));
    }
    let m = split.clique_size;
    let index = CliqueIndex::enumerate(&split.train, m)?;
    if index.is_empty() {
        return Err(Error::NoCliques(m));
    }
    let picked: Vec<usize> = if index.len() <= cfg.max_examples {
        (0..index.len()).collect()
    } else {
        rand::seq::index::sample(rng, index.len(), cfg.max_examples).into_vec()
    };
    let mut features = Vec::with_capacity(2 * picked.len());
    let mut labels = Vec::with_capacity(2 * picked.len());
    for &i in &picked {
        features.push(product_features(theta, &index.cliques()[i]));
        labels.push(true);
        if let Some(neg) = sample_non_clique(&split.train, m, rng) {
            features.push(product_features(theta, &neg));
            labels.push(false);
        }
    }
    let scorer = LogisticScorer::fit(&features, &labels, cfg.l2, cfg.iterations, cfg.lr)?;
    let score = |s: &Vec<VertexId>| scorer.score(&product_features(theta, s));
    let pos: Vec<f64> = split.positives.iter().map(score).collect();
    let neg: Vec<f64> = split.negatives.iter().map(score).collect();
    auc(&pos, &neg)
}
