use rand::seq::SliceRandom;

use super::{check_train_args, edge_log_likelihood, initialize, sample_non_edges, CommunityCount, TrainConfig};
use crate::cliques::CliqueIndex;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::stream;

const TAG_SELECT: u64 = 6;
const HOLDOUT_FRACTION: f64 = 0.2;
const MAX_SPLITS: u64 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CountSelection {
    pub chosen: usize,
    /// `(candidate, held-out mean log-likelihood)`; empty when only one
    /// candidate was given.
    pub scores: Vec<(usize, f64)>,
}

/// Picks the community count whose model best predicts a held-out 20% of the
/// edges (against as many non-edges), fitting on the other 80%. Ties go to
/// the smaller count. All candidates share one split.
///
/// Each candidate is scored on the generator matrix after initialization
/// (`cfg.init`), without the adversarial loop. On small graphs the loop can
/// drive the row of a vertex that lost most of its cliques to the split to
/// exactly zero, and its held-out edges then sit at the affinity floor
/// whatever the count.
pub fn select_community_count(
    graph: &Graph,
    candidates: &[usize],
    cfg: &TrainConfig,
) -> Result<CountSelection> {
    let mut candidates = candidates.to_vec();
    candidates.sort_unstable();
    candidates.dedup();
    match candidates.as_slice() {
        [] => return Err(Error::Parameter("no candidate community counts".into())),
        [only] => {
            return Ok(CountSelection {
                chosen: *only,
                scores: Vec::new(),
            })
        }
        _ => {}
    }

    let edges: Vec<_> = graph.edges().collect();
    let holdout = ((edges.len() as f64 * HOLDOUT_FRACTION).round() as usize).max(1);
    let mut split = None;
    for attempt in 0..MAX_SPLITS {
        let mut rng = stream(cfg.seed, &[TAG_SELECT, attempt]);
        let mut shuffled = edges.clone();
        shuffled.shuffle(&mut rng);
        let (held, _) = shuffled.split_at(holdout);
        let train_graph = graph.without_edges(held)?;
        let index = CliqueIndex::enumerate(&train_graph, cfg.clique_size)?;
        if !index.is_empty() {
            let negatives = sample_non_edges(graph, held.len(), &mut rng);
            split = Some((train_graph, index, held.to_vec(), negatives));
            break;
        }
    }
    let Some((train_graph, index, held, negatives)) = split else {
        return Err(Error::NoCliques(cfg.clique_size));
    };

    let mut scores = Vec::with_capacity(candidates.len());
    let mut best: Option<(usize, f64)> = None;
    for &c in &candidates {
        let run_cfg = TrainConfig {
            communities: CommunityCount::Fixed(c),
            ..cfg.clone()
        };
        check_train_args(&index, &run_cfg)?;
        let fitted = initialize(&train_graph, &index, c, &run_cfg);
        let score = edge_log_likelihood(&fitted.theta_g, &held, &negatives);
        log::info!("community count {c}: held-out log-likelihood {score:.6}");
        scores.push((c, score));
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((c, score));
        }
    }
    Ok(CountSelection {
        chosen: best.expect("at least two candidates").0,
        scores,
    })
}
