//! How often vertex sets drawn inside a community form cliques, compared with
//! sets drawn from the whole graph, and how that rate grows with the number
//! of communities the vertices share.

use std::collections::BTreeMap;

use rand::Rng;

use crate::cover::CommunityAssignment;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

pub const MIN_TRIALS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SharedBin {
    /// Communities containing every sampled vertex.
    pub shared: usize,
    pub samples: usize,
    pub clique_rate: f64,
    /// `clique_rate` divided by the largest rate over all bins.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeStats {
    pub k: usize,
    /// Probability that `k` vertices drawn from one random community form a
    /// clique.
    pub within_community: f64,
    /// Same for `k` vertices drawn from the whole graph.
    pub global: f64,
    /// Communities with fewer than `k` members, never drawn.
    pub skipped_communities: usize,
    pub shared_bins: Vec<SharedBin>,
}

fn shared_count(memberships: &[Vec<usize>], subset: &[VertexId]) -> usize {
    let (first, rest) = subset.split_first().expect("subset is nonempty");
    memberships[*first]
        .iter()
        .filter(|c| rest.iter().all(|&v| memberships[v].contains(c)))
        .count()
}

/// Runs `trials` community draws and `trials` global draws for every size.
pub fn motif_community_stats<R: Rng + ?Sized>(
    graph: &Graph,
    truth: &CommunityAssignment,
    sizes: &[usize],
    trials: usize,
    rng: &mut R,
) -> Result<Vec<SizeStats>> {
    if trials < MIN_TRIALS {
        return Err(Error::Parameter(format!(
            "need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    if truth.is_empty() {
        return Err(Error::Degenerate("no communities".into()));
    }
    let n = graph.vertex_count();
    let memberships = truth.memberships(n);
    let mut out = Vec::with_capacity(sizes.len());
    for &k in sizes {
        if k < 2 || k > n {
            return Err(Error::Parameter(format!("clique size {k} out of range")));
        }
        let eligible: Vec<&Vec<VertexId>> =
            truth.communities.iter().filter(|c| c.len() >= k).collect();
        let skipped = truth.len() - eligible.len();
        let mut bins: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        let mut record = |subset: &[VertexId], is_clique: bool| {
            let e = bins.entry(shared_count(&memberships, subset)).or_insert((0, 0));
            e.0 += 1;
            e.1 += is_clique as usize;
        };

        let mut within_hits = 0usize;
        if !eligible.is_empty() {
            for _ in 0..trials {
                let community = eligible[rng.gen_range(0..eligible.len())];
                let subset: Vec<VertexId> = rand::seq::index::sample(rng, community.len(), k)
                    .into_iter()
                    .map(|i| community[i])
                    .collect();
                let hit = graph.is_clique(&subset);
                within_hits += hit as usize;
                record(&subset, hit);
            }
        }
        let mut global_hits = 0usize;
        for _ in 0..trials {
            let subset = rand::seq::index::sample(rng, n, k).into_vec();
            let hit = graph.is_clique(&subset);
            global_hits += hit as usize;
            record(&subset, hit);
        }

        let max_rate = bins
            .values()
            .map(|&(s, h)| h as f64 / s as f64)
            .fold(0.0, f64::max);
        let shared_bins = bins
            .into_iter()
            .map(|(shared, (samples, hits))| {
                let rate = hits as f64 / samples as f64;
                SharedBin {
                    shared,
                    samples,
                    clique_rate: rate,
                    normalized: if max_rate > 0.0 { rate / max_rate } else { 0.0 },
                }
            })
            .collect();
        out.push(SizeStats {
            k,
            within_community: if eligible.is_empty() {
                0.0
            } else {
                within_hits as f64 / trials as f64
            },
            global: global_hits as f64 / trials as f64,
            skipped_communities: skipped,
            shared_bins,
        });
    }
    Ok(out)
}
