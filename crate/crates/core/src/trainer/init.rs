//! Seeding affiliations from locally minimal neighborhoods.

use std::collections::HashSet;

use rand::Rng;

use crate::agm::AffiliationMatrix;
use crate::graph::{Graph, VertexId};

/// `cut(S) / min(vol(S), vol(V \ S))`; `1.0` when either volume is zero.
pub fn conductance(graph: &Graph, set: &[VertexId]) -> f64 {
    let mut inside = vec![false; graph.vertex_count()];
    for &v in set {
        inside[v] = true;
    }
    let mut cut = 0usize;
    let mut vol = 0usize;
    for &v in set {
        vol += graph.degree(v);
        cut += graph.neighbors(v).iter().filter(|&&u| !inside[u]).count();
    }
    let complement = 2 * graph.edge_count() - vol;
    let denom = vol.min(complement);
    if denom == 0 {
        1.0
    } else {
        cut as f64 / denom as f64
    }
}

/// Closed neighborhood `{v} ∪ N(v)`, sorted.
pub fn closed_neighborhood(graph: &Graph, v: VertexId) -> Vec<VertexId> {
    let mut set: Vec<VertexId> = graph.neighbors(v).to_vec();
    let pos = set.binary_search(&v).unwrap_err();
    set.insert(pos, v);
    set
}

/// Seed community of a column, with the vertex whose neighborhood produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub center: VertexId,
    pub conductance: f64,
    pub locally_minimal: bool,
    pub members: Vec<VertexId>,
}

/// Ranks closed neighborhoods and picks up to `count` distinct seeds.
///
/// A neighborhood is locally minimal when its `(conductance, center)` pair is
/// below that of every neighbor's neighborhood. Locally minimal ones come
/// first in ascending conductance (ties by center id); if there are too few,
/// the remaining lowest-conductance neighborhoods fill in. Neighborhoods with
/// identical member sets are used once.
pub fn rank_seeds(graph: &Graph, count: usize) -> Vec<Seed> {
    let n = graph.vertex_count();
    let phi: Vec<f64> = (0..n)
        .map(|v| conductance(graph, &closed_neighborhood(graph, v)))
        .collect();
    let key = |v: VertexId| (phi[v], v);
    let minimal: Vec<bool> = (0..n)
        .map(|v| {
            graph.degree(v) > 0
                && graph
                    .neighbors(v)
                    .iter()
                    .all(|&u| key(v).partial_cmp(&key(u)) == Some(std::cmp::Ordering::Less))
        })
        .collect();

    let mut order: Vec<VertexId> = (0..n).filter(|&v| graph.degree(v) > 0).collect();
    order.sort_by(|&a, &b| {
        minimal[b]
            .cmp(&minimal[a])
            .then(phi[a].total_cmp(&phi[b]))
            .then(a.cmp(&b))
    });

    let mut seen: HashSet<Vec<VertexId>> = HashSet::new();
    let mut seeds = Vec::with_capacity(count);
    for v in order {
        if seeds.len() == count {
            break;
        }
        let members = closed_neighborhood(graph, v);
        if seen.insert(members.clone()) {
            seeds.push(Seed {
                center: v,
                conductance: phi[v],
                locally_minimal: minimal[v],
                members,
            });
        }
    }
    seeds
}

/// Seeds `communities` columns from ranked neighborhoods. Seed members get
/// affiliation 1; both matrices then receive independent uniform
/// `[0, jitter)` noise on every entry. Columns without a seed hold noise only.
pub fn init_locally_minimal<R: Rng + ?Sized>(
    graph: &Graph,
    communities: usize,
    jitter: f64,
    rng: &mut R,
) -> (AffiliationMatrix, AffiliationMatrix) {
    let n = graph.vertex_count();
    let mut base = AffiliationMatrix::zeros(n, communities);
    for (c, seed) in rank_seeds(graph, communities).iter().enumerate() {
        for &v in &seed.members {
            base.set(v, c, 1.0);
        }
    }
    let mut noisy = |m: &AffiliationMatrix| {
        let mut out = m.clone();
        if jitter > 0.0 {
            for v in 0..n {
                for x in out.row_mut(v) {
                    *x += rng.gen_range(0.0..jitter);
                }
            }
        }
        out
    };
    let g = noisy(&base);
    let d = noisy(&base);
    (g, d)
}
