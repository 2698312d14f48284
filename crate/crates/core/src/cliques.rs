//! k-clique enumeration and uniform sampling of the cliques covering a vertex.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::motif::MotifSample;

pub const MIN_CLIQUE_SIZE: usize = 2;
pub const MAX_CLIQUE_SIZE: usize = 6;

/// All `m`-cliques of a graph with a per-vertex covering index.
#[derive(Debug, Clone)]
pub struct CliqueIndex {
    clique_size: usize,
    cliques: Vec<Vec<VertexId>>,
    per_vertex: Vec<Vec<usize>>,
}

impl CliqueIndex {
    /// Enumerates every `m`-clique exactly once.
    ///
    /// Vertices are ranked by `(degree, id)` and every edge is oriented toward
    /// the higher rank. A partial clique is only extended by common
    /// out-neighbors of all its members, so each clique is produced once, in
    /// rank order, and no deduplication pass is needed.
    pub fn enumerate(graph: &Graph, m: usize) -> Result<Self> {
        if !(MIN_CLIQUE_SIZE..=MAX_CLIQUE_SIZE).contains(&m) {
            return Err(Error::Parameter(format!(
                "clique size must be in {MIN_CLIQUE_SIZE}..={MAX_CLIQUE_SIZE}, got {m}"
            )));
        }
        let n = graph.vertex_count();
        let rank_key = |v: VertexId| (graph.degree(v), v);
        let out: Vec<Vec<VertexId>> = (0..n)
            .map(|v| {
                let mut o: Vec<VertexId> = graph
                    .neighbors(v)
                    .iter()
                    .copied()
                    .filter(|&u| rank_key(u) > rank_key(v))
                    .collect();
                o.sort_unstable();
                o
            })
            .collect();

        let mut cliques = Vec::new();
        let mut stack = Vec::with_capacity(m);
        for v in 0..n {
            stack.push(v);
            extend(&out, &out[v], m, &mut stack, &mut cliques);
            stack.pop();
        }
        cliques.sort_unstable();

        let mut per_vertex = vec![Vec::new(); n];
        for (i, c) in cliques.iter().enumerate() {
            for &v in c {
                per_vertex[v].push(i);
            }
        }
        Ok(CliqueIndex {
            clique_size: m,
            cliques,
            per_vertex,
        })
    }

    pub fn clique_size(&self) -> usize {
        self.clique_size
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    /// Cliques as vertex tuples sorted ascending.
    pub fn cliques(&self) -> &[Vec<VertexId>] {
        &self.cliques
    }

    /// Indices into [`cliques`](Self::cliques) of the cliques containing `v`.
    pub fn covering(&self, v: VertexId) -> &[usize] {
        &self.per_vertex[v]
    }

    /// Number of vertices covered by at least one clique.
    pub fn covered_vertices(&self) -> usize {
        self.per_vertex.iter().filter(|c| !c.is_empty()).count()
    }

    /// Draws one clique covering `v` uniformly at random, ordered with `v`
    /// first. Returns `None` when no clique covers `v`.
    pub fn sample_covering<R: Rng + ?Sized>(&self, v: VertexId, rng: &mut R) -> Option<MotifSample> {
        let covering = &self.per_vertex[v];
        if covering.is_empty() {
            return None;
        }
        let clique = &self.cliques[covering[rng.gen_range(0..covering.len())]];
        let mut vertices = Vec::with_capacity(clique.len());
        vertices.push(v);
        vertices.extend(clique.iter().copied().filter(|&u| u != v));
        Some(MotifSample::observed(vertices))
    }
}

fn extend(
    out: &[Vec<VertexId>],
    candidates: &[VertexId],
    m: usize,
    stack: &mut Vec<VertexId>,
    found: &mut Vec<Vec<VertexId>>,
) {
    if stack.len() == m {
        let mut c = stack.clone();
        c.sort_unstable();
        found.push(c);
        return;
    }
    if candidates.len() < m - stack.len() {
        return;
    }
    for &w in candidates {
        stack.push(w);
        if stack.len() == m {
            extend(out, &[], m, stack, found);
        } else {
            let next = intersect_sorted(candidates, &out[w]);
            extend(out, &next, m, stack, found);
        }
        stack.pop();
    }
}

fn intersect_sorted(a: &[VertexId], b: &[VertexId]) -> Vec<VertexId> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}
