//! Subset generation by random walks rooted at a virtual vertex.
//!
//! To pick the next vertex of a subset, the already selected vertices are
//! merged into a virtual vertex that is adjacent to the union of their
//! neighborhoods and whose affiliation row is the entrywise product of their
//! rows. A walk leaves the virtual vertex and, at every real vertex `v`, moves
//! to a neighbor `u` with probability proportional to
//! `1 - exp(-sum_c g_uc g_vc gv_c)`. When the walk steps back to the vertex it
//! just came from, the current vertex is selected. The walk's probability is
//! the product of all transition probabilities including that final step back.

use std::collections::BTreeMap;

use rand::Rng;

use crate::agm::{AffiliationMatrix, AFFINITY_FLOOR};
use crate::graph::{Graph, VertexId};
use crate::motif::{MotifSample, SampleLabel, WalkRecord};

/// Sparse per-row gradient, keyed by vertex.
pub type RowGradients = BTreeMap<VertexId, Vec<f64>>;

/// Walk limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkLimits {
    /// Maximum transitions in one walk, including the final step back.
    pub max_walk: usize,
    /// Walks abandoned at the cap are retried this many times.
    pub max_restarts: usize,
}

impl Default for WalkLimits {
    fn default() -> Self {
        WalkLimits {
            max_walk: 10,
            max_restarts: 5,
        }
    }
}

/// The merged root of a walk.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualVertex {
    pub members: Vec<VertexId>,
    /// Sorted union of the members' neighborhoods.
    pub neighbor_union: Vec<VertexId>,
    /// Entrywise product of the members' generator rows.
    pub product: Vec<f64>,
}

impl VirtualVertex {
    pub fn new(graph: &Graph, theta: &AffiliationMatrix, members: &[VertexId]) -> Self {
        let mut neighbor_union: Vec<VertexId> = members
            .iter()
            .flat_map(|&v| graph.neighbors(v).iter().copied())
            .collect();
        neighbor_union.sort_unstable();
        neighbor_union.dedup();
        let mut product = vec![1.0; theta.cols()];
        for &v in members {
            for (p, x) in product.iter_mut().zip(theta.row(v)) {
                *p *= x;
            }
        }
        VirtualVertex {
            members: members.to_vec(),
            neighbor_union,
            product,
        }
    }

    fn is_member(&self, v: VertexId) -> bool {
        self.members.contains(&v)
    }
}

/// Normalized transition probabilities out of one walk position.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceDistribution {
    pub candidates: Vec<VertexId>,
    pub probabilities: Vec<f64>,
    /// Clamped affinity sums `S_j`, one per candidate.
    affinities: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

impl RelevanceDistribution {
    fn position_of(&self, v: VertexId) -> Option<usize> {
        self.candidates.iter().position(|&c| c == v)
    }

    pub fn probability_of(&self, v: VertexId) -> Option<f64> {
        self.position_of(v).map(|i| self.probabilities[i])
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut u = rng.gen::<f64>() * self.total;
        for (i, w) in self.weights.iter().enumerate() {
            if u < *w {
                return i;
            }
            u -= w;
        }
        self.weights.len() - 1
    }
}

/// Scaling vector for a transition out of `current` (or out of the virtual
/// vertex when `current` is `None`).
fn transition_base(theta: &AffiliationMatrix, root: &VirtualVertex, current: Option<VertexId>) -> Vec<f64> {
    match current {
        None => root.product.clone(),
        Some(v) => root
            .product
            .iter()
            .zip(theta.row(v))
            .map(|(a, b)| a * b)
            .collect(),
    }
}

/// Candidates for the next walk position: the neighbors of `current` (or of
/// the virtual vertex) that are not already members of the subset.
fn candidates(graph: &Graph, root: &VirtualVertex, current: Option<VertexId>) -> Vec<VertexId> {
    let pool = match current {
        None => root.neighbor_union.as_slice(),
        Some(v) => graph.neighbors(v),
    };
    pool.iter().copied().filter(|&u| !root.is_member(u)).collect()
}

/// Transition distribution out of `current`, or `None` when there is nowhere
/// to go.
pub fn relevance_distribution(
    graph: &Graph,
    theta: &AffiliationMatrix,
    root: &VirtualVertex,
    current: Option<VertexId>,
) -> Option<RelevanceDistribution> {
    let candidates = candidates(graph, root, current);
    if candidates.is_empty() {
        return None;
    }
    let base = transition_base(theta, root, current);
    let affinities: Vec<f64> = candidates
        .iter()
        .map(|&u| theta.row(u).iter().zip(&base).map(|(a, b)| a * b).sum())
        .collect();
    let weights: Vec<f64> = affinities
        .iter()
        .map(|&s| -(-s.max(AFFINITY_FLOOR)).exp_m1())
        .collect();
    let total: f64 = weights.iter().sum();
    let probabilities = weights.iter().map(|w| w / total).collect();
    Some(RelevanceDistribution {
        candidates,
        probabilities,
        affinities,
        weights,
        total,
    })
}

/// Runs one walk from `root`. Returns `None` if every attempt hit the cap or
/// the virtual vertex has no candidates.
pub fn walk<R: Rng + ?Sized>(
    graph: &Graph,
    theta: &AffiliationMatrix,
    root: &VirtualVertex,
    limits: WalkLimits,
    rng: &mut R,
) -> Option<WalkRecord> {
    let first = relevance_distribution(graph, theta, root, None)?;
    'attempt: for _ in 0..=limits.max_restarts {
        let i = first.sample(rng);
        let mut path = vec![first.candidates[i]];
        let mut log_prob = first.probabilities[i].ln();
        let mut transitions = 1;
        loop {
            let current = *path.last().unwrap();
            let Some(dist) = relevance_distribution(graph, theta, root, Some(current)) else {
                // Dead end: stepping back is the only move, so the current
                // vertex is selected with certainty.
                return Some(WalkRecord {
                    members: root.members.len(),
                    path,
                    log_prob,
                });
            };
            if transitions >= limits.max_walk {
                continue 'attempt;
            }
            let j = dist.sample(rng);
            let next = dist.candidates[j];
            log_prob += dist.probabilities[j].ln();
            transitions += 1;
            let previous = path.len().checked_sub(2).map(|k| path[k]);
            if previous == Some(next) {
                return Some(WalkRecord {
                    members: root.members.len(),
                    path,
                    log_prob,
                });
            }
            path.push(next);
        }
    }
    None
}

/// Generates an `m`-vertex subset rooted at `v_c`, one walk per added vertex.
///
/// Returns `None` when a walk fails after all restarts.
pub fn generate_subset<R: Rng + ?Sized>(
    graph: &Graph,
    theta: &AffiliationMatrix,
    v_c: VertexId,
    m: usize,
    limits: WalkLimits,
    rng: &mut R,
) -> Option<MotifSample> {
    if m < 2 || graph.degree(v_c) == 0 {
        return None;
    }
    let mut vertices = vec![v_c];
    let mut walks = Vec::with_capacity(m - 1);
    while vertices.len() < m {
        let root = VirtualVertex::new(graph, theta, &vertices);
        let record = walk(graph, theta, &root, limits, rng)?;
        vertices.push(record.chosen());
        walks.push(record);
    }
    let log_prob = walks.iter().map(|w| w.log_prob).sum();
    Some(MotifSample {
        vertices,
        label: SampleLabel::Generated,
        walks,
        log_prob,
    })
}

/// The `(from, to)` transitions a recorded walk took, `from = None` being the
/// virtual vertex.
fn transitions(path: &[VertexId]) -> Vec<(Option<VertexId>, VertexId)> {
    let mut out = Vec::with_capacity(path.len() + 1);
    out.push((None, path[0]));
    for w in path.windows(2) {
        out.push((Some(w[0]), w[1]));
    }
    if path.len() >= 2 {
        let n = path.len();
        out.push((Some(path[n - 1]), path[n - 2]));
    }
    out
}

/// Recomputes the log-probability of a stored walk under `theta`.
pub fn walk_log_prob(
    graph: &Graph,
    theta: &AffiliationMatrix,
    members: &[VertexId],
    path: &[VertexId],
) -> f64 {
    let root = VirtualVertex::new(graph, theta, members);
    transitions(path)
        .into_iter()
        .map(|(from, to)| {
            let dist = relevance_distribution(graph, theta, &root, from)
                .expect("recorded transition has candidates");
            dist.probability_of(to)
                .expect("recorded transition target is a candidate")
                .ln()
        })
        .sum()
}

/// Recomputes `log G(s | v_c)` for a generated sample with its paths fixed.
pub fn sample_log_prob(graph: &Graph, theta: &AffiliationMatrix, sample: &MotifSample) -> f64 {
    sample
        .walks
        .iter()
        .map(|w| walk_log_prob(graph, theta, &sample.vertices[..w.members], &w.path))
        .sum()
}

fn accumulate(grads: &mut RowGradients, v: VertexId, scale: f64, direction: &[f64]) {
    let row = grads.entry(v).or_insert_with(|| vec![0.0; direction.len()]);
    for (r, d) in row.iter_mut().zip(direction) {
        *r += scale * d;
    }
}

/// Gradient of `log G(s | v_c)` with respect to every generator row that
/// appears in any transition of the sample's recorded walks.
pub fn grad_log_generation(
    graph: &Graph,
    theta: &AffiliationMatrix,
    sample: &MotifSample,
) -> RowGradients {
    let mut grads = RowGradients::new();
    for record in &sample.walks {
        let members = &sample.vertices[..record.members];
        let root = VirtualVertex::new(graph, theta, members);
        for (from, to) in transitions(&record.path) {
            let dist = relevance_distribution(graph, theta, &root, from)
                .expect("recorded transition has candidates");
            accumulate_transition(theta, &root, from, to, &dist, &mut grads);
        }
    }
    grads
}

fn accumulate_transition(
    theta: &AffiliationMatrix,
    root: &VirtualVertex,
    from: Option<VertexId>,
    to: VertexId,
    dist: &RelevanceDistribution,
    grads: &mut RowGradients,
) {
    let cols = theta.cols();
    let chosen = dist.position_of(to).expect("target is a candidate");
    let base = transition_base(theta, root, from);

    // d log p(to) / d S_j for every candidate j
    let slope = |s: f64| if s > AFFINITY_FLOOR { (-s).exp() } else { 0.0 };
    let mut dbase = vec![0.0; cols];
    for (j, &u) in dist.candidates.iter().enumerate() {
        let s = dist.affinities[j];
        let mut coef = -slope(s) / dist.total;
        if j == chosen {
            coef += slope(s) / dist.weights[j];
        }
        if coef == 0.0 {
            continue;
        }
        accumulate(grads, u, coef, &base);
        for (d, x) in dbase.iter_mut().zip(theta.row(u)) {
            *d += coef * x;
        }
    }

    // chain rule through base = product (virtual) or product * g_from
    let dproduct: Vec<f64> = match from {
        None => dbase,
        Some(v) => {
            let dfrom: Vec<f64> = dbase.iter().zip(&root.product).map(|(a, b)| a * b).collect();
            accumulate(grads, v, 1.0, &dfrom);
            dbase.iter().zip(theta.row(v)).map(|(a, b)| a * b).collect()
        }
    };

    // product = prod_k g_k over members; use prefix/suffix products so zero
    // entries do not need division
    let k = root.members.len();
    let mut prefix = vec![vec![1.0; cols]; k + 1];
    for i in 0..k {
        let row = theta.row(root.members[i]);
        for c in 0..cols {
            prefix[i + 1][c] = prefix[i][c] * row[c];
        }
    }
    let mut suffix = vec![1.0; cols];
    for i in (0..k).rev() {
        let others: Vec<f64> = (0..cols)
            .map(|c| dproduct[c] * prefix[i][c] * suffix[c])
            .collect();
        accumulate(grads, root.members[i], 1.0, &others);
        let row = theta.row(root.members[i]);
        for c in 0..cols {
            suffix[c] *= row[c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn complete(n: usize) -> Graph {
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        Graph::from_edges(n, &e).unwrap()
    }

    fn filled(rows: usize, cols: usize, x: f64) -> AffiliationMatrix {
        AffiliationMatrix::from_rows(vec![vec![x; cols]; rows]).unwrap()
    }

    #[test]
    fn single_candidate_has_probability_one() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let theta = filled(2, 3, 0.4);
        let root = VirtualVertex::new(&g, &theta, &[0]);
        let d = relevance_distribution(&g, &theta, &root, None).unwrap();
        assert_eq!(d.candidates, vec![1]);
        assert_eq!(d.probabilities, vec![1.0]);
    }

    #[test]
    fn identical_candidates_split_evenly() {
        let g = Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        let theta = filled(3, 2, 0.8);
        let root = VirtualVertex::new(&g, &theta, &[0]);
        let d = relevance_distribution(&g, &theta, &root, None).unwrap();
        assert_eq!(d.probabilities, vec![0.5, 0.5]);
    }

    #[test]
    fn zero_rows_give_uniform_distribution() {
        let g = complete(5);
        let theta = AffiliationMatrix::zeros(5, 3);
        let root = VirtualVertex::new(&g, &theta, &[0]);
        let d = relevance_distribution(&g, &theta, &root, Some(1)).unwrap();
        for p in d.probabilities {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn k3_generation_is_forced() {
        let g = complete(3);
        let theta = filled(3, 2, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let s = generate_subset(&g, &theta, 0, 3, WalkLimits::default(), &mut rng).unwrap();
            let mut v = s.vertices.clone();
            assert_eq!(v[0], 0);
            v.sort_unstable();
            assert_eq!(v, vec![0, 1, 2]);
            assert!(s.log_prob <= 0.0);
        }
    }

    #[test]
    fn star_selects_two_leaves() {
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let theta = filled(5, 2, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let s = generate_subset(&g, &theta, 0, 3, WalkLimits::default(), &mut rng).unwrap();
            assert_eq!(s.vertices[0], 0);
            assert!(s.vertices[1] != 0 && s.vertices[2] != 0);
            assert_ne!(s.vertices[1], s.vertices[2]);
            assert!(!g.has_edge(s.vertices[1], s.vertices[2]));
        }
    }

    #[test]
    fn isolated_root_fails() {
        let g = Graph::from_edges(3, &[(1, 2)]).unwrap();
        let theta = filled(3, 1, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(generate_subset(&g, &theta, 0, 2, WalkLimits::default(), &mut rng).is_none());
    }

    #[test]
    fn single_candidate_steps_have_zero_gradient() {
        // path graph 0-1: the only walk from {0} is to 1 with probability one
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let theta = filled(2, 2, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = generate_subset(&g, &theta, 0, 2, WalkLimits::default(), &mut rng).unwrap();
        assert_eq!(s.log_prob, 0.0);
        let grads = grad_log_generation(&g, &theta, &s);
        assert!(grads.values().flatten().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn walk_cap_forces_restart_then_failure() {
        // a long path with the cap at one transition can never step back
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        let theta = filled(6, 1, 1.0);
        let limits = WalkLimits {
            max_walk: 1,
            max_restarts: 2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(generate_subset(&g, &theta, 0, 2, limits, &mut rng).is_none());
    }
}
