//! Planted overlapping-community graphs.
//!
//! Every vertex joins `k >= 1` communities chosen uniformly, with `k - 1`
//! Poisson-distributed (or, with the heavy tail enabled, `k` following a
//! truncated discrete power law) so that the mean membership count is `A`.
//! Members of a community are linked with probability `p_in`; any pair is
//! additionally linked with probability `p_out`.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::Poisson;

use crate::cover::{CommunityAssignment, CoverSource};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::rng::stream;

/// Refuse to build graphs expected to exceed this many edges.
pub const MAX_EXPECTED_EDGES: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub vertices: usize,
    pub communities: usize,
    /// Mean memberships per vertex, at least 1.
    pub mean_memberships: f64,
    pub heavy_tail: bool,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

impl PlantedSpec {
    pub fn validate(&self) -> Result<()> {
        if self.vertices < 2 || self.communities == 0 {
            return Err(Error::Parameter(
                "need at least two vertices and one community".into(),
            ));
        }
        if !(self.mean_memberships >= 1.0) || self.mean_memberships > self.communities as f64 {
            return Err(Error::Parameter(format!(
                "mean memberships must be in [1, communities], got {}",
                self.mean_memberships
            )));
        }
        if !(0.0..1.0).contains(&self.p_out) || !(self.p_in > self.p_out && self.p_in <= 1.0) {
            return Err(Error::Parameter(format!(
                "need 0 <= p_out < p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        Ok(())
    }

    /// Expected edge count before deduplication of overlapping pairs.
    pub fn expected_edges(&self) -> f64 {
        let v = self.vertices as f64;
        let size = v * self.mean_memberships / self.communities as f64;
        let within = self.communities as f64 * size * (size - 1.0).max(0.0) / 2.0 * self.p_in;
        within + v * (v - 1.0) / 2.0 * self.p_out
    }
}

fn power_law_weights(max_k: usize, exponent: f64) -> Vec<f64> {
    (1..=max_k).map(|k| (k as f64).powf(-exponent)).collect()
}

fn power_law_mean(max_k: usize, exponent: f64) -> f64 {
    let w = power_law_weights(max_k, exponent);
    let total: f64 = w.iter().sum();
    w.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x).sum::<f64>() / total
}

/// Exponent of `P(k) ~ k^-b` on `1..=max_k` whose mean is `mean`.
fn power_law_exponent(max_k: usize, mean: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if power_law_mean(max_k, mid) > mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn membership_counts<R: Rng + ?Sized>(spec: &PlantedSpec, rng: &mut R) -> Result<Vec<usize>> {
    let c = spec.communities;
    if spec.heavy_tail {
        let b = power_law_exponent(c, spec.mean_memberships);
        let dist = WeightedIndex::new(power_law_weights(c, b))
            .map_err(|e| Error::Parameter(format!("membership distribution: {e}")))?;
        Ok((0..spec.vertices).map(|_| dist.sample(rng) + 1).collect())
    } else if spec.mean_memberships > 1.0 {
        let dist = Poisson::new(spec.mean_memberships - 1.0)
            .map_err(|e| Error::Parameter(format!("membership distribution: {e}")))?;
        Ok((0..spec.vertices)
            .map(|_| (1 + dist.sample(rng) as usize).min(c))
            .collect())
    } else {
        Ok(vec![1; spec.vertices])
    }
}

/// Builds a planted graph and its ground-truth cover.
pub fn generate(spec: &PlantedSpec) -> Result<(Graph, CommunityAssignment)> {
    spec.validate()?;
    let expected = spec.expected_edges();
    if expected > MAX_EXPECTED_EDGES as f64 {
        return Err(Error::TooLarge {
            expected,
            limit: MAX_EXPECTED_EDGES,
        });
    }
    let mut rng = stream(spec.seed, &[0x5EED]);
    let n = spec.vertices;

    let mut members: Vec<Vec<VertexId>> = vec![Vec::new(); spec.communities];
    for (v, k) in membership_counts(spec, &mut rng)?.into_iter().enumerate() {
        for c in rand::seq::index::sample(&mut rng, spec.communities, k) {
            members[c].push(v);
        }
    }

    let mut edges = Vec::new();
    for group in &members {
        for (i, &u) in group.iter().enumerate() {
            for &v in &group[i + 1..] {
                if rng.gen_bool(spec.p_in) {
                    edges.push((u, v));
                }
            }
        }
    }
    if spec.p_out > 0.0 {
        background_edges(n, spec.p_out, &mut rng, &mut edges);
    }

    let mut degree = vec![0usize; n];
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let mut memberships: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, group) in members.iter().enumerate() {
        for &v in group {
            memberships[v].push(c);
        }
    }
    for v in 0..n {
        if degree[v] > 0 {
            continue;
        }
        let mates: Vec<VertexId> = memberships[v]
            .iter()
            .flat_map(|&c| members[c].iter().copied())
            .filter(|&u| u != v)
            .collect();
        let partner = if mates.is_empty() {
            let u = rng.gen_range(0..n - 1);
            if u >= v {
                u + 1
            } else {
                u
            }
        } else {
            mates[rng.gen_range(0..mates.len())]
        };
        edges.push((v, partner));
        degree[v] += 1;
        degree[partner] += 1;
    }

    let graph = Graph::from_edges(n, &edges)?;
    Ok((graph, CommunityAssignment::new(members, CoverSource::GroundTruth)))
}

/// Bernoulli(p) over all `n(n-1)/2` pairs using geometric skips.
fn background_edges<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R, out: &mut Vec<(VertexId, VertexId)>) {
    let log_q = (-p).ln_1p();
    let (mut u, mut v) = (0usize, 0usize);
    loop {
        let r: f64 = rng.gen::<f64>();
        let skip = ((1.0 - r).ln() / log_q).floor();
        if skip >= (n * n) as f64 {
            return;
        }
        v += skip as usize + 1;
        while u < n && v >= n {
            v = v - n + u + 2;
            u += 1;
        }
        if u + 1 >= n {
            return;
        }
        out.push((u, v));
    }
}
