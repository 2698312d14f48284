//! Clique discriminator `D(s) = 1 - exp(-sum_c prod_{v in s} d_vc)`.

use crate::agm::{self, AffiliationMatrix};
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::motif::MotifSample;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorScore {
    pub subset: Vec<VertexId>,
    pub score: f64,
    /// `log D`, with the affinity clamped.
    pub log_score: f64,
    /// `log(1 - D)`.
    pub log_one_minus: f64,
}

fn check_distinct(subset: &[VertexId]) -> Result<()> {
    if subset.len() < 2 {
        return Err(Error::Parameter(format!(
            "subset needs at least two vertices, got {}",
            subset.len()
        )));
    }
    for (i, v) in subset.iter().enumerate() {
        if subset[..i].contains(v) {
            return Err(Error::DuplicateVertex(*v));
        }
    }
    Ok(())
}

pub fn score(theta_d: &AffiliationMatrix, subset: &[VertexId]) -> Result<DiscriminatorScore> {
    check_distinct(subset)?;
    let rows = theta_d.gather(subset);
    let s = agm::affinity(&rows);
    Ok(DiscriminatorScore {
        subset: subset.to_vec(),
        score: -(-s).exp_m1(),
        log_score: agm::log_prob_from_affinity(s),
        log_one_minus: -s,
    })
}

/// Batch objective `sum log D(pos) + sum log(1 - D(neg))`.
pub fn batch_objective(
    theta_d: &AffiliationMatrix,
    positives: &[MotifSample],
    negatives: &[MotifSample],
) -> f64 {
    let pos: f64 = positives
        .iter()
        .map(|s| agm::log_clique_prob(&theta_d.gather(&s.vertices)))
        .sum();
    let neg: f64 = negatives
        .iter()
        .map(|s| agm::log_one_minus_clique_prob(&theta_d.gather(&s.vertices)))
        .sum();
    pos + neg
}

/// One ascent step on a single subset: every member row moves along the
/// gradient of `log D` (positive) or `log(1 - D)` (negative). Gradients for
/// all members are taken at the pre-step parameters and clipped to
/// [`agm::MAX_STEP_NORM`].
pub fn ascend_sample(theta_d: &mut AffiliationMatrix, vertices: &[VertexId], positive: bool, lr: f64) {
    let grads: Vec<Vec<f64>> = {
        let rows = theta_d.gather(vertices);
        (0..vertices.len())
            .map(|i| {
                if positive {
                    agm::grad_log_clique_prob(&rows, i)
                } else {
                    agm::grad_log_one_minus_clique_prob(&rows, i)
                }
            })
            .collect()
    };
    for (&v, g) in vertices.iter().zip(&grads) {
        theta_d.add_clipped_projected(v, lr, g);
    }
}

/// Applies per-sample ascent steps, positives first, each in arrival order.
pub fn update_from_batch(
    theta_d: &mut AffiliationMatrix,
    positives: &[MotifSample],
    negatives: &[MotifSample],
    lr: f64,
) -> Result<()> {
    if !(lr > 0.0) {
        return Err(Error::Parameter(format!("learning rate must be positive, got {lr}")));
    }
    for s in positives {
        ascend_sample(theta_d, &s.vertices, true, lr);
    }
    for s in negatives {
        ascend_sample(theta_d, &s.vertices, false, lr);
    }
    Ok(())
}
