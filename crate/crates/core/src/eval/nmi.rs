//! Normalized mutual information between overlapping covers.
//!
//! Each community is treated as a binary random variable over the `N`
//! vertices appearing in either cover. For `X_k` against `Y_l` the joint
//! counts are `a` (in neither), `b` (only `Y_l`), `c` (only `X_k`) and `d`
//! (both). `H(X_k | Y)` is the smallest `H(X_k | Y_l)` over the `Y_l` for
//! which `h(a) + h(d) >= h(b) + h(c)` (the pair is more alike than opposite),
//! or `H(X_k)` when no `Y_l` qualifies. Then
//!
//! ```text
//! I(X:Y) = 1/2 [H(X) - H(X|Y) + H(Y) - H(Y|X)]
//! NMI    = I(X:Y) / max(H(X), H(Y))
//! ```
//!
//! with `H(X) = sum_k H(X_k)` and `H(X|Y) = sum_k H(X_k|Y)`. This is the
//! max-normalized variant, which equals 1 exactly when the covers coincide.
//!
//! When both covers have zero entropy (every community holds all vertices)
//! the value is 1 if the covers are equal as sets of sets and 0 otherwise.

use std::collections::{BTreeSet, HashMap};

use crate::cover::CommunityAssignment;
use crate::error::{Error, Result};
use crate::graph::VertexId;

fn h(w: f64, n: f64) -> f64 {
    if w > 0.0 {
        -w * (w / n).log2()
    } else {
        0.0
    }
}

fn entropy_of(size: f64, n: f64) -> f64 {
    h(size, n) + h(n - size, n)
}

/// `sum_k H(X_k | Y)`, with `overlaps[k]` mapping `l` to `|X_k ∩ Y_l|`.
fn conditional_entropy(
    x_sizes: &[f64],
    y_sizes: &[f64],
    overlaps: &[HashMap<usize, usize>],
    n: f64,
) -> f64 {
    x_sizes
        .iter()
        .enumerate()
        .map(|(k, &xs)| {
            let mut best = entropy_of(xs, n);
            for (l, &ys) in y_sizes.iter().enumerate() {
                let d = overlaps[k].get(&l).copied().unwrap_or(0) as f64;
                let c = xs - d;
                let b = ys - d;
                let a = n - xs - ys + d;
                if h(a, n) + h(d, n) >= h(b, n) + h(c, n) {
                    let joint = h(a, n) + h(b, n) + h(c, n) + h(d, n);
                    let given = h(b + d, n) + h(a + c, n);
                    best = best.min(joint - given);
                }
            }
            best
        })
        .sum()
}

fn overlap_table(from: &[Vec<VertexId>], to: &[Vec<VertexId>]) -> Vec<HashMap<usize, usize>> {
    let mut owners: HashMap<VertexId, Vec<usize>> = HashMap::new();
    for (l, members) in to.iter().enumerate() {
        for &v in members {
            owners.entry(v).or_default().push(l);
        }
    }
    from.iter()
        .map(|members| {
            let mut counts = HashMap::new();
            for v in members {
                for &l in owners.get(v).map(Vec::as_slice).unwrap_or(&[]) {
                    *counts.entry(l).or_insert(0) += 1;
                }
            }
            counts
        })
        .collect()
}

pub fn overlapping_nmi(truth: &CommunityAssignment, detected: &CommunityAssignment) -> Result<f64> {
    if truth.is_empty() || detected.is_empty() {
        return Err(Error::Degenerate("NMI needs two nonempty covers".into()));
    }
    let x = &truth.communities;
    let y = &detected.communities;
    let universe: BTreeSet<VertexId> = x.iter().chain(y.iter()).flatten().copied().collect();
    let n = universe.len() as f64;

    let x_sizes: Vec<f64> = x.iter().map(|c| c.len() as f64).collect();
    let y_sizes: Vec<f64> = y.iter().map(|c| c.len() as f64).collect();
    let hx: f64 = x_sizes.iter().map(|&s| entropy_of(s, n)).sum();
    let hy: f64 = y_sizes.iter().map(|&s| entropy_of(s, n)).sum();
    let max_h = hx.max(hy);
    if max_h <= 0.0 {
        let xs: BTreeSet<&Vec<VertexId>> = x.iter().collect();
        let ys: BTreeSet<&Vec<VertexId>> = y.iter().collect();
        return Ok(if xs == ys { 1.0 } else { 0.0 });
    }
    let hx_given_y = conditional_entropy(&x_sizes, &y_sizes, &overlap_table(x, y), n);
    let hy_given_x = conditional_entropy(&y_sizes, &x_sizes, &overlap_table(y, x), n);
    let mutual = 0.5 * (hx - hx_given_y + hy - hy_given_x);
    Ok((mutual / max_h).clamp(0.0, 1.0))
}
