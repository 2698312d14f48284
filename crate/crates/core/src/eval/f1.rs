use crate::cover::CommunityAssignment;
use crate::error::{Error, Result};
use crate::graph::VertexId;

fn intersection_size(a: &[VertexId], b: &[VertexId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Harmonic mean of precision and recall between two member sets.
pub fn set_f1(a: &[VertexId], b: &[VertexId]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    2.0 * intersection_size(a, b) as f64 / (a.len() + b.len()) as f64
}

/// Symmetric best-match F1 between two covers:
/// the mean over truth communities of their best detected F1, averaged with
/// the mean over detected communities of their best truth F1.
pub fn f1_score(truth: &CommunityAssignment, detected: &CommunityAssignment) -> Result<f64> {
    if truth.is_empty() || detected.is_empty() {
        return Err(Error::Degenerate("F1 needs two nonempty covers".into()));
    }
    let t = &truth.communities;
    let d = &detected.communities;
    let table: Vec<Vec<f64>> = t.iter().map(|a| d.iter().map(|b| set_f1(a, b)).collect()).collect();
    let truth_side: f64 = table
        .iter()
        .map(|row| row.iter().copied().fold(0.0, f64::max))
        .sum::<f64>()
        / t.len() as f64;
    let detected_side: f64 = (0..d.len())
        .map(|j| table.iter().map(|row| row[j]).fold(0.0, f64::max))
        .sum::<f64>()
        / d.len() as f64;
    Ok(0.5 * (truth_side + detected_side))
}
