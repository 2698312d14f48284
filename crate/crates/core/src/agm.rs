//! Nonnegative vertex-community affiliation embeddings and the affiliation
//! graph model probabilities built on them.
//!
//! For vertices with affiliation rows `F_1..F_m` the model assigns
//!
//! ```text
//! S = sum_c prod_i F_ic          p(clique) = 1 - exp(-S)
//! ```
//!
//! which is the same as combining independent per-community clique
//! probabilities `p_c = 1 - exp(-prod_i F_ic)` as `1 - prod_c (1 - p_c)`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::cover::{CommunityAssignment, CoverSource};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

/// Lower clamp on the affinity sum before taking `log(1 - exp(-S))`.
pub const AFFINITY_FLOOR: f64 = 1e-10;
/// Upper bound of the projection box applied after every update.
pub const MAX_AFFILIATION: f64 = 1e3;
/// Euclidean norm cap on the per-row step direction in the adversarial
/// updates. Near the affinity floor `grad log p` scales like `1 / S` and a
/// single unclipped step would jump straight to the box bound.
pub const MAX_STEP_NORM: f64 = 5.0;

/// Dense `V x C` matrix of nonnegative affiliation strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct AffiliationMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl AffiliationMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        AffiliationMatrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut values = Vec::with_capacity(n * cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            if let Some(x) = r.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(Error::Parameter(format!(
                    "row {i} has entry {x}; affiliations must be finite and nonnegative"
                )));
            }
            values.extend(r);
        }
        Ok(AffiliationMatrix {
            rows: n,
            cols,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, v: VertexId) -> &[f64] {
        &self.values[v * self.cols..(v + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, v: VertexId) -> &mut [f64] {
        &mut self.values[v * self.cols..(v + 1) * self.cols]
    }

    pub fn get(&self, v: VertexId, c: usize) -> f64 {
        self.values[v * self.cols + c]
    }

    pub fn set(&mut self, v: VertexId, c: usize, x: f64) {
        self.values[v * self.cols + c] = x;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Rows of `vertices`, in order.
    pub fn gather(&self, vertices: &[VertexId]) -> Vec<&[f64]> {
        vertices.iter().map(|&v| self.row(v)).collect()
    }

    /// Adds `scale * grad` to row `v`, then projects the row onto
    /// `[0, MAX_AFFILIATION]`.
    pub fn add_scaled_projected(&mut self, v: VertexId, scale: f64, grad: &[f64]) {
        for (x, g) in self.row_mut(v).iter_mut().zip(grad) {
            *x = project(*x + scale * g);
        }
    }

    /// [`add_scaled_projected`](Self::add_scaled_projected) with `grad`
    /// rescaled to norm at most [`MAX_STEP_NORM`].
    pub fn add_clipped_projected(&mut self, v: VertexId, scale: f64, grad: &[f64]) {
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let factor = if norm > MAX_STEP_NORM { MAX_STEP_NORM / norm } else { 1.0 };
        self.add_scaled_projected(v, scale * factor, grad);
    }

    /// Projects every entry onto `[0, MAX_AFFILIATION]`.
    pub fn project_all(&mut self) {
        for x in &mut self.values {
            *x = project(*x);
        }
    }

    pub fn is_valid(&self) -> bool {
        self.values
            .iter()
            .all(|x| x.is_finite() && (0.0..=MAX_AFFILIATION).contains(x))
    }

    /// Writes one TSV row per vertex: original label, then `C` values with six
    /// significant digits.
    pub fn write_tsv(&self, graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if graph.vertex_count() != self.rows {
            return Err(Error::Shape(format!(
                "graph has {} vertices, matrix has {} rows",
                graph.vertex_count(),
                self.rows
            )));
        }
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for v in 0..self.rows {
            let mut line = graph.label(v).to_string();
            for &x in self.row(v) {
                line.push('\t');
                line.push_str(&format_significant(x, 6));
            }
            writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[inline]
fn project(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, MAX_AFFILIATION)
    }
}

/// `%g`-style formatting with `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, x);
        // trim trailing zeros in the mantissa
        let (mantissa, e) = s.split_once('e').expect("exponent present");
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{e}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}

/// Component-wise product of equally sized vectors.
pub fn entrywise_product(vectors: &[&[f64]]) -> Vec<f64> {
    let Some((first, rest)) = vectors.split_first() else {
        return Vec::new();
    };
    let mut out = first.to_vec();
    for v in rest {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o *= x;
        }
    }
    out
}

/// `S = sum_c prod_i F_ic`.
pub fn affinity(vectors: &[&[f64]]) -> f64 {
    let cols = vectors.first().map_or(0, |v| v.len());
    (0..cols)
        .map(|c| vectors.iter().map(|v| v[c]).product::<f64>())
        .sum()
}

/// Probability that the vertices form a clique through community `c` alone.
pub fn clique_prob_per_community(vectors: &[&[f64]], c: usize) -> f64 {
    let prod: f64 = vectors.iter().map(|v| v[c]).product();
    -(-prod).exp_m1()
}

/// Probability that the vertices form a clique through any community.
pub fn clique_prob(vectors: &[&[f64]]) -> f64 {
    -(-affinity(vectors)).exp_m1()
}

/// `log(1 - exp(-S))` with `S` clamped below at [`AFFINITY_FLOOR`].
#[inline]
pub fn log_prob_from_affinity(s: f64) -> f64 {
    (-(-s.max(AFFINITY_FLOOR)).exp_m1()).ln()
}

/// `log p` for the clique, clamped.
pub fn log_clique_prob(vectors: &[&[f64]]) -> f64 {
    log_prob_from_affinity(affinity(vectors))
}

/// `log(1 - p) = -S`.
pub fn log_one_minus_clique_prob(vectors: &[&[f64]]) -> f64 {
    -affinity(vectors)
}

/// `d log(1 - exp(-S)) / dS` at the clamped `S`.
#[inline]
pub fn log_prob_slope(s: f64) -> f64 {
    1.0 / s.max(AFFINITY_FLOOR).exp_m1()
}

fn partner_product(vectors: &[&[f64]], target: usize) -> Vec<f64> {
    let cols = vectors[target].len();
    let mut out = vec![1.0; cols];
    for (i, v) in vectors.iter().enumerate() {
        if i != target {
            for (o, x) in out.iter_mut().zip(v.iter()) {
                *o *= x;
            }
        }
    }
    out
}

/// Gradient of `log p(clique)` with respect to row `target`.
pub fn grad_log_clique_prob(vectors: &[&[f64]], target: usize) -> Vec<f64> {
    let slope = log_prob_slope(affinity(vectors));
    let mut g = partner_product(vectors, target);
    for x in &mut g {
        *x *= slope;
    }
    g
}

/// Gradient of `log(1 - p(clique))` with respect to row `target`.
pub fn grad_log_one_minus_clique_prob(vectors: &[&[f64]], target: usize) -> Vec<f64> {
    let mut g = partner_product(vectors, target);
    for x in &mut g {
        *x = -*x;
    }
    g
}

/// Hard-membership threshold derived from the background edge density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipThreshold {
    pub delta: f64,
    pub epsilon: f64,
}

impl MembershipThreshold {
    /// `delta = sqrt(-ln(1 - epsilon))`.
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Parameter(format!(
                "background edge probability must be positive, got {epsilon}"
            )));
        }
        if epsilon >= 1.0 {
            return Err(Error::DenseGraph(epsilon));
        }
        Ok(MembershipThreshold {
            delta: (-(-epsilon).ln_1p()).sqrt(),
            epsilon,
        })
    }
}

/// Threshold for `graph` with `epsilon = 2E / (V (V - 1))`.
pub fn compute_threshold(graph: &Graph) -> Result<MembershipThreshold> {
    threshold_for(graph.vertex_count(), graph.edge_count())
}

pub fn threshold_for(vertices: usize, edges: usize) -> Result<MembershipThreshold> {
    if vertices < 2 || edges == 0 {
        return Err(Error::Parameter(format!(
            "threshold needs V >= 2 and E >= 1, got V={vertices} E={edges}"
        )));
    }
    let v = vertices as f64;
    MembershipThreshold::from_epsilon(2.0 * edges as f64 / (v * (v - 1.0)))
}

/// Community `c` holds every vertex whose generator or discriminator
/// affiliation to `c` reaches `delta`. Empty communities are dropped and
/// counted.
pub fn assign_communities(
    theta_g: &AffiliationMatrix,
    theta_d: &AffiliationMatrix,
    threshold: MembershipThreshold,
) -> Result<CommunityAssignment> {
    if theta_g.rows() != theta_d.rows() || theta_g.cols() != theta_d.cols() {
        return Err(Error::Shape(format!(
            "generator is {}x{}, discriminator is {}x{}",
            theta_g.rows(),
            theta_g.cols(),
            theta_d.rows(),
            theta_d.cols()
        )));
    }
    let delta = threshold.delta;
    let mut communities = vec![Vec::new(); theta_g.cols()];
    for v in 0..theta_g.rows() {
        for (c, (&g, &d)) in theta_g.row(v).iter().zip(theta_d.row(v)).enumerate() {
            if g >= delta || d >= delta {
                communities[c].push(v);
            }
        }
    }
    Ok(CommunityAssignment::new(communities, CoverSource::Detected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn per_community_closed_forms() {
        let a = [1.0, 0.0];
        let b = [1.0, 5.0];
        assert_eq!(clique_prob_per_community(&[&a, &b], 1), 0.0);
        assert_relative_eq!(
            clique_prob_per_community(&[&a, &b], 0),
            0.632_120_558_828_557_7,
            epsilon = 1e-15
        );
        let t = [2.0];
        assert_relative_eq!(
            clique_prob_per_community(&[&t, &t, &t], 0),
            1.0 - (-8.0f64).exp(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn clique_prob_special_cases() {
        let z = [0.0; 4];
        assert_eq!(clique_prob(&[&z, &z, &z]), 0.0);
        let a = [0.7];
        let b = [1.3];
        assert_eq!(clique_prob(&[&a, &b]), clique_prob_per_community(&[&a, &b], 0));
    }

    #[test]
    fn products() {
        assert_eq!(entrywise_product(&[&[1.0, 2.0], &[3.0, 4.0]]), vec![3.0, 8.0]);
        assert_eq!(entrywise_product(&[&[1.0, 2.0], &[0.0, 0.0]]), vec![0.0, 0.0]);
        assert_eq!(entrywise_product(&[&[1.5, 2.5]]), vec![1.5, 2.5]);
    }

    #[test]
    fn gradient_closed_forms() {
        let one = [1.0];
        let g = grad_log_clique_prob(&[&one, &one], 0);
        let e = (-1.0f64).exp();
        assert_relative_eq!(g[0], e / (1.0 - e), epsilon = 1e-14);
        assert_relative_eq!(g[0], 0.581_976_706_869_326_4, epsilon = 1e-12);

        let a = [1.0, 2.0];
        let b = [0.0, 3.0];
        let g = grad_log_clique_prob(&[&a, &b], 0);
        assert_eq!(g[0], 0.0);

        let partner = [3.0];
        let g = grad_log_one_minus_clique_prob(&[&one, &partner], 0);
        assert_eq!(g, vec![-3.0]);
        let g = grad_log_one_minus_clique_prob(&[&a, &b], 0);
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn clamped_log_is_finite() {
        let z = [0.0, 0.0];
        assert!(log_clique_prob(&[&z, &z]).is_finite());
        assert!(grad_log_clique_prob(&[&z, &[1.0, 1.0]], 0).iter().all(|x| x.is_finite()));
    }

    #[test]
    fn threshold_examples() {
        let t = threshold_for(4, 3).unwrap();
        assert_relative_eq!(t.epsilon, 0.5, epsilon = 1e-15);
        assert_relative_eq!(t.delta, 2f64.ln().sqrt(), epsilon = 1e-12);
        assert_relative_eq!(t.delta, 0.832_554_611_157_697_8, epsilon = 1e-12);

        let t = threshold_for(1000, 5000).unwrap();
        assert_relative_eq!(t.epsilon, 1.001_001_001e-2, epsilon = 1e-11);
        assert_relative_eq!(t.delta, 0.100_301_779_774_046_9, epsilon = 1e-12);

        assert!(threshold_for(4, 0).is_err());
        assert!(matches!(threshold_for(3, 3), Err(Error::DenseGraph(_))));
    }

    #[test]
    fn assignment_boundary_and_shape() {
        let t = MembershipThreshold::from_epsilon(0.5).unwrap();
        let mut g = AffiliationMatrix::zeros(3, 2);
        let d = AffiliationMatrix::zeros(3, 2);
        let a = assign_communities(&g, &d, t).unwrap();
        assert!(a.is_empty());
        assert_eq!(a.empty_dropped, 2);

        g.set(1, 0, t.delta);
        let a = assign_communities(&g, &d, t).unwrap();
        assert_eq!(a.communities, vec![vec![1]]);

        let bad = AffiliationMatrix::zeros(3, 3);
        assert!(matches!(assign_communities(&g, &bad, t), Err(Error::Shape(_))));
    }

    #[test]
    fn from_rows_validates() {
        assert!(AffiliationMatrix::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(AffiliationMatrix::from_rows(vec![vec![-1.0]]).is_err());
        let m = AffiliationMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn projection_box() {
        let mut m = AffiliationMatrix::zeros(1, 3);
        m.add_scaled_projected(0, 1.0, &[-5.0, 2e3, 0.5]);
        assert_eq!(m.row(0), &[0.0, MAX_AFFILIATION, 0.5]);
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.0, 6), "0");
        assert_eq!(format_significant(1.0, 6), "1");
        assert_eq!(format_significant(0.123456789, 6), "0.123457");
        assert_eq!(format_significant(123.456789, 6), "123.457");
        assert_eq!(format_significant(1e-7, 6), "1e-7");
        assert_eq!(format_significant(1234567.0, 6), "1.23457e6");
    }
}
