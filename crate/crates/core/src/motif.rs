//! Vertex subsets exchanged between the sampler, generator and discriminator.

use crate::graph::VertexId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleLabel {
    /// Drawn from the observed cliques covering the root vertex.
    True,
    /// Produced by the generator.
    Generated,
}

/// One random walk that selected a single vertex of a generated subset.
///
/// `path` lists the real vertices visited after leaving the virtual root; the
/// last entry is the selected vertex. `members` is the number of subset
/// vertices that formed the virtual root when the walk ran.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkRecord {
    pub members: usize,
    pub path: Vec<VertexId>,
    pub log_prob: f64,
}

impl WalkRecord {
    pub fn chosen(&self) -> VertexId {
        *self.path.last().expect("walk path is never empty")
    }
}

/// An ordered vertex subset `(v_c, ...)` with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MotifSample {
    pub vertices: Vec<VertexId>,
    pub label: SampleLabel,
    /// One walk per vertex after the root; empty for true motifs.
    pub walks: Vec<WalkRecord>,
    /// Sum of the walk log-probabilities; zero for true motifs.
    pub log_prob: f64,
}

impl MotifSample {
    pub fn observed(vertices: Vec<VertexId>) -> Self {
        MotifSample {
            vertices,
            label: SampleLabel::True,
            walks: Vec::new(),
            log_prob: 0.0,
        }
    }

    pub fn root(&self) -> VertexId {
        self.vertices[0]
    }
}
