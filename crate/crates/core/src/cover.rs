use crate::graph::VertexId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverSource {
    GroundTruth,
    Detected,
}

/// A set of possibly overlapping communities, each a sorted vertex list.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityAssignment {
    pub communities: Vec<Vec<VertexId>>,
    pub source: CoverSource,
    /// Communities dropped because they had no members.
    pub empty_dropped: usize,
}

impl CommunityAssignment {
    /// Normalizes each community (sorted, deduplicated) and drops empty ones.
    pub fn new(communities: Vec<Vec<VertexId>>, source: CoverSource) -> Self {
        let mut empty_dropped = 0;
        let communities = communities
            .into_iter()
            .filter_map(|mut c| {
                c.sort_unstable();
                c.dedup();
                if c.is_empty() {
                    empty_dropped += 1;
                    None
                } else {
                    Some(c)
                }
            })
            .collect();
        CommunityAssignment {
            communities,
            source,
            empty_dropped,
        }
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    /// Mean number of communities per vertex over `vertex_count` vertices.
    pub fn mean_memberships(&self, vertex_count: usize) -> f64 {
        let total: usize = self.communities.iter().map(Vec::len).sum();
        total as f64 / vertex_count as f64
    }

    /// Per-vertex list of community indices.
    pub fn memberships(&self, vertex_count: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); vertex_count];
        for (c, members) in self.communities.iter().enumerate() {
            for &v in members {
                out[v].push(c);
            }
        }
        out
    }
}
