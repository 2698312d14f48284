//! Overlapping community detection with a clique generator and a clique
//! discriminator trained against each other over nonnegative
//! vertex-community affiliation embeddings.
//!
//! The main entry points are [`graph::load_edge_list`],
//! [`cliques::CliqueIndex::enumerate`], [`trainer::train`] and
//! [`agm::assign_communities`]; [`detect`] chains them.

pub mod agm;
pub mod cliques;
pub mod cover;
pub mod discriminator;
pub mod error;
pub mod eval;
pub mod generator;
pub mod graph;
pub mod motif;
pub mod rng;
pub mod synth;
pub mod trainer;

pub use agm::{AffiliationMatrix, MembershipThreshold};
pub use cliques::CliqueIndex;
pub use cover::{CommunityAssignment, CoverSource};
pub use error::{Error, Result};
pub use graph::{Graph, VertexId};
pub use motif::{MotifSample, SampleLabel, WalkRecord};
pub use trainer::{CommunityCount, InitMethod, TrainConfig, TrainState};

/// Outcome of [`detect`].
#[derive(Debug, Clone)]
pub struct Detection {
    pub communities: CommunityAssignment,
    pub state: TrainState,
    pub threshold: MembershipThreshold,
    /// Community count actually used.
    pub community_count: usize,
    /// Held-out scores per candidate when the count was selected
    /// automatically.
    pub count_scores: Vec<(usize, f64)>,
}

/// Enumerates cliques, resolves the community count, trains, and thresholds
/// the learned affiliations into communities.
pub fn detect(graph: &Graph, cfg: &TrainConfig) -> Result<Detection> {
    cfg.validate()?;
    let index = CliqueIndex::enumerate(graph, cfg.clique_size)?;
    if index.is_empty() {
        return Err(Error::NoCliques(cfg.clique_size));
    }
    let (community_count, count_scores) = match cfg.communities {
        CommunityCount::Fixed(c) => (c, Vec::new()),
        CommunityCount::Auto => {
            let sel = trainer::select_community_count(graph, &cfg.candidates, cfg)?;
            (sel.chosen, sel.scores)
        }
    };
    let run_cfg = TrainConfig {
        communities: CommunityCount::Fixed(community_count),
        ..cfg.clone()
    };
    let state = trainer::train(graph, &index, &run_cfg)?;
    let threshold = agm::compute_threshold(graph)?;
    let communities = agm::assign_communities(&state.theta_g, &state.theta_d, threshold)?;
    Ok(Detection {
        communities,
        state,
        threshold,
        community_count,
        count_scores,
    })
}
