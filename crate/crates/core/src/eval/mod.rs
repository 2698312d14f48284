//! Cover comparison metrics, clique prediction and motif statistics.

mod auc;
mod f1;
mod nmi;
mod stats;

pub use auc::{
    auc, build_clique_split, clique_prediction_auc, product_features, CliquePredictionSplit,
    LogisticScorer, ScorerConfig,
};
pub use f1::{f1_score, set_f1};
pub use nmi::overlapping_nmi;
pub use stats::{motif_community_stats, SharedBin, SizeStats, MIN_TRIALS};
