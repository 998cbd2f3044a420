//! Query algorithms for general bimatrix games.

mod bbm;
mod ks;

pub use bbm::{bbm_delta, bbm_query_ne, choose_orientation, BbmBranch, BbmOutcome, Orientation, BBM_ALPHA};
pub use ks::{ks_query_wsne, lemma_twoz_locate, KsBranch, KsMode, KsOutcome};

use serde::Serialize;

/// One algorithm run, serialized as a CSV line by [`crate::io::csv_line`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmRunRecord {
    pub algorithm: String,
    pub k: usize,
    pub eps: f64,
    pub branch: String,
    pub queries: u64,
    pub regret_or_violation: f64,
    pub success: bool,
    pub seed: u64,
}
