//! Payoff-query algorithms for bimatrix games.
//!
//! Algorithms see a game only through a [`PayoffOracle`], which counts every
//! query. Exact verifiers in [`game`] and the adversaries in [`lower_bounds`]
//! check what the algorithms output.

pub mod approx;
pub mod brute_force;
pub mod error;
pub mod game;
pub mod harness;
pub mod io;
pub mod lower_bounds;
pub mod oracle;
pub mod rng;
pub mod zerosum;

pub use approx::{bbm_query_ne, ks_query_wsne, lemma_twoz_locate, BbmOutcome, KsMode, KsOutcome};
pub use brute_force::{brute_force_equilibrium, BruteForceSolution};
pub use error::SolveError;
pub use game::{
    derived_d_x, derived_zero_sum, exact_regret, is_eps_ne, is_eps_wsne, BimatrixGame, GameError, MixedProfile,
    PayoffRange, Player, RegretReport,
};
pub use oracle::{Budgeted, MatrixOracle, PayoffOracle, QueryAnswer, QueryError, QueryLedger};
pub use zerosum::{estimate_payoff_vector, mwu_zero_sum, ne_to_wsne, zerosum_wsne, ApproxPayoffVector, MwuConfig};
