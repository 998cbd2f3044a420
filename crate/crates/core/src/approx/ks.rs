//! The `2/3 + eps` well-supported algorithm and its zero-one variant.

use crate::error::SolveError;
use crate::game::{argmax, support, MixedProfile, Player};
use crate::oracle::{query_row, PayoffOracle, Transposed, ZeroSumView};
use crate::rng::mix_seed;
use crate::zerosum::{estimate_payoff_vector, zerosum_wsne, ApproxPayoffVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KsMode {
    General,
    /// Requires every payoff to be 0 or 1.
    ZeroOne,
}

impl KsMode {
    /// Threshold parameter `z` of the support check and of the pure-cell search.
    pub fn z(self, eps: f64) -> f64 {
        match self {
            KsMode::General => 2.0 / 3.0,
            KsMode::ZeroOne => 0.5 + eps,
        }
    }

    /// The WSNE guarantee of the output.
    pub fn guarantee(self, eps: f64) -> f64 {
        match self {
            KsMode::General => 2.0 / 3.0 + eps,
            KsMode::ZeroOne => 0.5 + eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KsBranch {
    MixedFromZeroSum,
    PureFromLemma,
}

impl KsBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            KsBranch::MixedFromZeroSum => "mixed-from-zero-sum",
            KsBranch::PureFromLemma => "pure-from-lemma",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KsOutcome {
    pub profile: MixedProfile,
    pub branch: KsBranch,
    pub pure_cell: Option<(usize, usize)>,
    pub z: f64,
    pub queries: u64,
}

/// Queries all of row `row` and returns the lowest-index column maximizing
/// `R + C`, provided that sum exceeds `2z - eps`.
pub fn lemma_twoz_locate<O: PayoffOracle + ?Sized>(
    oracle: &mut O,
    row: usize,
    z: f64,
    eps: f64,
) -> Result<usize, SolveError> {
    let sums: Vec<f64> = query_row(oracle, row)?.iter().map(|a| a.a + a.b).collect();
    let j = argmax(&sums);
    let threshold = 2.0 * z - eps;
    if sums[j] > threshold {
        Ok(j)
    } else {
        Err(SolveError::HypothesisViolated {
            best_sum: sums[j],
            threshold,
        })
    }
}

/// Spread between the best strategy according to `v` and the worst strategy
/// in `own`'s support.
fn support_gap(v: &ApproxPayoffVector, own: &[f64]) -> f64 {
    let best = v.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let worst = support(own)
        .into_iter()
        .map(|i| v.values[i])
        .fold(f64::INFINITY, f64::min);
    best - worst
}

/// An `eps/10`-WSNE of `((R - C)/2, (C - R)/2)`, payoff estimates at `eps/10`,
/// then either that profile or a pure cell with a large payoff sum.
pub fn ks_query_wsne<O: PayoffOracle + ?Sized>(
    oracle: &mut O,
    eps: f64,
    seed: u64,
    mode: KsMode,
) -> Result<KsOutcome, SolveError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SolveError::InvalidInput(format!("eps {eps} outside (0, 1)")));
    }
    let start = oracle.queries();
    let tenth = eps / 10.0;
    let z = mode.z(eps);

    let ws = zerosum_wsne(&mut ZeroSumView::half_difference(&mut *oracle), tenth, mix_seed(seed, 0))?.profile;
    let fallback = || ws.clone();
    let r = estimate_payoff_vector(oracle, &ws.y, Player::Row, tenth, mix_seed(seed, 1))
        .map_err(|e| e.or_best_effort(fallback))?;
    let c = estimate_payoff_vector(oracle, &ws.x, Player::Column, tenth, mix_seed(seed, 2))
        .map_err(|e| e.or_best_effort(fallback))?;

    let threshold = z - eps / 5.0;
    let k = oracle.k();
    let pure_cell = if support_gap(&r, &ws.x) > threshold {
        let i = argmax(&r.values);
        let j = lemma_twoz_locate(oracle, i, z, eps).map_err(|e| e.or_best_effort(fallback))?;
        Some((i, j))
    } else if support_gap(&c, &ws.y) > threshold {
        let j = argmax(&c.values);
        let i = lemma_twoz_locate(&mut Transposed::new(&mut *oracle), j, z, eps)
            .map_err(|e| e.or_best_effort(fallback))?;
        Some((i, j))
    } else {
        None
    };

    let (profile, branch) = match pure_cell {
        Some((i, j)) => (MixedProfile::pure(k, i, j), KsBranch::PureFromLemma),
        None => (ws, KsBranch::MixedFromZeroSum),
    };
    Ok(KsOutcome {
        profile,
        branch,
        pure_cell,
        z,
        queries: oracle.queries() - start,
    })
}
