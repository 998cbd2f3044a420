//! The `(3 - sqrt 5)/2 + eps` Nash algorithm.

use crate::error::SolveError;
use crate::game::{argmax, pure_strategy, MixedProfile, Player};
use crate::oracle::{query_row, PayoffOracle, Transposed, ZeroSumView};
use crate::rng::mix_seed;
use crate::zerosum::{
    approx_best_response, approx_regret, estimate_payoff_vector, mwu_zero_sum, ApproxPayoffVector, MwuConfig,
};

/// `(3 - sqrt 5) / 2`.
pub const BBM_ALPHA: f64 = 0.381_966_011_250_105_15;

/// Which player was treated as the row player when building the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    AsGiven,
    Swapped,
}

impl Orientation {
    pub fn swap(self) -> Self {
        match self {
            Orientation::AsGiven => Orientation::Swapped,
            Orientation::Swapped => Orientation::AsGiven,
        }
    }
}

/// Puts the player with the larger approximate regret in the row position.
/// Ties keep the given orientation.
pub fn choose_orientation(row_regret: f64, col_regret: f64) -> Orientation {
    if col_regret > row_regret {
        Orientation::Swapped
    } else {
        Orientation::AsGiven
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BbmBranch {
    LowRegret,
    Shifted,
}

impl BbmBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            BbmBranch::LowRegret => "low-regret",
            BbmBranch::Shifted => "shifted",
        }
    }
}

/// `(1 - g) / (2 - g)`.
pub fn bbm_delta(g: f64) -> f64 {
    (1.0 - g) / (2.0 - g)
}

/// Result of [`bbm_query_ne`]. `b` and `d` index the oriented game: when the
/// orientation is swapped, `b` is a column and `d` a row of the input game.
#[derive(Debug, Clone, PartialEq)]
pub struct BbmOutcome {
    pub profile: MixedProfile,
    pub branch: BbmBranch,
    pub g: f64,
    pub b: usize,
    pub d: usize,
    pub delta: Option<f64>,
    pub alpha: f64,
    pub queries: u64,
    pub orientation: Orientation,
}

struct Oriented {
    profile: MixedProfile,
    branch: BbmBranch,
    g: f64,
    b: usize,
    d: usize,
    delta: Option<f64>,
}

fn finish<O: PayoffOracle + ?Sized>(
    oracle: &mut O,
    x: &[f64],
    y: &[f64],
    r: &ApproxPayoffVector,
) -> Result<Oriented, SolveError> {
    let k = oracle.k();
    let b = approx_best_response(r);
    let g = approx_regret(r, x);
    let col_payoffs: Vec<f64> = query_row(oracle, b)?.iter().map(|a| a.b).collect();
    let d = argmax(&col_payoffs);
    if g <= BBM_ALPHA {
        return Ok(Oriented {
            profile: MixedProfile {
                x: x.to_vec(),
                y: y.to_vec(),
            },
            branch: BbmBranch::LowRegret,
            g,
            b,
            d,
            delta: None,
        });
    }
    let delta = bbm_delta(g);
    let mut y_hat: Vec<f64> = y.iter().map(|p| (1.0 - delta) * p).collect();
    y_hat[d] += delta;
    Ok(Oriented {
        profile: MixedProfile {
            x: pure_strategy(k, b),
            y: y_hat,
        },
        branch: BbmBranch::Shifted,
        g,
        b,
        d,
        delta: Some(delta),
    })
}

/// Self-play on `(R - C, C - R)` at `eps/4`, payoff estimates at `eps/4`, then
/// either keep the profile or move the row player to `b` and mix `d` into the
/// column strategy.
pub fn bbm_query_ne<O: PayoffOracle + ?Sized>(oracle: &mut O, eps: f64, seed: u64) -> Result<BbmOutcome, SolveError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SolveError::InvalidInput(format!("eps {eps} outside (0, 1)")));
    }
    let k = oracle.k();
    let start = oracle.queries();
    let quarter = eps / 4.0;

    let config = MwuConfig::new(k, quarter, mix_seed(seed, 0))?;
    let ne = mwu_zero_sum(&mut ZeroSumView::difference(&mut *oracle), &config)?.profile;
    let fallback = || ne.clone();
    let r = estimate_payoff_vector(oracle, &ne.y, Player::Row, quarter, mix_seed(seed, 1))
        .map_err(|e| e.or_best_effort(fallback))?;
    let c = estimate_payoff_vector(oracle, &ne.x, Player::Column, quarter, mix_seed(seed, 2))
        .map_err(|e| e.or_best_effort(fallback))?;

    let orientation = choose_orientation(approx_regret(&r, &ne.x), approx_regret(&c, &ne.y));
    let oriented = match orientation {
        Orientation::AsGiven => finish(oracle, &ne.x, &ne.y, &r),
        Orientation::Swapped => {
            let c_as_row = ApproxPayoffVector {
                player: Player::Row,
                ..c.clone()
            };
            finish(&mut Transposed::new(&mut *oracle), &ne.y, &ne.x, &c_as_row).map(|mut o| {
                o.profile = o.profile.transpose();
                o
            })
        }
    }
    .map_err(|e| e.or_best_effort(fallback))?;

    Ok(BbmOutcome {
        profile: oriented.profile,
        branch: oriented.branch,
        g: oriented.g,
        b: oriented.b,
        d: oriented.d,
        delta: oriented.delta,
        alpha: BBM_ALPHA,
        queries: oracle.queries() - start,
        orientation,
    })
}
