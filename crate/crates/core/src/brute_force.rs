//! Support enumeration for small games.
//!
//! Used as an independent oracle when checking the query algorithms; it reads
//! the full matrices and is exponential in `k`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::game::{exact_regret, BimatrixGame, MixedProfile};

pub const MAX_K: usize = 6;

/// Regret allowed on enumerated solutions; linear solves accumulate error.
pub const BRUTE_FORCE_TOLERANCE: f64 = 1e-6;

/// Indifference systems whose condition number exceeds this are skipped.
const CONDITION_LIMIT: f64 = 1e12;
const FEASIBILITY_SLACK: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BruteForceError {
    #[error("support enumeration is limited to k <= {MAX_K}, got {0}")]
    TooLarge(usize),
    #[error("no nondegenerate support pair yielded an equilibrium")]
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceSolution {
    pub profile: MixedProfile,
    /// `x R y` at the equilibrium.
    pub row_payoff: f64,
    /// `x C y` at the equilibrium.
    pub col_payoff: f64,
}

impl BruteForceSolution {
    /// Value of the game to the row player; meaningful for zero-sum games.
    pub fn value(&self) -> f64 {
        self.row_payoff
    }
}

fn subsets(k: usize, size: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..(1 << k))
        .filter(move |m| m.count_ones() as usize == size)
        .map(move |m| (0..k).filter(|i| m & (1 << i) != 0).collect())
}

/// Solves `A_{S,T} p = v 1, sum p = 1` for `p` supported on `T`.
///
/// `payoff(s, t)` is the payoff of the indifferent player's strategy `s`
/// when the other player plays `t`.
fn indifference(
    own: &[usize],
    other: &[usize],
    payoff: impl Fn(usize, usize) -> f64,
) -> Option<Vec<f64>> {
    let n = own.len();
    let mut m = DMatrix::<f64>::zeros(n + 1, n + 1);
    let mut rhs = DVector::<f64>::zeros(n + 1);
    for (r, &s) in own.iter().enumerate() {
        for (c, &t) in other.iter().enumerate() {
            m[(r, c)] = payoff(s, t);
        }
        m[(r, n)] = -1.0;
    }
    for c in 0..n {
        m[(n, c)] = 1.0;
    }
    rhs[n] = 1.0;

    let sv = m.clone().singular_values();
    let (hi, lo) = (sv.max(), sv.min());
    if lo <= 0.0 || hi / lo > CONDITION_LIMIT {
        return None;
    }
    let sol = m.lu().solve(&rhs)?;
    Some(sol.iter().take(n).copied().collect())
}

fn embed(k: usize, support: &[usize], weights: &[f64]) -> Option<Vec<f64>> {
    if weights.iter().any(|w| *w < -FEASIBILITY_SLACK) {
        return None;
    }
    let mut p = vec![0.0; k];
    for (&i, &w) in support.iter().zip(weights) {
        p[i] = w.max(0.0);
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    Some(p)
}

/// Finds an exact Nash equilibrium by enumerating equal-size support pairs.
///
/// Pure profiles are tried first so that degenerate games with a pure
/// equilibrium are still handled.
pub fn brute_force_equilibrium(game: &BimatrixGame) -> Result<BruteForceSolution, BruteForceError> {
    let k = game.k();
    if k > MAX_K {
        return Err(BruteForceError::TooLarge(k));
    }
    let accept = |profile: MixedProfile| -> Option<BruteForceSolution> {
        let report = exact_regret(game, &profile).ok()?;
        if report.max_regret() > BRUTE_FORCE_TOLERANCE {
            return None;
        }
        let (row_payoff, col_payoff) = game.expected_payoffs(&profile);
        Some(BruteForceSolution {
            profile,
            row_payoff,
            col_payoff,
        })
    };

    for i in 0..k {
        for j in 0..k {
            if let Some(sol) = accept(MixedProfile::pure(k, i, j)) {
                return Ok(sol);
            }
        }
    }

    for size in 2..=k {
        for rows in subsets(k, size) {
            for cols in subsets(k, size) {
                // y makes every row in `rows` indifferent; x does the same for `cols`.
                let Some(yw) = indifference(&rows, &cols, |i, j| game.row_payoff(i, j)) else {
                    continue;
                };
                let Some(xw) = indifference(&cols, &rows, |j, i| game.col_payoff(i, j)) else {
                    continue;
                };
                let (Some(y), Some(x)) = (embed(k, &cols, &yw), embed(k, &rows, &xw)) else {
                    continue;
                };
                if let Some(sol) = accept(MixedProfile { x, y }) {
                    return Ok(sol);
                }
            }
        }
    }
    Err(BruteForceError::Degenerate)
}
