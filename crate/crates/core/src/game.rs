//! Bimatrix games, mixed strategies and the exact regret verifier.
//!
//! Everything in this module sees full payoff matrices. Query algorithms never
//! touch it directly; it exists to generate instances and to check outputs.

use std::fmt;

use thiserror::Error;

/// Slack used for probability normalization and regret comparisons.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("game size must be positive")]
    Empty,
    #[error("expected {expected} entries, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("payoff {value} at ({row}, {col}) lies outside {range}")]
    OutOfRange {
        row: usize,
        col: usize,
        value: f64,
        range: PayoffRange,
    },
    #[error("profile has dimension {found} but the game has k = {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid mixed strategy: {0}")]
    InvalidStrategy(String),
}

/// Declared payoff interval of a game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PayoffRange {
    /// `[0, 1]`: ordinary games.
    Unit,
    /// `[-1, 1]`: derived zero-sum games.
    Signed,
}

impl PayoffRange {
    pub fn lo(self) -> f64 {
        match self {
            PayoffRange::Unit => 0.0,
            PayoffRange::Signed => -1.0,
        }
    }

    pub fn hi(self) -> f64 {
        1.0
    }

    pub fn width(self) -> f64 {
        self.hi() - self.lo()
    }

    pub fn contains(self, value: f64) -> bool {
        value >= self.lo() && value <= self.hi()
    }

    pub fn from_bounds(lo: f64, hi: f64) -> Option<Self> {
        match (lo, hi) {
            (l, h) if l == 0.0 && h == 1.0 => Some(PayoffRange::Unit),
            (l, h) if l == -1.0 && h == 1.0 => Some(PayoffRange::Signed),
            _ => None,
        }
    }
}

impl fmt::Display for PayoffRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo(), self.hi())
    }
}

/// The two players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Row,
    Column,
}

impl Player {
    pub fn other(self) -> Self {
        match self {
            Player::Row => Player::Column,
            Player::Column => Player::Row,
        }
    }
}

/// A `k x k` bimatrix game `(R, C)` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BimatrixGame {
    k: usize,
    row: Vec<f64>,
    col: Vec<f64>,
    range: PayoffRange,
}

impl BimatrixGame {
    /// Builds a game from row-major payoff vectors, rejecting entries outside `range`.
    pub fn new(k: usize, row: Vec<f64>, col: Vec<f64>, range: PayoffRange) -> Result<Self, GameError> {
        if k == 0 {
            return Err(GameError::Empty);
        }
        for m in [&row, &col] {
            if m.len() != k * k {
                return Err(GameError::Shape {
                    expected: k * k,
                    found: m.len(),
                });
            }
        }
        for (idx, &value) in row.iter().chain(col.iter()).enumerate() {
            if !range.contains(value) {
                let cell = idx % (k * k);
                return Err(GameError::OutOfRange {
                    row: cell / k,
                    col: cell % k,
                    value,
                    range,
                });
            }
        }
        Ok(Self { k, row, col, range })
    }

    pub fn from_rows(row: &[Vec<f64>], col: &[Vec<f64>], range: PayoffRange) -> Result<Self, GameError> {
        let k = row.len();
        for r in row.iter().chain(col.iter()) {
            if r.len() != k {
                return Err(GameError::Shape {
                    expected: k,
                    found: r.len(),
                });
            }
        }
        if col.len() != k {
            return Err(GameError::Shape {
                expected: k,
                found: col.len(),
            });
        }
        Self::new(k, row.concat(), col.concat(), range)
    }

    /// A game with `C = constant - R`.
    pub fn constant_sum(k: usize, row: Vec<f64>, constant: f64, range: PayoffRange) -> Result<Self, GameError> {
        let col = row.iter().map(|&a| constant - a).collect();
        Self::new(k, row, col, range)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn range(&self) -> PayoffRange {
        self.range
    }

    #[inline]
    pub fn row_payoff(&self, i: usize, j: usize) -> f64 {
        self.row[i * self.k + j]
    }

    #[inline]
    pub fn col_payoff(&self, i: usize, j: usize) -> f64 {
        self.col[i * self.k + j]
    }

    pub fn row_matrix(&self) -> &[f64] {
        &self.row
    }

    pub fn col_matrix(&self) -> &[f64] {
        &self.col
    }

    pub fn is_zero_one(&self) -> bool {
        self.row
            .iter()
            .chain(self.col.iter())
            .all(|&v| v == 0.0 || v == 1.0)
    }

    /// Returns the constant `c` if `R + C = c` entrywise (within tolerance).
    pub fn constant_sum_value(&self) -> Option<f64> {
        let c = self.row[0] + self.col[0];
        self.row
            .iter()
            .zip(&self.col)
            .all(|(a, b)| (a + b - c).abs() <= TOLERANCE)
            .then_some(c)
    }

    pub fn is_zero_sum(&self) -> bool {
        self.constant_sum_value().is_some_and(|c| c.abs() <= TOLERANCE)
    }

    /// `R y`: the row player's payoff for each pure row against `y`.
    pub fn row_payoffs(&self, y: &[f64]) -> Vec<f64> {
        self.row
            .chunks_exact(self.k)
            .map(|r| r.iter().zip(y).map(|(a, p)| a * p).sum())
            .collect()
    }

    /// `x C`: the column player's payoff for each pure column against `x`.
    pub fn col_payoffs(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.k];
        for (p, r) in x.iter().zip(self.col.chunks_exact(self.k)) {
            if *p == 0.0 {
                continue;
            }
            for (o, b) in out.iter_mut().zip(r) {
                *o += p * b;
            }
        }
        out
    }

    /// Expected payoffs `(x R y, x C y)`.
    pub fn expected_payoffs(&self, profile: &MixedProfile) -> (f64, f64) {
        let ry = self.row_payoffs(&profile.y);
        let xc = self.col_payoffs(&profile.x);
        (dot(&profile.x, &ry), dot(&xc, &profile.y))
    }

    /// The transposed game: the column player becomes the row player.
    pub fn transpose(&self) -> Self {
        let k = self.k;
        let mut row = vec![0.0; k * k];
        let mut col = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                row[j * k + i] = self.col[i * k + j];
                col[j * k + i] = self.row[i * k + j];
            }
        }
        Self {
            k,
            row,
            col,
            range: self.range,
        }
    }
}

/// The zero-sum game `(R - C, C - R)` on `[-1, 1]`.
pub fn derived_zero_sum(game: &BimatrixGame) -> BimatrixGame {
    let d: Vec<f64> = game.row.iter().zip(&game.col).map(|(a, b)| a - b).collect();
    let neg = d.iter().map(|v| -v).collect();
    BimatrixGame {
        k: game.k,
        row: d,
        col: neg,
        range: PayoffRange::Signed,
    }
}

/// `D = (R - C) / 2` and `X = -(R + C) / 2`, row-major. Satisfies `D = R + X`.
pub fn derived_d_x(game: &BimatrixGame) -> (Vec<f64>, Vec<f64>) {
    let d = game.row.iter().zip(&game.col).map(|(a, b)| 0.5 * (a - b)).collect();
    let x = game.row.iter().zip(&game.col).map(|(a, b)| -0.5 * (a + b)).collect();
    (d, x)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Lowest index attaining the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn validate_strategy(p: &[f64]) -> Result<(), GameError> {
    if p.is_empty() {
        return Err(GameError::InvalidStrategy("empty vector".into()));
    }
    if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(GameError::InvalidStrategy(format!("entry {v} is not a probability")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > TOLERANCE {
        return Err(GameError::InvalidStrategy(format!("entries sum to {total}")));
    }
    Ok(())
}

pub fn uniform_strategy(k: usize) -> Vec<f64> {
    vec![1.0 / k as f64; k]
}

pub fn pure_strategy(k: usize, i: usize) -> Vec<f64> {
    let mut p = vec![0.0; k];
    p[i] = 1.0;
    p
}

/// A pair of mixed strategies `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedProfile {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl MixedProfile {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, GameError> {
        validate_strategy(&x)?;
        validate_strategy(&y)?;
        if x.len() != y.len() {
            return Err(GameError::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            x: uniform_strategy(k),
            y: uniform_strategy(k),
        }
    }

    pub fn pure(k: usize, i: usize, j: usize) -> Self {
        Self {
            x: pure_strategy(k, i),
            y: pure_strategy(k, j),
        }
    }

    pub fn k(&self) -> usize {
        self.x.len()
    }

    pub fn strategy(&self, player: Player) -> &[f64] {
        match player {
            Player::Row => &self.x,
            Player::Column => &self.y,
        }
    }

    pub fn row_support(&self) -> Vec<usize> {
        support(&self.x)
    }

    pub fn col_support(&self) -> Vec<usize> {
        support(&self.y)
    }

    /// Swaps the two players' strategies.
    pub fn transpose(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

pub fn support(p: &[f64]) -> Vec<usize> {
    p.iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Exact regrets and well-supported violations of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretReport {
    pub row_regret: f64,
    pub col_regret: f64,
    pub row_best_response_payoff: f64,
    pub col_best_response_payoff: f64,
    pub row_wsne_violation: f64,
    pub col_wsne_violation: f64,
}

impl RegretReport {
    pub fn max_regret(&self) -> f64 {
        self.row_regret.max(self.col_regret)
    }

    pub fn max_wsne_violation(&self) -> f64 {
        self.row_wsne_violation.max(self.col_wsne_violation)
    }
}

impl fmt::Display for RegretReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "row_regret {}", self.row_regret)?;
        writeln!(f, "col_regret {}", self.col_regret)?;
        writeln!(f, "row_best_response_payoff {}", self.row_best_response_payoff)?;
        writeln!(f, "col_best_response_payoff {}", self.col_best_response_payoff)?;
        writeln!(f, "row_wsne_violation {}", self.row_wsne_violation)?;
        write!(f, "col_wsne_violation {}", self.col_wsne_violation)
    }
}

fn check_dims(game: &BimatrixGame, profile: &MixedProfile) -> Result<(), GameError> {
    for len in [profile.x.len(), profile.y.len()] {
        if len != game.k {
            return Err(GameError::DimensionMismatch {
                expected: game.k,
                found: len,
            });
        }
    }
    Ok(())
}

/// One player's side of the report: (regret, best-response payoff, WSNE violation).
fn side(payoffs: &[f64], own: &[f64]) -> (f64, f64, f64) {
    let best = payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let achieved = dot(own, payoffs);
    let violation = own
        .iter()
        .zip(payoffs)
        .filter(|(p, _)| **p > 0.0)
        .map(|(_, v)| best - v)
        .fold(0.0, f64::max);
    ((best - achieved).max(0.0), best, violation)
}

pub fn exact_regret(game: &BimatrixGame, profile: &MixedProfile) -> Result<RegretReport, GameError> {
    check_dims(game, profile)?;
    let (row_regret, row_best, row_violation) = side(&game.row_payoffs(&profile.y), &profile.x);
    let (col_regret, col_best, col_violation) = side(&game.col_payoffs(&profile.x), &profile.y);
    Ok(RegretReport {
        row_regret,
        col_regret,
        row_best_response_payoff: row_best,
        col_best_response_payoff: col_best,
        row_wsne_violation: row_violation,
        col_wsne_violation: col_violation,
    })
}

pub fn is_eps_ne(game: &BimatrixGame, profile: &MixedProfile, eps: f64) -> Result<bool, GameError> {
    Ok(exact_regret(game, profile)?.max_regret() <= eps + TOLERANCE)
}

pub fn is_eps_wsne(game: &BimatrixGame, profile: &MixedProfile, eps: f64) -> Result<bool, GameError> {
    Ok(exact_regret(game, profile)?.max_wsne_violation() <= eps + TOLERANCE)
}
