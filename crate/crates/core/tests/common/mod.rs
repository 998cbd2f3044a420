//! Test-side reference computations, written independently of the library.
#![allow(dead_code)]

use querynash::BimatrixGame;

pub fn matrices(game: &BimatrixGame) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let k = game.k();
    let r = (0..k).map(|i| (0..k).map(|j| game.row_payoff(i, j)).collect()).collect();
    let c = (0..k).map(|i| (0..k).map(|j| game.col_payoff(i, j)).collect()).collect();
    (r, c)
}

/// `R y`.
pub fn row_values(r: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    r.iter().map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum()).collect()
}

/// `x C`.
pub fn col_values(c: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let k = x.len();
    (0..k).map(|j| (0..k).map(|i| x[i] * c[i][j]).sum()).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct Reference {
    pub row_regret: f64,
    pub col_regret: f64,
    pub row_violation: f64,
    pub col_violation: f64,
}

impl Reference {
    pub fn regret(&self) -> f64 {
        self.row_regret.max(self.col_regret)
    }

    pub fn violation(&self) -> f64 {
        self.row_violation.max(self.col_violation)
    }
}

fn one_side(values: &[f64], own: &[f64]) -> (f64, f64) {
    let mut best = values[0];
    for &v in values {
        if v > best {
            best = v;
        }
    }
    let mut achieved = 0.0;
    let mut violation: f64 = 0.0;
    for (p, v) in own.iter().zip(values) {
        achieved += p * v;
        if *p > 0.0 {
            violation = violation.max(best - v);
        }
    }
    (best - achieved, violation)
}

pub fn reference_regret(game: &BimatrixGame, x: &[f64], y: &[f64]) -> Reference {
    let (r, c) = matrices(game);
    let (row_regret, row_violation) = one_side(&row_values(&r, y), x);
    let (col_regret, col_violation) = one_side(&col_values(&c, x), y);
    Reference {
        row_regret,
        col_regret,
        row_violation,
        col_violation,
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}
