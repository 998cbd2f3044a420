//! The payoff-query interface and its counting ledger.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::game::{BimatrixGame, PayoffRange};

/// The pair `(a, b)` revealed by a query: row-player and column-player payoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueryAnswer {
    pub a: f64,
    pub b: f64,
}

impl QueryAnswer {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("query ({row}, {col}) is outside a {k}x{k} game")]
    OutOfRange { row: usize, col: usize, k: usize },
    #[error("query budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },
}

pub(crate) fn check_index(k: usize, row: usize, col: usize) -> Result<(), QueryError> {
    if row >= k || col >= k {
        return Err(QueryError::OutOfRange { row, col, k });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    answer: QueryAnswer,
    order: u64,
}

/// Every query made against one oracle. Repeated queries are counted again.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryLedger {
    k: usize,
    total: u64,
    per_row: Vec<u64>,
    per_col: Vec<u64>,
    cells: Vec<Option<Cell>>,
    distinct: usize,
}

#[derive(Serialize)]
struct LedgerRow {
    row: usize,
    col: usize,
    a: f64,
    b: f64,
    order: u64,
}

impl QueryLedger {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            total: 0,
            per_row: vec![0; k],
            per_col: vec![0; k],
            cells: vec![None; k * k],
            distinct: 0,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct cells queried at least once.
    pub fn distinct(&self) -> usize {
        self.distinct
    }

    pub fn row_count(&self, row: usize) -> u64 {
        self.per_row[row]
    }

    pub fn col_count(&self, col: usize) -> u64 {
        self.per_col[col]
    }

    pub fn per_row(&self) -> &[u64] {
        &self.per_row
    }

    pub fn per_col(&self) -> &[u64] {
        &self.per_col
    }

    pub fn answer(&self, row: usize, col: usize) -> Option<QueryAnswer> {
        self.cells[row * self.k + col].map(|c| c.answer)
    }

    /// 1-based sequence number of the first query to `(row, col)`.
    pub fn first_order(&self, row: usize, col: usize) -> Option<u64> {
        self.cells[row * self.k + col].map(|c| c.order)
    }

    /// Records one query. The first answer for a cell is the one kept.
    pub fn record(&mut self, row: usize, col: usize, answer: QueryAnswer) {
        self.total += 1;
        self.per_row[row] += 1;
        self.per_col[col] += 1;
        let cell = &mut self.cells[row * self.k + col];
        if cell.is_none() {
            *cell = Some(Cell {
                answer,
                order: self.total,
            });
            self.distinct += 1;
        }
    }

    /// Answered cells as `(row, col, answer)` in order of first query.
    pub fn answered(&self) -> Vec<(usize, usize, QueryAnswer)> {
        let mut out: Vec<(u64, usize, usize, QueryAnswer)> = self
            .cells
            .iter()
            .enumerate()
            .filter_map(|(idx, c)| c.map(|c| (c.order, idx / self.k, idx % self.k, c.answer)))
            .collect();
        out.sort_by_key(|t| t.0);
        out.into_iter().map(|(_, r, c, a)| (r, c, a)).collect()
    }

    /// Writes `row,col,a,b,order`, one line per distinct cell.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (row, col, ans) in self.answered() {
            w.serialize(LedgerRow {
                row,
                col,
                a: ans.a,
                b: ans.b,
                order: self.first_order(row, col).unwrap_or(0),
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Columns in which no recorded answer gives the column player payoff 0.
pub fn unresolved_columns(ledger: &QueryLedger) -> Vec<usize> {
    let k = ledger.k();
    (0..k)
        .filter(|&j| (0..k).all(|i| ledger.answer(i, j).is_none_or(|a| a.b != 0.0)))
        .collect()
}

/// Access to a game's payoffs one cell at a time.
pub trait PayoffOracle {
    fn k(&self) -> usize;
    fn range(&self) -> PayoffRange;
    fn query(&mut self, row: usize, col: usize) -> Result<QueryAnswer, QueryError>;
    /// Ledger of the underlying oracle. Views share it with what they wrap.
    fn ledger(&self) -> &QueryLedger;

    fn queries(&self) -> u64 {
        self.ledger().total()
    }
}

impl<O: PayoffOracle + ?Sized> PayoffOracle for &mut O {
    fn k(&self) -> usize {
        (**self).k()
    }
    fn range(&self) -> PayoffRange {
        (**self).range()
    }
    fn query(&mut self, row: usize, col: usize) -> Result<QueryAnswer, QueryError> {
        (**self).query(row, col)
    }
    fn ledger(&self) -> &QueryLedger {
        (**self).ledger()
    }
}

/// Queries every cell of row `i`, in column order.
pub fn query_row<O: PayoffOracle + ?Sized>(oracle: &mut O, i: usize) -> Result<Vec<QueryAnswer>, QueryError> {
    (0..oracle.k()).map(|j| oracle.query(i, j)).collect()
}

/// Answers from a fixed game.
#[derive(Debug, Clone)]
pub struct MatrixOracle {
    game: BimatrixGame,
    ledger: QueryLedger,
}

impl MatrixOracle {
    pub fn new(game: BimatrixGame) -> Self {
        let ledger = QueryLedger::new(game.k());
        Self { game, ledger }
    }

    pub fn game(&self) -> &BimatrixGame {
        &self.game
    }

    pub fn into_ledger(self) -> QueryLedger {
        self.ledger
    }
}

impl PayoffOracle for MatrixOracle {
    fn k(&self) -> usize {
        self.game.k()
    }

    fn range(&self) -> PayoffRange {
        self.game.range()
    }

    fn query(&mut self, row: usize, col: usize) -> Result<QueryAnswer, QueryError> {
        check_index(self.game.k(), row, col)?;
        let ans = QueryAnswer::new(self.game.row_payoff(row, col), self.game.col_payoff(row, col));
        self.ledger.record(row, col, ans);
        Ok(ans)
    }

    fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }
}

/// Caps the number of queries made through this wrapper.
#[derive(Debug)]
pub struct Budgeted<O> {
    inner: O,
    budget: u64,
    used: u64,
}

impl<O: PayoffOracle> Budgeted<O> {
    pub fn new(inner: O, budget: u64) -> Self {
        Self {
            inner,
            budget,
            used: 0,
        }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: PayoffOracle> PayoffOracle for Budgeted<O> {
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn range(&self) -> PayoffRange {
        self.inner.range()
    }

    fn query(&mut self, row: usize, col: usize) -> Result<QueryAnswer, QueryError> {
        check_index(self.k(), row, col)?;
        if self.used >= self.budget {
            return Err(QueryError::BudgetExhausted { budget: self.budget });
        }
        let ans = self.inner.query(row, col)?;
        self.used += 1;
        Ok(ans)
    }

    fn ledger(&self) -> &QueryLedger {
        self.inner.ledger()
    }
}

/// Serves `(s(R - C), -s(R - C))` from an oracle over `(R, C)`; each query here
/// costs exactly one underlying query.
#[derive(Debug)]
pub struct ZeroSumView<O> {
    inner: O,
    scale: f64,
}

impl<O: PayoffOracle> ZeroSumView<O> {
    /// `D = R - C`.
    pub fn difference(inner: O) -> Self {
        Self { inner, scale: 1.0 }
    }

    /// `D = (R - C) / 2`.
    pub fn half_difference(inner: O) -> Self {
        Self { inner, scale: 0.5 }
    }
}

impl<O: PayoffOracle> PayoffOracle for ZeroSumView<O> {
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn range(&self) -> PayoffRange {
        PayoffRange::Signed
    }

    fn query(&mut self, row: usize, col: usize) -> Result<QueryAnswer, QueryError> {
        let ans = self.inner.query(row, col)?;
        let d = self.scale * (ans.a - ans.b);
        Ok(QueryAnswer::new(d, -d))
    }

    fn ledger(&self) -> &QueryLedger {
        self.inner.ledger()
    }
}

/// The game `(C^T, R^T)`: the column player becomes the row player. The shared
/// ledger keeps the original orientation.
#[derive(Debug)]
pub struct Transposed<O> {
    inner: O,
}

impl<O: PayoffOracle> Transposed<O> {
    pub fn new(inner: O) -> Self {
        Self { inner }
    }
}

impl<O: PayoffOracle> PayoffOracle for Transposed<O> {
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn range(&self) -> PayoffRange {
        self.inner.range()
    }

    fn query(&mut self, row: usize, col: usize) -> Result<QueryAnswer, QueryError> {
        let ans = self.inner.query(col, row)?;
        Ok(QueryAnswer::new(ans.b, ans.a))
    }

    fn ledger(&self) -> &QueryLedger {
        self.inner.ledger()
    }
}
