//! Adversaries and hard instances, each with the check that refutes a claimed
//! equilibrium.

use rand::Rng;
use thiserror::Error;

use crate::game::{exact_regret, is_eps_ne, support, BimatrixGame, GameError, MixedProfile, PayoffRange};
use crate::oracle::{check_index, unresolved_columns, PayoffOracle, QueryAnswer, QueryError, QueryLedger};
use crate::rng::seeded_rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LowerBoundError {
    #[error("no column has y_c < 2/k and fewer than eps*k queries")]
    NoCandidateColumn,
    #[error("ledger answer at ({row}, {col}) is not (0, 0)")]
    NonZeroAnswer { row: usize, col: usize },
    #[error("y_c = {y_c} <= 1/2 but the profile has regret {regret} <= {bound}")]
    Discrepancy { y_c: f64, regret: f64, bound: f64 },
    #[error("k = {0} is too small")]
    TooSmall(usize),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// `eps` as an exact fraction, so that `count < eps * k` has no rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpsRatio {
    pub num: u64,
    pub den: u64,
}

impl EpsRatio {
    pub const DEFAULT_DENOMINATOR: u64 = 1_000_000;

    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "denominator must be positive");
        Self { num, den }
    }

    pub fn from_f64(eps: f64) -> Self {
        let den = Self::DEFAULT_DENOMINATOR;
        Self {
            num: (eps * den as f64).round() as u64,
            den,
        }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `count < eps * k`.
    pub fn below(self, count: u64, k: usize) -> bool {
        (count as u128) * (self.den as u128) < (self.num as u128) * (k as u128)
    }

    /// `ceil(eps * k)`: how many `(0, 1)` answers a column can receive.
    pub fn ceil_times(self, k: usize) -> u64 {
        ((self.num as u128 * k as u128).div_ceil(self.den as u128)) as u64
    }
}

/// Answer of the deterministic adversary given the column's count before
/// this query.
pub fn det_adversary_answer(column_count: u64, k: usize, eps: EpsRatio) -> QueryAnswer {
    if eps.below(column_count, k) {
        QueryAnswer::new(0.0, 1.0)
    } else {
        QueryAnswer::new(1.0, 0.0)
    }
}

/// Answers `(0, 1)` while a column has seen fewer than `eps * k` queries and
/// `(1, 0)` afterwards. Its ledger is the partial game. A repeated query gets
/// the answer already given for that cell.
#[derive(Debug, Clone)]
pub struct DetAdversaryOracle {
    eps: EpsRatio,
    ledger: QueryLedger,
}

impl DetAdversaryOracle {
    pub fn new(k: usize, eps: EpsRatio) -> Self {
        Self {
            eps,
            ledger: QueryLedger::new(k),
        }
    }

    pub fn eps(&self) -> EpsRatio {
        self.eps
    }
}

impl PayoffOracle for DetAdversaryOracle {
    fn k(&self) -> usize {
        self.ledger.k()
    }

    fn range(&self) -> PayoffRange {
        PayoffRange::Unit
    }

    fn query(&mut self, row: usize, col: usize) -> Result<QueryAnswer, QueryError> {
        let k = self.ledger.k();
        check_index(k, row, col)?;
        let ans = self
            .ledger
            .answer(row, col)
            .unwrap_or_else(|| det_adversary_answer(self.ledger.col_count(col), k, self.eps));
        self.ledger.record(row, col, ans);
        Ok(ans)
    }

    fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub game: BimatrixGame,
    pub hidden: usize,
}

/// Fills in the partial game: the lowest column with `y_c < 2/k` and fewer
/// than `eps * k` queries becomes all `(0, 1)`, every other unqueried cell
/// becomes `(1, 0)`.
pub fn det_adversary_complete(
    ledger: &QueryLedger,
    claimed: &MixedProfile,
    eps: EpsRatio,
) -> Result<Completion, LowerBoundError> {
    let k = ledger.k();
    if claimed.k() != k {
        return Err(GameError::DimensionMismatch {
            expected: k,
            found: claimed.k(),
        }
        .into());
    }
    let hidden = (0..k)
        .find(|&c| claimed.y[c] < 2.0 / k as f64 && eps.below(ledger.col_count(c), k))
        .ok_or(LowerBoundError::NoCandidateColumn)?;
    let mut row = vec![1.0; k * k];
    for i in 0..k {
        for j in 0..k {
            if j == hidden {
                row[i * k + j] = 0.0;
            } else if let Some(ans) = ledger.answer(i, j) {
                row[i * k + j] = ans.a;
            }
        }
    }
    let game = BimatrixGame::constant_sum(k, row, 1.0, PayoffRange::Unit)?;
    Ok(Completion { game, hidden })
}

/// Whether `game` reproduces every answer in `ledger`.
pub fn consistent_with(game: &BimatrixGame, ledger: &QueryLedger) -> bool {
    ledger
        .answered()
        .iter()
        .all(|&(i, j, a)| game.row_payoff(i, j) == a.a && game.col_payoff(i, j) == a.b)
}

/// Quantities from the uniform-row argument on a completion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformRowCheck {
    /// Column-player payoff of uniform `x` against the claimed `y`.
    pub column_payoff: f64,
    /// `ceil(eps k)/k + 2/k`.
    pub column_bound: f64,
    pub row_best_response: f64,
    /// `1 - ceil(eps k)/k - 2/k`.
    pub row_bound: f64,
}

impl UniformRowCheck {
    pub fn holds(&self) -> bool {
        self.column_payoff <= self.column_bound + 1e-9 && self.row_best_response >= self.row_bound - 1e-9
    }
}

/// Against the claimed `y`, uniform `x` earns the column player at most
/// `ceil(eps k)/k + 2/k`, so the row player can secure the rest.
pub fn uniform_row_check(completion: &Completion, claimed: &MixedProfile, eps: EpsRatio) -> UniformRowCheck {
    let game = &completion.game;
    let k = game.k();
    let uniform = MixedProfile {
        x: vec![1.0 / k as f64; k],
        y: claimed.y.clone(),
    };
    let (_, column_payoff) = game.expected_payoffs(&uniform);
    let slack = (eps.ceil_times(k) as f64 + 2.0) / k as f64;
    let row_best_response = game.row_payoffs(&claimed.y).into_iter().fold(f64::NEG_INFINITY, f64::max);
    UniformRowCheck {
        column_payoff,
        column_bound: slack,
        row_best_response,
        row_bound: 1.0 - slack,
    }
}

/// A draw from the hidden-column distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenColumnInstance {
    pub k: usize,
    pub c: usize,
    /// `r[j]` is the row where column `j` pays the column player 0; unused at `c`.
    pub r: Vec<usize>,
    pub game: BimatrixGame,
}

impl HiddenColumnInstance {
    pub fn from_parts(k: usize, c: usize, r: Vec<usize>) -> Result<Self, LowerBoundError> {
        if k < 2 {
            return Err(LowerBoundError::TooSmall(k));
        }
        if c >= k || r.len() != k || r.iter().any(|&i| i >= k) {
            return Err(GameError::InvalidStrategy("hidden column instance indices out of range".into()).into());
        }
        let mut col = vec![1.0; k * k];
        for (j, &rj) in r.iter().enumerate() {
            if j != c {
                col[rj * k + j] = 0.0;
            }
        }
        let row = col.iter().map(|v| 1.0 - v).collect();
        let game = BimatrixGame::new(k, row, col, PayoffRange::Unit)?;
        Ok(Self { k, c, r, game })
    }
}

pub fn gk_sample(k: usize, seed: u64) -> Result<HiddenColumnInstance, LowerBoundError> {
    if k < 2 {
        return Err(LowerBoundError::TooSmall(k));
    }
    let mut rng = seeded_rng(seed);
    let c = rng.random_range(0..k);
    let r = (0..k).map(|_| rng.random_range(0..k)).collect();
    HiddenColumnInstance::from_parts(k, c, r)
}

/// True when `y_c <= 1/2`, which rules out a `1/(6k)`-NE. The regret is also
/// computed exactly; if it disagrees the result is an error.
pub fn halfgame_refute(instance: &HiddenColumnInstance, profile: &MixedProfile) -> Result<bool, LowerBoundError> {
    let bound = 1.0 / (6.0 * instance.k as f64);
    let y_c = *profile.y.get(instance.c).ok_or(GameError::DimensionMismatch {
        expected: instance.k,
        found: profile.k(),
    })?;
    let is_near_ne = is_eps_ne(&instance.game, profile, bound)?;
    if y_c <= 0.5 && is_near_ne {
        let regret = exact_regret(&instance.game, profile)?.max_regret();
        return Err(LowerBoundError::Discrepancy { y_c, regret, bound });
    }
    Ok(y_c <= 0.5)
}

/// Answers `(0, 0)` to every query.
#[derive(Debug, Clone)]
pub struct ZeroAdversaryOracle {
    ledger: QueryLedger,
}

impl ZeroAdversaryOracle {
    pub fn new(k: usize) -> Self {
        Self {
            ledger: QueryLedger::new(k),
        }
    }
}

impl PayoffOracle for ZeroAdversaryOracle {
    fn k(&self) -> usize {
        self.ledger.k()
    }

    fn range(&self) -> PayoffRange {
        PayoffRange::Unit
    }

    fn query(&mut self, row: usize, col: usize) -> Result<QueryAnswer, QueryError> {
        check_index(self.ledger.k(), row, col)?;
        let ans = QueryAnswer::new(0.0, 0.0);
        self.ledger.record(row, col, ans);
        Ok(ans)
    }

    fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }
}

/// A game consistent with an all-zeros ledger on which the claimed profile
/// is not an `eps`-WSNE.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroWitness {
    pub game: BimatrixGame,
    pub row: usize,
    /// Probability `y` puts on columns never queried in `row`.
    pub unqueried_mass: f64,
}

/// Looks for a row `r`, not the whole support of `x`, whose unqueried columns
/// carry more than `eps` of `y`. Row `r` then pays 1 on those columns in the
/// witness and 0 elsewhere.
pub fn zero_adversary_refute(
    ledger: &QueryLedger,
    profile: &MixedProfile,
    eps: f64,
) -> Result<Option<ZeroWitness>, LowerBoundError> {
    let k = ledger.k();
    if profile.k() != k {
        return Err(GameError::DimensionMismatch {
            expected: k,
            found: profile.k(),
        }
        .into());
    }
    if let Some(&(row, col, _)) = ledger.answered().iter().find(|(_, _, a)| a.a != 0.0 || a.b != 0.0) {
        return Err(LowerBoundError::NonZeroAnswer { row, col });
    }
    let supp = support(&profile.x);
    for r in 0..k {
        if !supp.iter().any(|&s| s != r) {
            continue;
        }
        let unqueried: Vec<usize> = (0..k).filter(|&j| ledger.answer(r, j).is_none()).collect();
        let mass: f64 = unqueried.iter().map(|&j| profile.y[j]).sum();
        if mass > eps {
            let mut row = vec![0.0; k * k];
            for &j in &unqueried {
                row[r * k + j] = 1.0;
            }
            let game = BimatrixGame::new(k, row, vec![0.0; k * k], PayoffRange::Unit)?;
            return Ok(Some(ZeroWitness {
                game,
                row: r,
                unqueried_mass: mass,
            }));
        }
    }
    Ok(None)
}

/// Queries uniformly random cells until `max_queries` are spent or the budget
/// runs out, then plays uniform rows against uniform columns among those not
/// yet known to contain a zero for the column player.
pub fn uniform_sampler<O: PayoffOracle + ?Sized>(oracle: &mut O, max_queries: u64, seed: u64) -> MixedProfile {
    let k = oracle.k();
    let mut rng = seeded_rng(seed);
    for _ in 0..max_queries {
        let cell = rng.random_range(0..k * k);
        if oracle.query(cell / k, cell % k).is_err() {
            break;
        }
    }
    let open = unresolved_columns(oracle.ledger());
    let mut y = vec![0.0; k];
    if open.is_empty() {
        y.iter_mut().for_each(|p| *p = 1.0 / k as f64);
    } else {
        for &j in &open {
            y[j] = 1.0 / open.len() as f64;
        }
    }
    MixedProfile {
        x: vec![1.0 / k as f64; k],
        y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::is_eps_wsne;
    use crate::oracle::Budgeted;

    #[test]
    fn det_rules() {
        let eps = EpsRatio::from_f64(0.3);
        let mut o = DetAdversaryOracle::new(10, eps);
        assert_eq!(o.query(0, 4).unwrap(), QueryAnswer::new(0.0, 1.0));
        o.query(1, 4).unwrap();
        o.query(2, 4).unwrap();
        assert_eq!(o.query(3, 4).unwrap(), QueryAnswer::new(1.0, 0.0));
        assert_eq!(o.query(0, 4).unwrap(), QueryAnswer::new(0.0, 1.0));
    }

    #[test]
    fn det_full_scan_unrolls_the_rule() {
        let k = 7;
        let eps = EpsRatio::from_f64(0.3);
        let mut o = DetAdversaryOracle::new(k, eps);
        for i in 0..k {
            for j in 0..k {
                let a = o.query(i, j).unwrap();
                let expected = if (i as u64) < eps.ceil_times(k) { 0.0 } else { 1.0 };
                assert_eq!(a.a, expected);
            }
        }
        assert_eq!(eps.ceil_times(k), 3);
    }

    #[test]
    fn exact_threshold_at_integer_eps_k() {
        let eps = EpsRatio::new(1, 4);
        assert!(eps.below(15, 64));
        assert!(!eps.below(16, 64));
        assert_eq!(eps.ceil_times(64), 16);
        assert_eq!(EpsRatio::from_f64(0.25), EpsRatio::new(250_000, 1_000_000));
    }

    #[test]
    fn completion_without_queries() {
        let ledger = QueryLedger::new(8);
        let done = det_adversary_complete(&ledger, &MixedProfile::uniform(8), EpsRatio::from_f64(0.5)).unwrap();
        assert_eq!(done.hidden, 0);
        assert!(done.game.is_zero_one());
        assert_eq!(done.game.constant_sum_value(), Some(1.0));
        let report = exact_regret(&done.game, &MixedProfile::uniform(8)).unwrap();
        assert_eq!(report.col_best_response_payoff, 1.0);
    }

    #[test]
    fn completion_refutes_after_few_queries() {
        let k = 16;
        let eps = EpsRatio::from_f64(0.25);
        let mut o = Budgeted::new(DetAdversaryOracle::new(k, eps), 31);
        for q in 0..31 {
            o.query(q % k, (q * 5) % k).unwrap();
        }
        let claim = MixedProfile::uniform(k);
        let done = det_adversary_complete(o.ledger(), &claim, eps).unwrap();
        assert!(consistent_with(&done.game, o.ledger()));
        assert!(uniform_row_check(&done, &claim, eps).holds());
        assert!(!is_eps_ne(&done.game, &claim, 0.5 - 0.25).unwrap());
    }

    #[test]
    fn completion_needs_a_candidate() {
        let eps = EpsRatio::from_f64(0.5);
        let mut o = DetAdversaryOracle::new(4, eps);
        for j in 1..4 {
            o.query(0, j).unwrap();
            o.query(1, j).unwrap();
        }
        let claim = MixedProfile::new(vec![0.25; 4], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            det_adversary_complete(o.ledger(), &claim, eps),
            Err(LowerBoundError::NoCandidateColumn)
        );
    }

    #[test]
    fn gk_structure() {
        for seed in 0..20 {
            let inst = gk_sample(6, seed).unwrap();
            let g = &inst.game;
            assert_eq!(g.constant_sum_value(), Some(1.0));
            assert!(g.is_zero_one());
            for j in 0..6 {
                let zeros = (0..6).filter(|&i| g.col_payoff(i, j) == 0.0).count();
                assert_eq!(zeros, if j == inst.c { 0 } else { 1 });
            }
        }
    }

    #[test]
    fn halfgame_examples() {
        let inst = gk_sample(5, 3).unwrap();
        let on_c = MixedProfile::pure(5, 0, inst.c);
        assert!(!halfgame_refute(&inst, &on_c).unwrap());
        assert!(halfgame_refute(&inst, &MixedProfile::uniform(5)).unwrap());
    }

    #[test]
    fn zero_witness_with_no_queries() {
        let ledger = QueryLedger::new(4);
        let p = MixedProfile::uniform(4);
        let w = zero_adversary_refute(&ledger, &p, 0.9).unwrap().unwrap();
        assert!(!is_eps_wsne(&w.game, &p, 0.9).unwrap());
    }

    #[test]
    fn no_zero_witness_after_full_scan() {
        let mut o = ZeroAdversaryOracle::new(3);
        for i in 0..3 {
            for j in 0..3 {
                o.query(i, j).unwrap();
            }
        }
        assert_eq!(zero_adversary_refute(o.ledger(), &MixedProfile::uniform(3), 0.5).unwrap(), None);
    }

    #[test]
    fn zero_refute_rejects_other_adversaries() {
        let mut o = DetAdversaryOracle::new(3, EpsRatio::from_f64(0.5));
        o.query(0, 0).unwrap();
        assert_eq!(
            zero_adversary_refute(o.ledger(), &MixedProfile::uniform(3), 0.5),
            Err(LowerBoundError::NonZeroAnswer { row: 0, col: 0 })
        );
    }

    #[test]
    fn sampler_respects_budget() {
        let inst = gk_sample(8, 1).unwrap();
        let mut o = Budgeted::new(crate::oracle::MatrixOracle::new(inst.game.clone()), 5);
        let p = uniform_sampler(&mut o, 100, 2);
        assert_eq!(o.queries(), 5);
        assert!(p.y[inst.c] > 0.0);
    }
}
