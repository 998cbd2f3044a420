//! Experiment driver: game generation, seeded trials, verification and CSV.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::approx::{bbm_query_ne, ks_query_wsne, KsMode, BBM_ALPHA};
use crate::error::SolveError;
use crate::game::{derived_zero_sum, exact_regret, is_eps_ne, is_eps_wsne, BimatrixGame, MixedProfile, PayoffRange, RegretReport};
use crate::io::{read_game, FormatError, GameFile};
use crate::lower_bounds::{
    consistent_with, det_adversary_complete, gk_sample, halfgame_refute, uniform_row_check, uniform_sampler,
    zero_adversary_refute, DetAdversaryOracle, EpsRatio, LowerBoundError, ZeroAdversaryOracle,
};
use crate::oracle::{Budgeted, MatrixOracle, PayoffOracle, QueryLedger, ZeroSumView};
use crate::rng::{mix_seed, seeded_rng};
use crate::zerosum::{mwu_zero_sum, zerosum_wsne, MwuConfig};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    LowerBound(#[from] LowerBoundError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::InvalidSpec(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Mwu,
    ZeroSumWsne,
    Bbm,
    Ks,
    Ks01,
    UniformSampler,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Mwu,
        Algorithm::ZeroSumWsne,
        Algorithm::Bbm,
        Algorithm::Ks,
        Algorithm::Ks01,
        Algorithm::UniformSampler,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Mwu => "mwu",
            Algorithm::ZeroSumWsne => "zerosum-wsne",
            Algorithm::Bbm => "bbm",
            Algorithm::Ks => "ks",
            Algorithm::Ks01 => "ks01",
            Algorithm::UniformSampler => "uniform-sampler",
        }
    }

    /// What the algorithm promises about its output at accuracy `eps`.
    pub fn claim(self, eps: f64) -> Claim {
        match self {
            Algorithm::Mwu | Algorithm::UniformSampler => Claim::ne(eps),
            Algorithm::ZeroSumWsne => Claim::wsne(eps),
            Algorithm::Bbm => Claim::ne(BBM_ALPHA + eps),
            Algorithm::Ks => Claim::wsne(KsMode::General.guarantee(eps)),
            Algorithm::Ks01 => Claim::wsne(KsMode::ZeroOne.guarantee(eps)),
        }
    }

    pub fn check_eps(self, eps: f64) -> Result<(), HarnessError> {
        let ok = match self {
            Algorithm::Bbm | Algorithm::Ks | Algorithm::Ks01 => eps > 0.0 && eps < 1.0,
            _ => eps > 0.0 && eps <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("eps {eps} is out of range for {self}")))
        }
    }

    /// The game in which the claim is checked. The zero-sum solvers run on
    /// `(R - C, C - R)` when handed a `[0, 1]` game.
    pub fn verification_game(self, game: &BimatrixGame) -> BimatrixGame {
        match self {
            Algorithm::Mwu | Algorithm::ZeroSumWsne if game.range() == PayoffRange::Unit => derived_zero_sum(game),
            _ => game.clone(),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| invalid(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimKind {
    Ne,
    Wsne,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Claim {
    pub kind: ClaimKind,
    pub bound: f64,
}

impl Claim {
    pub fn ne(bound: f64) -> Self {
        Self {
            kind: ClaimKind::Ne,
            bound,
        }
    }

    pub fn wsne(bound: f64) -> Self {
        Self {
            kind: ClaimKind::Wsne,
            bound,
        }
    }

    pub fn holds(&self, game: &BimatrixGame, profile: &MixedProfile) -> bool {
        match self.kind {
            ClaimKind::Ne => is_eps_ne(game, profile, self.bound),
            ClaimKind::Wsne => is_eps_wsne(game, profile, self.bound),
        }
        .unwrap_or(false)
    }

    /// The report field the claim bounds.
    pub fn measure(&self, report: &RegretReport) -> f64 {
        match self.kind {
            ClaimKind::Ne => report.max_regret(),
            ClaimKind::Wsne => report.max_wsne_violation(),
        }
    }
}

/// Output of one algorithm run, successful or not.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmRun {
    /// The output, or the best-effort profile when the budget ran out.
    pub profile: Option<MixedProfile>,
    pub branch: String,
    pub error: Option<SolveError>,
}

fn error_branch(e: &SolveError) -> &'static str {
    match e {
        SolveError::BudgetExhausted { .. } => "budget-exhausted",
        SolveError::PreconditionViolated { .. } => "precondition-violated",
        SolveError::HypothesisViolated { .. } => "hypothesis-violated",
        SolveError::InvalidInput(_) => "invalid-input",
        SolveError::Query(_) => "query-error",
    }
}

fn finish_run(result: Result<(MixedProfile, &'static str), SolveError>) -> AlgorithmRun {
    match result {
        Ok((profile, branch)) => AlgorithmRun {
            profile: Some(profile),
            branch: branch.to_string(),
            error: None,
        },
        Err(e) => AlgorithmRun {
            profile: e.best_effort().cloned(),
            branch: error_branch(&e).to_string(),
            error: Some(e),
        },
    }
}

/// Runs `algorithm` against `oracle`. `sampler_queries` is how many queries the
/// uniform sampler spends.
pub fn run_algorithm<O: PayoffOracle>(
    algorithm: Algorithm,
    oracle: &mut O,
    eps: f64,
    seed: u64,
    sampler_queries: u64,
) -> AlgorithmRun {
    let k = oracle.k();
    let signed = oracle.range() == PayoffRange::Signed;
    let result = match algorithm {
        Algorithm::Mwu => MwuConfig::new(k, eps, seed).and_then(|config| {
            let out = if signed {
                mwu_zero_sum(oracle, &config)
            } else {
                mwu_zero_sum(&mut ZeroSumView::difference(&mut *oracle), &config)
            };
            out.map(|o| (o.profile, "mixed"))
        }),
        Algorithm::ZeroSumWsne => {
            let out = if signed {
                zerosum_wsne(oracle, eps, seed)
            } else {
                zerosum_wsne(&mut ZeroSumView::difference(&mut *oracle), eps, seed)
            };
            out.map(|o| (o.profile, "mixed"))
        }
        Algorithm::Bbm => bbm_query_ne(oracle, eps, seed).map(|o| (o.profile, o.branch.as_str())),
        Algorithm::Ks => ks_query_wsne(oracle, eps, seed, KsMode::General).map(|o| (o.profile, o.branch.as_str())),
        Algorithm::Ks01 => ks_query_wsne(oracle, eps, seed, KsMode::ZeroOne).map(|o| (o.profile, o.branch.as_str())),
        Algorithm::UniformSampler => Ok((uniform_sampler(oracle, sampler_queries, seed), "sampled")),
    };
    finish_run(result)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generator {
    Uniform,
    ZeroOneConstantSum,
    ZeroSum,
    Gk,
    File(PathBuf),
}

impl FromStr for Generator {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "uniform" => Generator::Uniform,
            "zero-one-constant-sum" => Generator::ZeroOneConstantSum,
            "zero-sum" => Generator::ZeroSum,
            "gk" => Generator::Gk,
            "" => return Err(invalid("empty generator")),
            path => Generator::File(PathBuf::from(path)),
        })
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Uniform => f.write_str("uniform"),
            Generator::ZeroOneConstantSum => f.write_str("zero-one-constant-sum"),
            Generator::ZeroSum => f.write_str("zero-sum"),
            Generator::Gk => f.write_str("gk"),
            Generator::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Draws a game. Hidden-column draws also return the hidden column.
pub fn generate_game(kind: &Generator, k: usize, seed: u64) -> Result<(BimatrixGame, Option<usize>), HarnessError> {
    if k < 2 {
        return Err(invalid(format!("need k >= 2, got {k}")));
    }
    let mut rng = seeded_rng(seed);
    let n = k * k;
    let game = match kind {
        Generator::Uniform => {
            let row = (0..n).map(|_| rng.random::<f64>()).collect();
            let col = (0..n).map(|_| rng.random::<f64>()).collect();
            BimatrixGame::new(k, row, col, PayoffRange::Unit)
        }
        Generator::ZeroOneConstantSum => {
            let row = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 }).collect();
            BimatrixGame::constant_sum(k, row, 1.0, PayoffRange::Unit)
        }
        Generator::ZeroSum => {
            let row = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            BimatrixGame::constant_sum(k, row, 0.0, PayoffRange::Signed)
        }
        Generator::Gk => {
            let inst = gk_sample(k, seed)?;
            return Ok((inst.game, Some(inst.c)));
        }
        Generator::File(path) => {
            let f = read_game(path)?;
            return Ok((f.game, f.hidden));
        }
    };
    Ok((game.map_err(FormatError::from)?, None))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub algorithm: Algorithm,
    pub k: usize,
    pub eps: f64,
    pub trials: usize,
    pub seed: u64,
    pub budget: Option<u64>,
    pub generator: Generator,
    /// Record wall-clock time per trial. Off by default so output is reproducible.
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.k < 2 && !matches!(self.generator, Generator::File(_)) {
            return Err(invalid(format!("need k >= 2, got {}", self.k)));
        }
        self.algorithm.check_eps(self.eps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub queries: u64,
    pub success: bool,
    pub regret: f64,
    pub wsne_violation: f64,
    pub branch: String,
    pub wall_time_ms: u64,
}

pub const CSV_HEADER: &str = "seed,queries,success,regret,wsne_violation,branch,wall_time_ms";

/// Queries the uniform sampler spends when no budget is given: `k^2 / 16`.
pub fn default_sampler_queries(k: usize) -> u64 {
    (k * k / 16) as u64
}

fn run_trial(spec: &ExperimentSpec, fixed: Option<&GameFile>, t: usize) -> Result<TrialRecord, HarnessError> {
    let seed = mix_seed(spec.seed, t as u64);
    let started = Instant::now();
    let game = match fixed {
        Some(f) => f.game.clone(),
        None => generate_game(&spec.generator, spec.k, mix_seed(seed, 0))?.0,
    };
    let k = game.k();
    let alg_seed = mix_seed(seed, 1);
    let sampler_queries = spec.budget.unwrap_or_else(|| default_sampler_queries(k));
    let mut oracle = Budgeted::new(MatrixOracle::new(game.clone()), spec.budget.unwrap_or(u64::MAX));
    let run = run_algorithm(spec.algorithm, &mut oracle, spec.eps, alg_seed, sampler_queries);
    let queries = oracle.queries();

    let target = spec.algorithm.verification_game(&game);
    let claim = spec.algorithm.claim(spec.eps);
    let (success, regret, wsne_violation) = match &run.profile {
        Some(p) => {
            let report = exact_regret(&target, p).map_err(FormatError::from)?;
            (
                run.error.is_none() && claim.holds(&target, p),
                report.max_regret(),
                report.max_wsne_violation(),
            )
        }
        None => (false, f64::NAN, f64::NAN),
    };
    Ok(TrialRecord {
        seed,
        queries,
        success,
        regret,
        wsne_violation,
        branch: run.branch,
        wall_time_ms: if spec.timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

/// Runs every trial, in parallel, returning records in trial order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>, HarnessError> {
    spec.validate()?;
    let fixed = match &spec.generator {
        Generator::File(path) => Some(read_game(path)?),
        _ => None,
    };
    if let Some(f) = &fixed {
        if f.game.k() < 2 {
            return Err(invalid("game file must have k >= 2"));
        }
    }
    (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, fixed.as_ref(), t))
        .collect()
}

pub fn write_records<W: Write>(records: &[TrialRecord], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryKind {
    /// Counts queries per column and completes the game afterwards.
    Det,
    /// A draw from the hidden-column distribution.
    Gk,
    /// Answers `(0, 0)` everywhere.
    Zeros,
}

impl FromStr for AdversaryKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "det" => Ok(AdversaryKind::Det),
            "gk" => Ok(AdversaryKind::Gk),
            "zeros" => Ok(AdversaryKind::Zeros),
            _ => Err(invalid(format!("unknown adversary {s:?}"))),
        }
    }
}

impl AdversaryKind {
    /// `ceil(eps k^2 / 2) - 1`, `k^2 / 16`, and `k - 2` respectively.
    pub fn default_budget(self, k: usize, eps: f64) -> u64 {
        match self {
            AdversaryKind::Det => {
                let e = EpsRatio::from_f64(eps);
                let half = (e.num as u128 * (k * k) as u128).div_ceil(2 * e.den as u128) as u64;
                half.saturating_sub(1)
            }
            AdversaryKind::Gk => default_sampler_queries(k),
            AdversaryKind::Zeros => k.saturating_sub(2) as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryReport {
    pub budget: u64,
    pub queries: u64,
    pub branch: String,
    /// The profile that was checked: the algorithm's output, its best effort,
    /// or uniform if it produced neither.
    pub claimed: MixedProfile,
    /// The game that refutes the claim, or the instance that was played.
    pub artifact: Option<BimatrixGame>,
    pub hidden: Option<usize>,
    pub refuted: bool,
    /// Named side conditions verified along the way.
    pub checks: Vec<(String, bool)>,
    pub ledger: QueryLedger,
}

impl AdversaryReport {
    pub fn checks_hold(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

/// Runs `algorithm` under an adversary and tries to refute its claim.
pub fn run_adversary(
    kind: AdversaryKind,
    algorithm: Algorithm,
    k: usize,
    eps: f64,
    budget: Option<u64>,
    seed: u64,
) -> Result<AdversaryReport, HarnessError> {
    if k < 2 {
        return Err(invalid(format!("need k >= 2, got {k}")));
    }
    algorithm.check_eps(eps)?;
    let budget = budget.unwrap_or_else(|| kind.default_budget(k, eps));
    let alg_seed = mix_seed(seed, 1);
    let claimed_of = |run: &AlgorithmRun| run.profile.clone().unwrap_or_else(|| MixedProfile::uniform(k));
    let mut checks = Vec::new();

    match kind {
        AdversaryKind::Det => {
            let ratio = EpsRatio::from_f64(eps);
            let mut oracle = Budgeted::new(DetAdversaryOracle::new(k, ratio), budget);
            let run = run_algorithm(algorithm, &mut oracle, eps, alg_seed, budget);
            let claimed = claimed_of(&run);
            let ledger = oracle.into_inner().ledger().clone();
            let (artifact, hidden, refuted) = match det_adversary_complete(&ledger, &claimed, ratio) {
                Ok(done) => {
                    checks.push(("consistent".to_string(), consistent_with(&done.game, &ledger)));
                    checks.push((
                        "zero-one-constant-sum".to_string(),
                        done.game.is_zero_one() && done.game.constant_sum_value() == Some(1.0),
                    ));
                    checks.push((
                        "uniform-row-bound".to_string(),
                        uniform_row_check(&done, &claimed, ratio).holds(),
                    ));
                    let refuted = !is_eps_ne(&done.game, &claimed, 0.5 - eps).map_err(FormatError::from)?;
                    (Some(done.game), Some(done.hidden), refuted)
                }
                Err(LowerBoundError::NoCandidateColumn) => {
                    checks.push(("completion".to_string(), false));
                    (None, None, false)
                }
                Err(e) => return Err(e.into()),
            };
            Ok(AdversaryReport {
                budget,
                queries: ledger.total(),
                branch: run.branch,
                claimed,
                artifact,
                hidden,
                refuted,
                checks,
                ledger,
            })
        }
        AdversaryKind::Gk => {
            let inst = gk_sample(k, mix_seed(seed, 0))?;
            let mut oracle = Budgeted::new(MatrixOracle::new(inst.game.clone()), budget);
            let run = run_algorithm(algorithm, &mut oracle, eps, alg_seed, budget);
            let claimed = claimed_of(&run);
            let ledger = oracle.into_inner().into_ledger();
            let refuted = match halfgame_refute(&inst, &claimed) {
                Ok(r) => {
                    checks.push(("half-game-cross-check".to_string(), true));
                    r
                }
                Err(LowerBoundError::Discrepancy { .. }) => {
                    checks.push(("half-game-cross-check".to_string(), false));
                    false
                }
                Err(e) => return Err(e.into()),
            };
            Ok(AdversaryReport {
                budget,
                queries: ledger.total(),
                branch: run.branch,
                claimed,
                artifact: Some(inst.game),
                hidden: Some(inst.c),
                refuted,
                checks,
                ledger,
            })
        }
        AdversaryKind::Zeros => {
            let mut oracle = Budgeted::new(ZeroAdversaryOracle::new(k), budget);
            let run = run_algorithm(algorithm, &mut oracle, eps, alg_seed, budget);
            let claimed = claimed_of(&run);
            let ledger = oracle.into_inner().ledger().clone();
            let witness = zero_adversary_refute(&ledger, &claimed, eps)?;
            let refuted = match &witness {
                Some(w) => {
                    let defeats = !is_eps_wsne(&w.game, &claimed, eps).map_err(FormatError::from)?;
                    checks.push(("witness-defeats-claim".to_string(), defeats));
                    checks.push(("witness-consistent".to_string(), consistent_with(&w.game, &ledger)));
                    defeats
                }
                None => false,
            };
            Ok(AdversaryReport {
                budget,
                queries: ledger.total(),
                branch: run.branch,
                claimed,
                artifact: witness.map(|w| w.game),
                hidden: None,
                refuted,
                checks,
                ledger,
            })
        }
    }
}
