//! Zero-sum self-play, sampled payoff vectors, and the conversion from an
//! approximate equilibrium to a well-supported one.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::Serialize;

use crate::error::SolveError;
use crate::game::{argmax, dot, uniform_strategy, validate_strategy, MixedProfile, Player, TOLERANCE};
use crate::oracle::PayoffOracle;
use crate::rng::{mix_seed, sample_index, seeded_rng};

/// Default multiplier in `rounds = ceil(c0 * ln k / eps^2)`.
pub const DEFAULT_C0: f64 = 16.0;

/// `C` in the bound `queries <= C * k * ln k / eps^4` for [`zerosum_wsne`].
pub const ZEROSUM_WSNE_QUERY_CONSTANT: f64 = 27649.0;

fn check_k(k: usize) -> Result<(), SolveError> {
    if k < 2 {
        return Err(SolveError::InvalidInput(format!("need k >= 2, got {k}")));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<(), SolveError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(SolveError::InvalidInput(format!("accuracy {eps} outside (0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuConfig {
    pub epsilon: f64,
    pub rounds: u64,
    pub learning_rate: f64,
    pub seed: u64,
}

impl MwuConfig {
    pub fn new(k: usize, epsilon: f64, seed: u64) -> Result<Self, SolveError> {
        Self::with_c0(k, epsilon, DEFAULT_C0, seed)
    }

    pub fn with_c0(k: usize, epsilon: f64, c0: f64, seed: u64) -> Result<Self, SolveError> {
        check_k(k)?;
        check_eps(epsilon)?;
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(SolveError::InvalidInput(format!("c0 must be positive, got {c0}")));
        }
        let ln_k = (k as f64).ln();
        let rounds = ((c0 * ln_k / (epsilon * epsilon)).ceil() as u64).max(1);
        let learning_rate = (ln_k / rounds as f64).sqrt().min(1.0);
        Ok(Self {
            epsilon,
            rounds,
            learning_rate,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MwuOutput {
    pub profile: MixedProfile,
    pub rounds: u64,
    pub queries: u64,
}

fn softmax(log_weights: &[f64], out: &mut [f64]) {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &w) in out.iter_mut().zip(log_weights) {
        *o = (w - max).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|p| *p /= total);
    v
}

fn average(sum_x: &[f64], sum_y: &[f64], completed: u64) -> MixedProfile {
    if completed == 0 {
        return MixedProfile::uniform(sum_x.len());
    }
    MixedProfile {
        x: normalized(sum_x.to_vec()),
        y: normalized(sum_y.to_vec()),
    }
}

/// Multiplicative-weights self-play on a zero-sum game.
///
/// Each round the row player samples a column from the current `y` and queries
/// that whole column, the column player does the same with a row drawn from
/// `x`, and both update their log-weights. Returns the average of the iterates.
pub fn mwu_zero_sum<O: PayoffOracle + ?Sized>(oracle: &mut O, config: &MwuConfig) -> Result<MwuOutput, SolveError> {
    let k = oracle.k();
    check_k(k)?;
    let start = oracle.queries();
    let eta = config.learning_rate;
    let mut rng = seeded_rng(config.seed);

    let mut lw_x = vec![0.0; k];
    let mut lw_y = vec![0.0; k];
    let mut x = uniform_strategy(k);
    let mut y = uniform_strategy(k);
    let mut sum_x = vec![0.0; k];
    let mut sum_y = vec![0.0; k];
    let mut u_x = vec![0.0; k];
    let mut u_y = vec![0.0; k];

    for t in 0..config.rounds {
        softmax(&lw_x, &mut x);
        softmax(&lw_y, &mut y);
        let j = sample_index(&y, &mut rng);
        let i = sample_index(&x, &mut rng);
        let run = (|| {
            for (r, u) in u_x.iter_mut().enumerate() {
                *u = oracle.query(r, j)?.a;
            }
            for (c, u) in u_y.iter_mut().enumerate() {
                *u = oracle.query(i, c)?.b;
            }
            Ok::<_, SolveError>(())
        })();
        if let Err(e) = run {
            return Err(e.or_best_effort(|| average(&sum_x, &sum_y, t)));
        }
        for n in 0..k {
            sum_x[n] += x[n];
            sum_y[n] += y[n];
            lw_x[n] += eta * u_x[n];
            lw_y[n] += eta * u_y[n];
        }
    }

    Ok(MwuOutput {
        profile: average(&sum_x, &sum_y, config.rounds),
        rounds: config.rounds,
        queries: oracle.queries() - start,
    })
}

/// Sampled estimate of one player's pure-strategy payoffs against a fixed
/// opponent strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxPayoffVector {
    pub values: Vec<f64>,
    pub accuracy: f64,
    pub player: Player,
    pub samples_per_entry: u64,
}

impl ApproxPayoffVector {
    /// An exactly known payoff vector.
    pub fn exact(values: Vec<f64>, player: Player) -> Self {
        Self {
            values,
            accuracy: 0.0,
            player,
            samples_per_entry: 0,
        }
    }
}

/// `ceil(8 ln k / eps^2)`, at least one.
pub fn samples_per_entry(k: usize, eps: f64) -> u64 {
    ((8.0 * (k as f64).ln() / (eps * eps)).ceil() as u64).max(1)
}

/// For each own pure strategy, averages the payoff over `T` opponent strategies
/// drawn from `opponent`. Uses exactly `k * T` queries.
pub fn estimate_payoff_vector<O: PayoffOracle + ?Sized>(
    oracle: &mut O,
    opponent: &[f64],
    player: Player,
    eps: f64,
    seed: u64,
) -> Result<ApproxPayoffVector, SolveError> {
    let k = oracle.k();
    check_eps(eps)?;
    if opponent.len() != k {
        return Err(SolveError::InvalidInput(format!(
            "opponent strategy has length {}, expected {k}",
            opponent.len()
        )));
    }
    validate_strategy(opponent)?;
    let samples = samples_per_entry(k, eps);
    let mut rng = seeded_rng(seed);
    let draw = WeightedIndex::new(opponent).map_err(|e| SolveError::InvalidInput(e.to_string()))?;
    let mut values = vec![0.0; k];
    for (own, v) in values.iter_mut().enumerate() {
        // A running mean stays exact when every sample is the same.
        let mut mean = 0.0;
        for n in 1..=samples {
            let other = draw.sample(&mut rng);
            let payoff = match player {
                Player::Row => oracle.query(own, other)?.a,
                Player::Column => oracle.query(other, own)?.b,
            };
            mean += (payoff - mean) / n as f64;
        }
        *v = mean;
    }
    Ok(ApproxPayoffVector {
        values,
        accuracy: eps,
        player,
        samples_per_entry: samples,
    })
}

/// Best response according to `v`, lowest index on ties.
pub fn approx_best_response(v: &ApproxPayoffVector) -> usize {
    argmax(&v.values)
}

/// `max v - <own, v>`.
pub fn approx_regret(v: &ApproxPayoffVector, own: &[f64]) -> f64 {
    v.values[approx_best_response(v)] - dot(own, &v.values)
}

/// Strategies that are clearly worse than the approximate best response:
/// `{j : v[j*] > v[j] + eps/4}`.
pub fn clearly_suboptimal(v: &ApproxPayoffVector, eps: f64) -> Vec<usize> {
    let best = v.values[approx_best_response(v)];
    (0..v.values.len()).filter(|&j| best > v.values[j] + eps / 4.0).collect()
}

fn shift_off(p: &[f64], v: &ApproxPayoffVector, eps: f64) -> Result<Vec<f64>, SolveError> {
    let bad = clearly_suboptimal(v, eps);
    let mass: f64 = bad.iter().map(|&j| p[j]).sum();
    let bound = eps / 2.0;
    if mass > bound + TOLERANCE {
        return Err(SolveError::PreconditionViolated { mass, bound });
    }
    if mass == 0.0 {
        return Ok(p.to_vec());
    }
    let mut out = p.to_vec();
    for &j in &bad {
        out[j] = 0.0;
    }
    out[approx_best_response(v)] += mass;
    Ok(normalized(out))
}

/// Turns an `eps^2/24`-NE with `eps^2/24`-accurate payoff vectors into an
/// `eps`-WSNE by moving all mass on clearly suboptimal strategies to the
/// approximate best response. Makes no queries.
pub fn ne_to_wsne(
    profile: &MixedProfile,
    r: &ApproxPayoffVector,
    c: &ApproxPayoffVector,
    eps: f64,
) -> Result<MixedProfile, SolveError> {
    let k = profile.k();
    if r.values.len() != k || c.values.len() != k {
        return Err(SolveError::InvalidInput("payoff vector length does not match the profile".into()));
    }
    if r.player != Player::Row || c.player != Player::Column {
        return Err(SolveError::InvalidInput("expected a row vector and a column vector".into()));
    }
    let needed = eps * eps / 24.0;
    for v in [r, c] {
        if v.accuracy > needed + TOLERANCE {
            return Err(SolveError::InvalidInput(format!(
                "payoff vector accuracy {} is coarser than {needed}",
                v.accuracy
            )));
        }
    }
    Ok(MixedProfile {
        x: shift_off(&profile.x, r, eps)?,
        y: shift_off(&profile.y, c, eps)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSumWsneOutput {
    pub profile: MixedProfile,
    pub mwu_rounds: u64,
    pub queries: u64,
}

/// An `eps`-WSNE of a zero-sum game: self-play and estimation at `eps^2/24`,
/// then [`ne_to_wsne`].
pub fn zerosum_wsne<O: PayoffOracle + ?Sized>(
    oracle: &mut O,
    eps: f64,
    seed: u64,
) -> Result<ZeroSumWsneOutput, SolveError> {
    check_eps(eps)?;
    let start = oracle.queries();
    let inner = eps * eps / 24.0;
    let config = MwuConfig::new(oracle.k(), inner, mix_seed(seed, 0))?;
    let ne = mwu_zero_sum(oracle, &config)?;
    let fallback = ne.profile.clone();
    let r = estimate_payoff_vector(oracle, &ne.profile.y, Player::Row, inner, mix_seed(seed, 1))
        .map_err(|e| e.or_best_effort(|| fallback.clone()))?;
    let c = estimate_payoff_vector(oracle, &ne.profile.x, Player::Column, inner, mix_seed(seed, 2))
        .map_err(|e| e.or_best_effort(|| fallback.clone()))?;
    let profile = ne_to_wsne(&ne.profile, &r, &c, eps)?;
    Ok(ZeroSumWsneOutput {
        profile,
        mwu_rounds: ne.rounds,
        queries: oracle.queries() - start,
    })
}

/// Upper bound `C * k * ln k / eps^4` on the queries of [`zerosum_wsne`].
pub fn zerosum_wsne_query_bound(k: usize, eps: f64) -> f64 {
    ZEROSUM_WSNE_QUERY_CONSTANT * k as f64 * (k as f64).ln() / eps.powi(4)
}

/// One zero-sum run, serialized as a CSV line by [`crate::io::csv_line`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSumRunRecord {
    pub k: usize,
    pub eps: f64,
    pub rounds: u64,
    pub queries: u64,
    pub success: bool,
    pub regret: f64,
    pub wsne_violation: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{exact_regret, BimatrixGame, PayoffRange};
    use crate::oracle::MatrixOracle;

    fn signed_pennies() -> BimatrixGame {
        BimatrixGame::constant_sum(2, vec![1.0, -1.0, -1.0, 1.0], 0.0, PayoffRange::Signed).unwrap()
    }

    #[test]
    fn config_follows_the_round_formula() {
        let c = MwuConfig::new(100, 0.2, 0).unwrap();
        assert_eq!(c.rounds, (16.0 * 100f64.ln() / 0.04).ceil() as u64);
        assert!((c.learning_rate - (100f64.ln() / c.rounds as f64).sqrt()).abs() < 1e-15);
        assert!(MwuConfig::new(1, 0.2, 0).is_err());
        assert!(MwuConfig::new(4, 0.0, 0).is_err());
    }

    #[test]
    fn mwu_query_count_is_exact() {
        let mut o = MatrixOracle::new(signed_pennies());
        let c = MwuConfig::new(2, 0.5, 3).unwrap();
        let out = mwu_zero_sum(&mut o, &c).unwrap();
        assert_eq!(out.queries, 2 * 2 * c.rounds);
        assert_eq!(o.queries(), out.queries);
    }

    #[test]
    fn mwu_on_all_zeros_is_uniform() {
        let g = BimatrixGame::new(3, vec![0.0; 9], vec![0.0; 9], PayoffRange::Signed).unwrap();
        let mut o = MatrixOracle::new(g.clone());
        let out = mwu_zero_sum(&mut o, &MwuConfig::new(3, 0.5, 1).unwrap()).unwrap();
        assert_eq!(exact_regret(&g, &out.profile).unwrap().max_regret(), 0.0);
    }

    #[test]
    fn mwu_budget_exhaustion_returns_best_effort() {
        let mut o = crate::oracle::Budgeted::new(MatrixOracle::new(signed_pennies()), 9);
        let err = mwu_zero_sum(&mut o, &MwuConfig::new(2, 0.5, 1).unwrap()).unwrap_err();
        let p = err.best_effort().unwrap();
        assert!(MixedProfile::new(p.x.clone(), p.y.clone()).is_ok());
    }

    #[test]
    fn pure_opponent_gives_exact_entries() {
        let g = BimatrixGame::new(2, vec![0.1, 0.2, 0.3, 0.4], vec![0.5, 0.6, 0.7, 0.8], PayoffRange::Unit).unwrap();
        let mut o = MatrixOracle::new(g);
        let r = estimate_payoff_vector(&mut o, &[0.0, 1.0], Player::Row, 0.5, 0).unwrap();
        assert_eq!(r.values, vec![0.2, 0.4]);
        let c = estimate_payoff_vector(&mut o, &[1.0, 0.0], Player::Column, 0.5, 0).unwrap();
        assert_eq!(c.values, vec![0.5, 0.6]);
        assert_eq!(o.queries(), 2 * 2 * samples_per_entry(2, 0.5));
    }

    #[test]
    fn estimation_rejects_bad_strategies() {
        let mut o = MatrixOracle::new(signed_pennies());
        assert!(estimate_payoff_vector(&mut o, &[0.5, f64::NAN], Player::Row, 0.5, 0).is_err());
        assert!(estimate_payoff_vector(&mut o, &[1.5, -0.5], Player::Row, 0.5, 0).is_err());
        assert_eq!(o.queries(), 0);
    }

    #[test]
    fn best_response_ties_go_low() {
        let v = ApproxPayoffVector::exact(vec![0.2, 0.9, 0.9], Player::Row);
        assert_eq!(approx_best_response(&v), 1);
        assert_eq!(approx_regret(&v, &[0.0, 1.0, 0.0]), 0.0);
        assert!((approx_regret(&v, &[1.0, 0.0, 0.0]) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn suboptimal_set_by_substitution() {
        let v = ApproxPayoffVector::exact(vec![0.9, 0.6, 0.88], Player::Row);
        assert_eq!(approx_best_response(&v), 0);
        assert_eq!(clearly_suboptimal(&v, 1.0), vec![1]);
    }

    #[test]
    fn conversion_moves_small_mass_to_best_response() {
        let p = MixedProfile::new(vec![0.8, 0.2, 0.0], vec![1.0, 0.0, 0.0]).unwrap();
        let r = ApproxPayoffVector {
            values: vec![0.9, 0.6, 0.88],
            accuracy: 0.0,
            player: Player::Row,
            samples_per_entry: 0,
        };
        let c = ApproxPayoffVector::exact(vec![0.5, 0.5, 0.5], Player::Column);
        let out = ne_to_wsne(&p, &r, &c, 1.0).unwrap();
        assert_eq!(out.x, vec![1.0, 0.0, 0.0]);
        assert_eq!(out.y, p.y);
    }

    #[test]
    fn conversion_rejects_large_suboptimal_mass() {
        let p = MixedProfile::new(vec![0.4, 0.6, 0.0], vec![1.0, 0.0, 0.0]).unwrap();
        let r = ApproxPayoffVector::exact(vec![0.9, 0.6, 0.88], Player::Row);
        let c = ApproxPayoffVector::exact(vec![0.5, 0.5, 0.5], Player::Column);
        assert!(matches!(
            ne_to_wsne(&p, &r, &c, 1.0),
            Err(SolveError::PreconditionViolated { .. })
        ));
    }

    #[test]
    fn conversion_rejects_coarse_vectors() {
        let p = MixedProfile::uniform(2);
        let mut r = ApproxPayoffVector::exact(vec![0.0, 0.0], Player::Row);
        r.accuracy = 0.1;
        let c = ApproxPayoffVector::exact(vec![0.0, 0.0], Player::Column);
        assert!(matches!(ne_to_wsne(&p, &r, &c, 0.5), Err(SolveError::InvalidInput(_))));
    }

    #[test]
    fn zerosum_wsne_on_all_zeros() {
        let g = BimatrixGame::new(2, vec![0.0; 4], vec![0.0; 4], PayoffRange::Signed).unwrap();
        let mut o = MatrixOracle::new(g.clone());
        let out = zerosum_wsne(&mut o, 1.0, 5).unwrap();
        assert_eq!(exact_regret(&g, &out.profile).unwrap().max_wsne_violation(), 0.0);
        assert_eq!(out.queries, o.queries());
    }
}
