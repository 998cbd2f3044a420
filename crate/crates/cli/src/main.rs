use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use querynash::harness::{
    default_sampler_queries, generate_game, run_adversary, run_algorithm, run_experiment, write_records, AdversaryKind,
    Algorithm, ExperimentSpec, Generator,
};
use querynash::io::{format_game, format_profile, read_game, read_profile, write_game, write_profile};
use querynash::{exact_regret, is_eps_ne, is_eps_wsne, Budgeted, MatrixOracle, PayoffOracle};

#[derive(Parser)]
#[command(name = "querynash", version, about = "Payoff-query equilibrium solvers and lower-bound adversaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one game and print the profile it returns.
    Solve {
        /// Game file to solve; otherwise one is drawn from --generator.
        #[arg(long, conflicts_with = "generator")]
        game: Option<PathBuf>,
        #[arg(long, default_value = "uniform")]
        generator: Generator,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        algo: Algorithm,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        budget: Option<u64>,
        /// Profile file to write; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run repeated seeded trials and write one CSV row per trial.
    Bench {
        #[arg(long)]
        algo: Algorithm,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        budget: Option<u64>,
        /// uniform, zero-one-constant-sum, zero-sum, gk, or a game file path.
        #[arg(long, default_value = "uniform")]
        generator: Generator,
        /// Record wall-clock time per trial (makes the CSV nondeterministic).
        #[arg(long)]
        timing: bool,
        /// CSV file to write; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an algorithm against an adversary and emit the refuting game.
    /// Exits with status 1 when the algorithm's claim is refuted.
    Adversary {
        /// det, gk, or zeros.
        #[arg(long)]
        adversary: AdversaryKind,
        #[arg(long)]
        algo: Algorithm,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Query budget; defaults to the adversary's bound.
        #[arg(long)]
        budget: Option<u64>,
        /// Game file for the refuting game, with the hidden column if any.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the exact regrets of a profile in a game.
    Verify {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        /// Also report whether the profile is an eps-NE and an eps-WSNE.
        #[arg(long)]
        eps: Option<f64>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            game,
            generator,
            k,
            algo,
            eps,
            seed,
            budget,
            out,
        } => {
            algo.check_eps(eps)?;
            let game = match game {
                Some(path) => read_game(&path).with_context(|| format!("cannot load {}", path.display()))?.game,
                None => generate_game(&generator, k, seed)?.0,
            };
            let k = game.k();
            let sampler_queries = budget.unwrap_or_else(|| default_sampler_queries(k));
            let mut oracle = Budgeted::new(MatrixOracle::new(game.clone()), budget.unwrap_or(u64::MAX));
            let result = run_algorithm(algo, &mut oracle, eps, seed, sampler_queries);
            eprintln!("branch: {}", result.branch);
            eprintln!("queries: {}", oracle.queries());
            if let Some(e) = &result.error {
                eprintln!("stopped early: {e}");
            }
            let Some(profile) = result.profile else {
                bail!("{algo} produced no profile");
            };
            let target = algo.verification_game(&game);
            let report = exact_regret(&target, &profile)?;
            let claim = algo.claim(eps);
            eprintln!("regret: {}", report.max_regret());
            eprintln!("wsne_violation: {}", report.max_wsne_violation());
            eprintln!("claim_holds: {}", claim.holds(&target, &profile));
            match &out {
                Some(path) => write_profile(path, &profile)?,
                None => print!("{}", format_profile(&profile)),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            algo,
            k,
            eps,
            trials,
            seed,
            budget,
            generator,
            timing,
            out,
        } => {
            let spec = ExperimentSpec {
                algorithm: algo,
                k,
                eps,
                trials,
                seed,
                budget,
                generator,
                timing,
            };
            let records = run_experiment(&spec)?;
            let mut w = output(out.as_ref())?;
            write_records(&records, &mut w)?;
            w.flush()?;
            let successes = records.iter().filter(|r| r.success).count();
            let mean_queries = records.iter().map(|r| r.queries as f64).sum::<f64>() / records.len() as f64;
            eprintln!("success: {successes}/{}", records.len());
            eprintln!("mean_queries: {mean_queries:.1}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Adversary {
            adversary,
            algo,
            k,
            eps,
            seed,
            budget,
            out,
        } => {
            let report = run_adversary(adversary, algo, k, eps, budget, seed)?;
            eprintln!("budget: {}", report.budget);
            eprintln!("queries: {}", report.queries);
            eprintln!("branch: {}", report.branch);
            for (name, ok) in &report.checks {
                eprintln!("check {name}: {ok}");
            }
            eprintln!("refuted: {}", report.refuted);
            if let Some(game) = &report.artifact {
                match &out {
                    Some(path) => write_game(path, game, report.hidden)?,
                    None => print!("{}", format_game(game, report.hidden)),
                }
            }
            if !report.checks_hold() {
                bail!("adversary side checks failed");
            }
            Ok(if report.refuted { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Command::Verify { game, profile, eps } => {
            let game = read_game(&game).with_context(|| format!("cannot load {}", game.display()))?.game;
            let profile = read_profile(&profile).with_context(|| format!("cannot load {}", profile.display()))?;
            let report = exact_regret(&game, &profile)?;
            println!("row_regret: {}", report.row_regret);
            println!("col_regret: {}", report.col_regret);
            println!("row_wsne_violation: {}", report.row_wsne_violation);
            println!("col_wsne_violation: {}", report.col_wsne_violation);
            println!("max_regret: {}", report.max_regret());
            println!("max_wsne_violation: {}", report.max_wsne_violation());
            if let Some(eps) = eps {
                println!("eps_ne: {}", is_eps_ne(&game, &profile, eps)?);
                println!("eps_wsne: {}", is_eps_wsne(&game, &profile, eps)?);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
