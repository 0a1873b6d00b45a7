use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use latdeck::backend::Backend;
use latdeck::io::{read_deck, read_json, read_style, write_deck_csv, write_json, DeckFile, SwapFile};
use latdeck::pipeline::{batch_solve, bench, BatchOptions};
use latdeck::solver::{solve_style, Certificate, SolveOptions};
use latdeck_core::bounds::{distinct_votes_deck, optimal_length_formula, triangular_deck};
use latdeck_core::cut::{brute_force_check, exhaustive_check, find_undetected_swap, BRUTE_FORCE_CAP};
use latdeck_core::master::{Improvements, RuleSet};
use latdeck_core::redteam::{hide_any_swap, hide_cross_contest_swap, rule_report};
use latdeck_core::Deck;
use serde_json::json;

#[derive(Parser)]
#[command(name = "latdeck", version, about = "Build and check logic and accuracy test decks")]
struct Cli {
    /// MILP backend: highs or enumeration.
    #[arg(long, global = true, default_value = "highs")]
    backend: String,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rules {
    Michigan,
    None,
    OneVote,
}

impl Rules {
    fn to_set(self) -> RuleSet {
        match self {
            Rules::Michigan => RuleSet::michigan(),
            Rules::None => RuleSet::none(),
            Rules::OneVote => RuleSet::at_least_one(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Overvote {
    /// A ballot marking every candidate.
    Full,
    /// A ballot with exactly one mark too many in each competitive contest.
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundMethod {
    Triangular,
    Distinct,
}

#[derive(Clone, Copy, ValueEnum)]
enum RedteamRules {
    None,
    OneVote,
    Distinct,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether a deck detects every swap. Exit 0 when secure, 3 with
    /// a witness when not.
    Check {
        #[arg(long)]
        style: PathBuf,
        /// Deck as JSON, or as a 0/1 matrix with a `.csv` extension.
        #[arg(long)]
        deck: PathBuf,
        /// Report a swap whose contest graph is connected.
        #[arg(long)]
        minimal: bool,
        /// Enumerate swaps instead of solving a MILP (small styles only).
        #[arg(long)]
        brute_force: bool,
    },
    /// Compute a shortest secure deck.
    Solve {
        #[arg(long)]
        style: PathBuf,
        #[arg(long, value_enum, default_value = "michigan")]
        rules: Rules,
        #[arg(long)]
        out: PathBuf,
        /// Disable an improvement (1 to 5); may be repeated.
        #[arg(long = "no-improvement", value_parser = clap::value_parser!(u8).range(1..=5))]
        no_improvement: Vec<u8>,
        #[arg(long)]
        time_limit: Option<f64>,
        /// Write the per-solve trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Append an overvoted ballot after optimisation.
        #[arg(long, value_enum)]
        append_overvote: Option<Overvote>,
        /// Tabulators flag overvoted ballots (needed for `--append-overvote exact`).
        #[arg(long)]
        assume_overvote_alert: bool,
        /// Also write the deck as a CSV matrix.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build a deck with distinct vote totals (an upper bound).
    Bound {
        #[arg(long)]
        style: PathBuf,
        #[arg(long, value_enum, default_value = "distinct")]
        method: BoundMethod,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a deck that hides a given swap while meeting legal rules.
    Redteam {
        #[arg(long)]
        style: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, value_enum, default_value = "one-vote")]
        rules: RedteamRules,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every style in a directory. Exit 0 when all are certified, 2
    /// otherwise.
    Batch {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "michigan")]
        rules: Rules,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Time limit per style, in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
    },
    /// Solve a synthetic family and print times and iterations as CSV.
    Bench {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        experiment: u8,
        #[arg(long, default_value_t = 12)]
        max_c: usize,
        /// Also solve with this improvement disabled; may be repeated.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        ablate: Vec<u8>,
        #[arg(long, value_enum, default_value = "one-vote")]
        rules: Rules,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn seconds(t: Option<f64>) -> Result<Option<Duration>> {
    t.map(|s| Duration::try_from_secs_f64(s).context("invalid time limit")).transpose()
}

fn run(cli: Cli) -> Result<ExitCode> {
    let solver = Backend::by_name(&cli.backend)?;
    match cli.command {
        Command::Check { style, deck, minimal, brute_force } => {
            let style = read_style(&style)?;
            let deck = read_deck(&deck, &style)?;
            // Overvoted ballots are rejected by the tabulator and never counted.
            let total = deck.len();
            let mut counted = Vec::new();
            for b in deck.into_ballots() {
                if style.is_feasible(&b)? {
                    counted.push(b);
                }
            }
            if counted.len() < total {
                eprintln!("ignoring {} overvoted ballot(s)", total - counted.len());
            }
            let deck = Deck::new(counted);
            let report = if brute_force {
                if style.num_candidates() <= BRUTE_FORCE_CAP {
                    brute_force_check(&style, &deck, BRUTE_FORCE_CAP)?
                } else {
                    exhaustive_check(&style, &deck, 100_000_000)?
                }
            } else {
                find_undetected_swap(&style, &deck, minimal, None, &solver)?
            };
            match report.witness {
                None => {
                    println!("SECURE");
                    Ok(ExitCode::SUCCESS)
                }
                Some(sigma) => {
                    println!("VULNERABLE");
                    println!("{}", serde_json::to_string_pretty(&SwapFile::from_swap(&sigma))?);
                    Ok(ExitCode::from(3))
                }
            }
        }
        Command::Solve {
            style,
            rules,
            out,
            no_improvement,
            time_limit,
            trace,
            append_overvote,
            assume_overvote_alert,
            csv,
        } => {
            let style = read_style(&style)?;
            let mut rules = rules.to_set();
            rules.append_full_overvote_ballot = matches!(append_overvote, Some(Overvote::Full));
            rules.append_exact_overvote_ballot = matches!(append_overvote, Some(Overvote::Exact));
            rules.assume_overvote_alert = assume_overvote_alert;
            let mut imp = Improvements::all();
            for k in no_improvement {
                imp.set(k, false)?;
            }
            let options = SolveOptions { time_limit: seconds(time_limit)?, ..SolveOptions::default() };
            let r = solve_style(&style, rules, imp, options, &solver)?;
            if let Some(path) = trace {
                write_json(&path, &json!({ "iterations": r.iterations, "trace": r.trace }))?;
            }
            match (&r.deck, r.certificate) {
                (Some(deck), Certificate::CertifiedOptimal) => {
                    write_json(&out, &DeckFile::new(&style, deck, &r.rule_ballots)?)?;
                    if let Some(path) = csv {
                        write_deck_csv(&path, &style, &r.full_deck().expect("deck present"))?;
                    }
                    println!("B* = {} after {} iterations ({:.2} s)", r.deck_length, r.iterations, r.wall.as_secs_f64());
                    Ok(ExitCode::SUCCESS)
                }
                _ => {
                    eprintln!("time limit reached: no deck shorter than {} ballots exists", r.deck_length);
                    Ok(ExitCode::from(2))
                }
            }
        }
        Command::Bound { style, method, out } => {
            let style = read_style(&style)?;
            let deck = match method {
                BoundMethod::Triangular => triangular_deck(&style),
                BoundMethod::Distinct => distinct_votes_deck(&style, &solver)?,
            };
            let f = optimal_length_formula(&style);
            println!("length {} (formula: H = {}, NC = {}, predicted {})", deck.len(), f.h, f.nc, f.predicted);
            if let Some(path) = out {
                write_json(&path, &DeckFile::new(&style, &deck, &[])?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Redteam { style, sigma, rules, out } => {
            let style = read_style(&style)?;
            let sigma = read_json::<SwapFile>(&sigma)?.to_swap()?;
            let deck = match rules {
                RedteamRules::None | RedteamRules::OneVote => hide_any_swap(&style, &sigma)?,
                RedteamRules::Distinct => hide_cross_contest_swap(&style, &sigma)?,
            };
            let report = rule_report(&style, &deck, &sigma)?;
            let file = DeckFile::new(&style, &deck, &[])?;
            let body = json!({
                "deck": file,
                "at_least_one_vote": report.at_least_one_vote,
                "distinct_within_contest": report.distinct_within_contest,
                "swap_hidden": report.hidden,
            });
            match out {
                Some(path) => write_json(&path, &body)?,
                None => println!("{}", serde_json::to_string_pretty(&body)?),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Batch { dir, rules, out, jobs, time_limit } => {
            let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
            paths.sort();
            let styles = paths.iter().map(|p| read_style(p)).collect::<Result<Vec<_>>>()?;
            let mut ids: Vec<&str> = styles.iter().map(|s| s.id.as_str()).collect();
            ids.sort_unstable();
            if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
                bail!("style id {:?} appears twice", w[0]);
            }
            fs::create_dir_all(&out)?;
            let opts = BatchOptions {
                rules: rules.to_set(),
                jobs,
                time_limit: seconds(time_limit)?,
                ..BatchOptions::default()
            };
            let summary = batch_solve(styles.clone(), &opts, &solver)?;
            for (style, rec) in styles.iter().zip(&summary.records) {
                if let Some(deck) = &rec.deck {
                    write_json(&out.join(format!("{}.deck.json", rec.style_id)), &DeckFile::new(style, deck, &rec.rule_ballots)?)?;
                }
                if let Some(e) = &rec.error {
                    eprintln!("{}: {e}", rec.style_id);
                }
            }
            summary.write_csv(fs::File::create(out.join("summary.csv"))?)?;
            println!(
                "{} styles: {} full, {} reused, {} translated, {} unsolved ({:.1} s)",
                summary.records.len(),
                summary.full,
                summary.reused,
                summary.translated,
                summary.failed,
                summary.wall.as_secs_f64()
            );
            Ok(if summary.all_solved() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Bench { experiment, max_c, ablate, rules, time_limit, out } => {
            let rows = bench(experiment, max_c, &ablate, rules.to_set(), seconds(time_limit)?, &solver)?;
            let sink: Box<dyn std::io::Write> = match out {
                Some(p) => Box::new(fs::File::create(p)?),
                None => Box::new(std::io::stdout()),
            };
            let mut w = csv::Writer::from_writer(sink);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
