//! The cutting-plane driver: alternate the restricted deck-design problem
//! with the search for an undetected swap until the deck detects every swap.

use std::time::{Duration, Instant};

use latdeck_core::cut::{find_undetected_swap, CheckReport, Verdict};
use latdeck_core::legal::{exact_overvote_ballot, full_overvote_ballot};
use latdeck_core::master::{build_master_capped, solve_feasibility, Improvements, RuleSet, DEFAULT_MAX_DECK_LENGTH};
use latdeck_core::milp::MilpSolver;
use latdeck_core::normalize::merge_noncompetitive;
use latdeck_core::{Ballot, BallotStyle, Deck, Error, Swap};
use serde::Serialize;

pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Certificate {
    /// The deck detects every swap and no shorter deck satisfies the rules.
    CertifiedOptimal,
    /// Stopped by the time limit; `deck_length` is only a lower bound.
    TimeLimitPartial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MasterStatus {
    Feasible,
    Infeasible,
    Timeout,
}

/// One master solve and, when the master was feasible, the cut search that
/// followed it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub deck_length: usize,
    pub master: MasterStatus,
    pub master_ms: f64,
    /// One-based swap found by the cut search; `None` when the deck is
    /// secure or no search ran.
    pub cut: Option<Vec<usize>>,
    pub cut_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub time_limit: Option<Duration>,
    /// Stop as soon as the master needs this many ballots: a deck of this
    /// length is already known.
    pub stop_at_length: Option<usize>,
    pub max_iterations: usize,
    pub max_deck_length: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            time_limit: None,
            stop_at_length: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            max_deck_length: DEFAULT_MAX_DECK_LENGTH,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Optimal deck in the caller's candidate indices; `None` after a time
    /// limit or an early halt.
    pub deck: Option<Deck>,
    /// Ballots appended for the overvote rules, kept apart from `deck`.
    pub rule_ballots: Vec<Ballot>,
    /// The optimum when certified, otherwise the best lower bound.
    pub deck_length: usize,
    pub cuts: Vec<Swap>,
    /// Rounds in which the master produced a deck and the cut search ran.
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub certificate: Certificate,
    /// The master reached `stop_at_length` after proving every shorter
    /// length infeasible.
    pub halted_early: bool,
    pub wall: Duration,
}

impl SolveResult {
    /// Deck plus the rule ballots, as it would be run through a tabulator.
    pub fn full_deck(&self) -> Option<Deck> {
        let mut deck = self.deck.clone()?;
        for b in &self.rule_ballots {
            deck.push(b.clone());
        }
        Some(deck)
    }
}

/// Ballots required by the overvote rules, in `style`'s indices.
pub fn rule_ballots(style: &BallotStyle, rules: &RuleSet) -> Vec<Ballot> {
    let mut out = Vec::new();
    if rules.append_full_overvote_ballot {
        out.push(full_overvote_ballot(style));
    }
    if rules.append_exact_overvote_ballot {
        out.push(exact_overvote_ballot(style));
    }
    out
}

fn remaining(deadline: Option<Instant>) -> Option<f64> {
    deadline.map(|d| d.saturating_duration_since(Instant::now()).as_secs_f64())
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Finds a shortest deck satisfying `rules` that detects every swap.
///
/// Starts from an empty cut set and one ballot. Whenever the restricted
/// problem is infeasible the length grows by one; otherwise the cut search
/// either certifies the deck or adds an undetected swap. Lengths never
/// decrease, so the first secure deck is optimal.
pub fn solve_style<S: MilpSolver + ?Sized>(
    style: &BallotStyle,
    rules: RuleSet,
    improvements: Improvements,
    options: SolveOptions,
    solver: &S,
) -> Result<SolveResult, Error> {
    rules.validate()?;
    let start = Instant::now();
    let deadline = options.time_limit.map(|t| start + t);
    // Merging keeps candidate indices, so decks need no translation back.
    let work = if improvements.merge_noncompetitive { merge_noncompetitive(style).style } else { style.clone() };
    let mut cuts: Vec<Swap> = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut b = 1;
    let partial = |b, cuts: Vec<Swap>, iterations, trace, halted_early| SolveResult {
        deck: None,
        rule_ballots: Vec::new(),
        deck_length: b,
        cuts,
        iterations,
        trace,
        certificate: Certificate::TimeLimitPartial,
        halted_early,
        wall: start.elapsed(),
    };
    loop {
        if options.stop_at_length.is_some_and(|l| b >= l) {
            let mut r = partial(b, cuts, iterations, trace, true);
            r.certificate = Certificate::CertifiedOptimal;
            return Ok(r);
        }
        if remaining(deadline).is_some_and(|t| t <= 0.0) {
            return Ok(partial(b, cuts, iterations, trace, false));
        }
        let mut master = build_master_capped(&work, &cuts, b, rules, improvements, options.max_deck_length)?;
        master.model.params.time_limit = remaining(deadline);
        let t0 = Instant::now();
        let found = solve_feasibility(&master, &work, solver);
        let master_ms = ms(t0.elapsed());
        let deck = match found {
            Ok(Some(deck)) => deck,
            Ok(None) => {
                log::debug!("{}: B = {b} infeasible with {} cuts", style.id, cuts.len());
                trace.push(TraceEntry { deck_length: b, master: MasterStatus::Infeasible, master_ms, cut: None, cut_ms: None });
                b += 1;
                continue;
            }
            Err(Error::Timeout) => {
                trace.push(TraceEntry { deck_length: b, master: MasterStatus::Timeout, master_ms, cut: None, cut_ms: None });
                return Ok(partial(b, cuts, iterations, trace, false));
            }
            Err(e) => return Err(e),
        };
        if iterations >= options.max_iterations {
            return Err(Error::Capacity(format!("iteration cap {} reached", options.max_iterations)));
        }
        iterations += 1;
        let t1 = Instant::now();
        let report = match find_undetected_swap(&work, &deck, improvements.minimal_cuts, remaining(deadline), solver) {
            Ok(r) => r,
            Err(Error::Timeout) => {
                trace.push(TraceEntry {
                    deck_length: b,
                    master: MasterStatus::Feasible,
                    master_ms,
                    cut: None,
                    cut_ms: Some(ms(t1.elapsed())),
                });
                return Ok(partial(b, cuts, iterations, trace, false));
            }
            Err(e) => return Err(e),
        };
        let cut_ms = Some(ms(t1.elapsed()));
        match report {
            CheckReport { verdict: Verdict::Secure, .. } => {
                trace.push(TraceEntry { deck_length: b, master: MasterStatus::Feasible, master_ms, cut: None, cut_ms });
                return Ok(SolveResult {
                    deck: Some(deck),
                    rule_ballots: rule_ballots(style, &rules),
                    deck_length: b,
                    cuts,
                    iterations,
                    trace,
                    certificate: Certificate::CertifiedOptimal,
                    halted_early: false,
                    wall: start.elapsed(),
                });
            }
            CheckReport { witness: Some(sigma), .. } => {
                if cuts.contains(&sigma) {
                    return Err(Error::Internal("cut search returned a swap already in the cut set".into()));
                }
                log::debug!("{}: B = {b}, cut {:?}", style.id, sigma.cycles());
                trace.push(TraceEntry {
                    deck_length: b,
                    master: MasterStatus::Feasible,
                    master_ms,
                    cut: Some(sigma.as_slice().iter().map(|&t| t + 1).collect()),
                    cut_ms,
                });
                cuts.push(sigma);
            }
            CheckReport { .. } => return Err(Error::Internal("vulnerable report without a witness".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::HighsSolver;
    use latdeck_core::cut::{brute_force_check, BRUTE_FORCE_CAP};
    use latdeck_core::samples::{president_senate, two_noncompetitive, two_pairs};

    fn solve(style: &BallotStyle, rules: RuleSet, imp: Improvements) -> SolveResult {
        solve_style(style, rules, imp, SolveOptions::default(), &HighsSolver::default()).unwrap()
    }

    #[test]
    fn two_pairs_needs_four() {
        let r = solve(&two_pairs(), RuleSet::michigan(), Improvements::all());
        assert_eq!(r.deck_length, 4);
        assert_eq!(r.certificate, Certificate::CertifiedOptimal);
        let deck = r.deck.unwrap();
        assert!(brute_force_check(&two_pairs(), &deck, BRUTE_FORCE_CAP).unwrap().is_secure());
    }

    #[test]
    fn noncompetitive_pair_without_rules() {
        let s = two_noncompetitive();
        let r = solve(&s, RuleSet::none(), Improvements::all());
        assert_eq!((r.deck_length, r.iterations), (2, 1));
        let off = solve(&s, RuleSet::none(), Improvements::without(5).unwrap());
        assert_eq!(off.deck_length, 2);
        assert!(off.iterations >= 2);
    }

    #[test]
    fn lengths_never_decrease() {
        let r = solve(&president_senate(), RuleSet::at_least_one(), Improvements::all());
        assert!(r.trace.windows(2).all(|w| w[0].deck_length <= w[1].deck_length));
        assert!(brute_force_check(&president_senate(), r.deck.as_ref().unwrap(), BRUTE_FORCE_CAP).unwrap().is_secure());
        // every infeasible length sits below the answer
        assert!(r.trace.iter().filter(|t| t.master == MasterStatus::Infeasible).all(|t| t.deck_length < r.deck_length));
    }

    #[test]
    fn early_halt_and_rule_ballots() {
        let opts = SolveOptions { stop_at_length: Some(3), ..SolveOptions::default() };
        let r = solve_style(&two_pairs(), RuleSet::michigan(), Improvements::all(), opts, &HighsSolver::default()).unwrap();
        assert!(r.halted_early && r.deck.is_none());
        assert_eq!(r.deck_length, 3);
        let rules = RuleSet { append_full_overvote_ballot: true, ..RuleSet::michigan() };
        let r = solve(&two_pairs(), rules, Improvements::all());
        assert_eq!(r.rule_ballots.len(), 1);
        assert_eq!(r.full_deck().unwrap().len(), 5);
    }

    #[test]
    fn zero_time_limit_is_partial() {
        let opts = SolveOptions { time_limit: Some(Duration::ZERO), ..SolveOptions::default() };
        let r = solve_style(&two_pairs(), RuleSet::michigan(), Improvements::all(), opts, &HighsSolver::default()).unwrap();
        assert_eq!(r.certificate, Certificate::TimeLimitPartial);
        assert!(r.deck.is_none());
    }
}
