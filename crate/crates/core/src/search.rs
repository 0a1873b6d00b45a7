//! Exhaustive search over decks of a fixed length, used to certify that no
//! shorter secure deck exists.
//!
//! Padding a secure deck with empty ballots keeps it secure and keeps every
//! rule satisfied, so "no secure deck of length L" also rules out every
//! length below L.
//!
//! The search first enumerates per-candidate vote totals that any secure,
//! rule-abiding deck must have:
//! - totals within a contest are distinct (a same-contest transposition of
//!   two equal totals can never overvote);
//! - totals of noncompetitive candidates are distinct across contests (a
//!   swap between them can never overvote);
//! - equivalent contests (same size and cap) have different sorted totals;
//! - each contest fits: `Σ totals ≤ L v_c`, each total `≤ L`.
//!
//! Relabelling candidates within a contest, or exchanging equivalent
//! contests, maps secure decks to secure decks, so totals are enumerated in
//! canonical order only (increasing within a contest, increasing across
//! equivalent contests). For each total vector, decks are built ballot by
//! ballot in non-increasing order and checked exactly.

use alloc::vec;
use alloc::vec::Vec;

use crate::ballot::{Ballot, BallotStyle, Deck};
use crate::cut::ClassSearch;
use crate::error::bail;
use crate::master::RuleSet;
use crate::{Error, Result};

/// Limits for [`find_secure_deck`]. Exceeding one is an error, never an
/// answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Total vectors that reach the deck-building phase.
    pub vectors: u64,
    /// Deck-building search nodes, summed over all vectors.
    pub nodes: u64,
    /// Nodes per exact security check of one candidate deck.
    pub check_nodes: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { vectors: 1_000_000, nodes: 50_000_000, check_nodes: 10_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SearchReport {
    /// A secure deck of the requested length, if one exists.
    pub deck: Option<Deck>,
    pub vectors: u64,
    pub nodes: u64,
    pub decks_checked: u64,
}

/// Searches every deck of exactly `length` ballots satisfying `rules` (only
/// the vote-count rules matter) for one that detects every swap.
pub fn find_secure_deck(style: &BallotStyle, length: usize, rules: RuleSet, budget: SearchBudget) -> Result<SearchReport> {
    let n = style.num_candidates();
    if n > 128 {
        bail!(Capacity, "deck search supports at most 128 candidates");
    }
    let mut s = Search {
        style,
        length,
        lo: usize::from(rules.at_least_one_vote),
        budget,
        totals: vec![0; n],
        nc_used: vec![false; length + 1],
        report: SearchReport::default(),
    };
    s.totals_for_contest(0)?;
    Ok(s.report)
}

struct Search<'a> {
    style: &'a BallotStyle,
    length: usize,
    lo: usize,
    budget: SearchBudget,
    totals: Vec<usize>,
    nc_used: Vec<bool>,
    report: SearchReport,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.report.deck.is_some()
    }

    /// Phase one: choose an increasing total tuple for contest `c`.
    fn totals_for_contest(&mut self, c: usize) -> Result<()> {
        if c == self.style.num_contests() {
            return self.build_decks();
        }
        let contest = self.style.contest(c);
        let size = contest.len();
        let cap = contest.max_votes() * self.length;
        // Previous equivalent contest, whose tuple ours must exceed.
        let prev: Option<Vec<usize>> = (0..c).rev().find(|&d| {
            let o = self.style.contest(d);
            o.len() == size && o.max_votes() == contest.max_votes()
        }).map(|d| self.style.contest(d).candidates().iter().map(|&i| self.totals[i]).collect());
        let mut tuple = Vec::with_capacity(size);
        self.tuple_rec(c, &mut tuple, self.lo, 0, cap, prev.as_deref())
    }

    fn tuple_rec(
        &mut self,
        c: usize,
        tuple: &mut Vec<usize>,
        min: usize,
        sum: usize,
        cap: usize,
        prev: Option<&[usize]>,
    ) -> Result<()> {
        let contest = self.style.contest(c);
        let size = contest.len();
        let k = tuple.len();
        if k == size {
            if prev.is_some_and(|p| tuple[..] <= *p) {
                return Ok(());
            }
            for (&i, &t) in contest.candidates().iter().zip(tuple.iter()) {
                self.totals[i] = t;
            }
            return self.totals_for_contest(c + 1);
        }
        let nc = contest.is_noncompetitive();
        let left = size - k - 1;
        let mut t = min;
        while t + left <= self.length {
            // smallest completion: t, t+1, ..., t+left
            if sum + t * (left + 1) + left * (left + 1) / 2 > cap {
                break;
            }
            // lexicographic pruning against the previous equivalent contest
            if let Some(p) = prev {
                if tuple[..] == p[..k] && t < p[k] {
                    t += 1;
                    continue;
                }
            }
            if !(nc && self.nc_used[t]) {
                if nc {
                    self.nc_used[t] = true;
                }
                tuple.push(t);
                let r = self.tuple_rec(c, tuple, t + 1, sum + t, cap, prev);
                tuple.pop();
                if nc {
                    self.nc_used[t] = false;
                }
                r?;
                if self.done() {
                    return Ok(());
                }
            }
            t += 1;
        }
        Ok(())
    }

    /// Phase two: all canonical decks with the chosen totals.
    fn build_decks(&mut self) -> Result<()> {
        self.report.vectors += 1;
        if self.report.vectors > self.budget.vectors {
            bail!(BudgetExhausted, "more than {} total vectors", self.budget.vectors);
        }
        let need = self.totals.clone();
        let mut ballots = Vec::with_capacity(self.length);
        self.ballot_rec(&mut ballots, need, u128::MAX)
    }

    fn ballot_rec(&mut self, ballots: &mut Vec<u128>, need: Vec<usize>, prev: u128) -> Result<()> {
        self.report.nodes += 1;
        if self.report.nodes > self.budget.nodes {
            bail!(BudgetExhausted, "more than {} deck-building nodes", self.budget.nodes);
        }
        let r = self.length - ballots.len();
        if r == 0 {
            return self.check(ballots);
        }
        // Per-contest candidate subsets for this ballot.
        let mut options: Vec<Vec<u128>> = Vec::with_capacity(self.style.num_contests());
        for contest in self.style.contests() {
            let v = contest.max_votes();
            let remaining: usize = contest.candidates().iter().map(|&i| need[i]).sum();
            let forced: Vec<usize> = contest.candidates().iter().copied().filter(|&i| need[i] == r).collect();
            let free: Vec<usize> = contest.candidates().iter().copied().filter(|&i| need[i] > 0 && need[i] < r).collect();
            let min_marks = remaining.saturating_sub((r - 1) * v).max(forced.len());
            if forced.len() > v || min_marks > v {
                return Ok(());
            }
            let base: u128 = forced.iter().fold(0, |m, &i| m | (1u128 << i));
            let mut opts = Vec::new();
            subsets(&free, v - forced.len(), &mut |extra: u128, cnt: usize| {
                if forced.len() + cnt >= min_marks {
                    opts.push(base | extra);
                }
            });
            options.push(opts);
        }
        let mut choices: Vec<u128> = vec![0];
        for opts in &options {
            let mut next = Vec::with_capacity(choices.len() * opts.len());
            for &a in &choices {
                for &o in opts {
                    next.push(a | o);
                }
            }
            choices = next;
        }
        choices.retain(|&m| m <= prev);
        choices.sort_unstable_by(|a, b| b.cmp(a));
        for m in choices {
            let mut next = need.clone();
            let mut bits = m;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                next[i] -= 1;
                bits &= bits - 1;
            }
            ballots.push(m);
            let res = self.ballot_rec(ballots, next, m);
            ballots.pop();
            res?;
            if self.done() {
                return Ok(());
            }
        }
        Ok(())
    }

    fn check(&mut self, ballots: &[u128]) -> Result<()> {
        self.report.decks_checked += 1;
        let deck = Deck::new(
            ballots
                .iter()
                .map(|&m| Ballot::new((0..128).filter(|&i| m >> i & 1 == 1)))
                .collect(),
        );
        let mut cs = ClassSearch::new(self.style, &deck);
        match cs.run(self.budget.check_nodes) {
            Ok(None) => {
                self.report.deck = Some(deck);
                Ok(())
            }
            Ok(Some(_)) => Ok(()),
            Err(e @ Error::BudgetExhausted(_)) => Err(e),
            Err(e) => Err(e),
        }
    }
}

/// Calls `f(mask, size)` for every subset of `items` with at most `max`
/// elements.
fn subsets(items: &[usize], max: usize, f: &mut impl FnMut(u128, usize)) {
    fn rec(items: &[usize], max: usize, mask: u128, cnt: usize, f: &mut impl FnMut(u128, usize)) {
        match items.split_first() {
            None => f(mask, cnt),
            Some((&i, rest)) => {
                rec(rest, max, mask, cnt, f);
                if cnt < max {
                    rec(rest, max, mask | (1u128 << i), cnt + 1, f);
                }
            }
        }
    }
    rec(items, max, 0, 0, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cut::{brute_force_check, BRUTE_FORCE_CAP};
    use crate::samples::{president_senate, two_noncompetitive, two_pairs};

    fn exists(style: &BallotStyle, len: usize, rules: RuleSet) -> bool {
        find_secure_deck(style, len, rules, SearchBudget::default()).unwrap().deck.is_some()
    }

    #[test]
    fn noncompetitive_pair() {
        let s = two_noncompetitive();
        assert!(!exists(&s, 1, RuleSet::none()));
        assert!(exists(&s, 2, RuleSet::none()));
        assert!(!exists(&s, 2, RuleSet::michigan()));
        assert!(exists(&s, 3, RuleSet::michigan()));
    }

    #[test]
    fn two_pairs_needs_four() {
        let s = two_pairs();
        assert!(!exists(&s, 3, RuleSet::michigan()));
        let r = find_secure_deck(&s, 4, RuleSet::michigan(), SearchBudget::default()).unwrap();
        let deck = r.deck.unwrap();
        assert!(brute_force_check(&s, &deck, BRUTE_FORCE_CAP).unwrap().is_secure());
    }

    #[test]
    fn found_decks_are_secure() {
        let s = president_senate();
        for len in 1..=4 {
            let r = find_secure_deck(&s, len, RuleSet::at_least_one(), SearchBudget::default()).unwrap();
            if let Some(d) = r.deck {
                assert_eq!(d.len(), len);
                assert!(brute_force_check(&s, &d, BRUTE_FORCE_CAP).unwrap().is_secure());
            }
        }
    }

    #[test]
    fn subset_enumeration() {
        let mut seen = Vec::new();
        subsets(&[0, 2, 5], 2, &mut |m, c| seen.push((m, c)));
        assert_eq!(seen.len(), 7);
    }

    #[test]
    fn budget_is_an_error() {
        let s = president_senate();
        let tiny = SearchBudget { vectors: 1, nodes: 1, check_nodes: 1 };
        assert!(matches!(
            find_secure_deck(&s, 4, RuleSet::none(), tiny),
            Err(Error::BudgetExhausted(_))
        ));
    }
}
