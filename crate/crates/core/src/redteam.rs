//! Adversarial decks: decks that satisfy common legal requirements yet hide
//! a chosen swap. They show why rule-compliant heuristics are not enough.

#[cfg(test)]
use alloc::vec;
use alloc::vec::Vec;

use crate::ballot::{Ballot, BallotStyle, Deck};
use crate::error::bail;
use crate::swap::Swap;
use crate::Result;

/// One singleton ballot per candidate. Every candidate gets exactly one
/// vote, and every swap produces the correct tally.
pub fn hide_any_swap(style: &BallotStyle, sigma: &Swap) -> Result<Deck> {
    style.check_swap(sigma)?;
    if sigma.is_identity() {
        bail!(InvalidInput, "nothing to hide: the swap is the identity");
    }
    Ok(Deck::new((0..style.num_candidates()).map(|i| Ballot::new([i])).collect()))
}

/// Deck built from the cycles of `sigma`: the k-th cycle (ordered by
/// smallest candidate, fixed points included) is marked on k ballots.
/// Requires every cycle to hold at most one candidate per contest; then
/// totals are positive and distinct within every contest, yet the swap is
/// hidden.
pub fn hide_cross_contest_swap(style: &BallotStyle, sigma: &Swap) -> Result<Deck> {
    style.check_swap(sigma)?;
    if sigma.is_identity() {
        bail!(InvalidInput, "nothing to hide: the swap is the identity");
    }
    let cycles = sigma.cycles();
    for cyc in &cycles {
        let mut contests: Vec<usize> = cyc.iter().map(|&i| style.contest_of(i)).collect();
        contests.sort_unstable();
        if contests.windows(2).any(|w| w[0] == w[1]) {
            bail!(
                NotApplicable,
                "a cycle of the swap visits contest {:?} twice",
                style.contest(contests.windows(2).find(|w| w[0] == w[1]).map(|w| w[0]).unwrap_or(0)).id
            );
        }
    }
    let mut deck = Deck::default();
    for (k, cyc) in cycles.iter().enumerate() {
        for _ in 0..=k {
            deck.push(Ballot::new(cyc.iter().copied()));
        }
    }
    Ok(deck)
}

/// Which legal requirements a deck meets, and whether it hides `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleReport {
    pub at_least_one_vote: bool,
    pub distinct_within_contest: bool,
    pub hidden: bool,
}

pub fn rule_report(style: &BallotStyle, deck: &Deck, sigma: &Swap) -> Result<RuleReport> {
    let totals = style.tabulate_correct(deck)?;
    let t = totals.totals();
    let distinct = style.contests().iter().all(|c| {
        let mut v: Vec<usize> = c.candidates().iter().map(|&i| t[i]).collect();
        v.sort_unstable();
        v.windows(2).all(|w| w[0] != w[1])
    });
    Ok(RuleReport {
        at_least_one_vote: t.iter().all(|&x| x > 0),
        distinct_within_contest: distinct,
        hidden: style.tabulate_swapped(deck, sigma)? == totals,
    })
}

/// Length of the [`hide_cross_contest_swap`] deck: `K(K+1)/2` for `K`
/// cycles.
pub fn cross_contest_deck_length(sigma: &Swap) -> usize {
    let k = sigma.cycles().len();
    k * (k + 1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cut::next_permutation;
    use crate::samples::president_senate;
    use crate::Error;

    #[test]
    fn singleton_deck_hides_every_swap() {
        let s = president_senate();
        let d = hide_any_swap(&s, &Swap::transposition(5, 0, 1)).unwrap();
        assert_eq!(d.len(), 5);
        let mut perm = vec![0, 1, 2, 3, 4];
        let mut hidden = 0;
        while next_permutation(&mut perm) {
            let sigma = Swap::new(perm.clone()).unwrap();
            let r = rule_report(&s, &d, &sigma).unwrap();
            assert!(r.hidden && r.at_least_one_vote);
            hidden += 1;
        }
        assert_eq!(hidden, 119);
    }

    #[test]
    fn cycle_deck_for_cross_transposition() {
        let s = president_senate();
        let sigma = Swap::transposition(5, 1, 4);
        let d = hide_cross_contest_swap(&s, &sigma).unwrap();
        assert_eq!(d.len(), 10);
        assert_eq!(cross_contest_deck_length(&sigma), 10);
        assert_eq!(s.tabulate_correct(&d).unwrap().0, [1, 2, 3, 4, 2]);
        let r = rule_report(&s, &d, &sigma).unwrap();
        assert_eq!(r, RuleReport { at_least_one_vote: true, distinct_within_contest: true, hidden: true });
    }

    #[test]
    fn same_contest_cycle_rejected() {
        let s = president_senate();
        let err = hide_cross_contest_swap(&s, &Swap::transposition(5, 0, 2)).unwrap_err();
        assert!(matches!(err, Error::NotApplicable(_)));
    }
}
