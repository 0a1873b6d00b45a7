//! Overvoted ballots appended to an optimised deck to satisfy laws that
//! require one, and the weaker notion of detection they rely on.

use alloc::vec::Vec;

use crate::ballot::{swap_overvotes, Ballot, BallotStyle, Deck};
use crate::swap::Swap;
use crate::Result;

/// Ballot marking every candidate.
pub fn full_overvote_ballot(style: &BallotStyle) -> Ballot {
    Ballot::new(0..style.num_candidates())
}

/// Ballot with exactly `v_c + 1` marks (the lowest-indexed candidates) in
/// every competitive contest and none elsewhere.
pub fn exact_overvote_ballot(style: &BallotStyle) -> Ballot {
    let mut marks = Vec::new();
    for contest in style.contests().iter().filter(|c| !c.is_noncompetitive()) {
        marks.extend_from_slice(&contest.candidates()[..contest.max_votes() + 1]);
    }
    Ballot::new(marks)
}

/// True when some ballot that overvotes nothing under the correct mapping
/// is read as an overvote under `sigma`.
pub fn overvote_alert(style: &BallotStyle, deck: &Deck, sigma: &Swap) -> Result<bool> {
    style.check_swap(sigma)?;
    style.check_deck(deck)?;
    let feasible: Vec<Ballot> =
        deck.ballots().iter().filter(|b| style.is_feasible(b).unwrap_or(false)).cloned().collect();
    Ok(swap_overvotes(style, &Deck::new(feasible), sigma))
}

/// A machine with mapping `sigma` is told apart from a correct one: the
/// tallies differ, or a feasible ballot raises an overvote alert.
pub fn distinguishes(style: &BallotStyle, deck: &Deck, sigma: &Swap) -> Result<bool> {
    Ok(style.tabulate_swapped(deck, sigma)? != style.tabulate_correct(deck)? || overvote_alert(style, deck, sigma)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::triangular_deck;
    use crate::cut::next_permutation;
    use crate::samples::{president_senate, two_noncompetitive};

    #[test]
    fn ballot_shapes() {
        let s = president_senate();
        assert_eq!(full_overvote_ballot(&s).marks(), [0, 1, 2, 3, 4]);
        assert_eq!(exact_overvote_ballot(&s).marks(), [0, 1, 3, 4]);
        assert!(exact_overvote_ballot(&two_noncompetitive()).is_empty());
    }

    #[test]
    fn appended_ballots_keep_secure_deck_secure() {
        let s = president_senate();
        let base = triangular_deck(&s);
        for extra in [full_overvote_ballot(&s), exact_overvote_ballot(&s)] {
            let mut deck = base.clone();
            deck.push(extra);
            let mut perm: Vec<usize> = (0..5).collect();
            while next_permutation(&mut perm) {
                let sigma = Swap::new(perm.clone()).unwrap();
                assert!(distinguishes(&s, &deck, &sigma).unwrap());
            }
        }
    }
}
