use latdeck_core::bounds::triangular_deck;
use latdeck_core::cut::{brute_force_check, next_permutation, BRUTE_FORCE_CAP};
use latdeck_core::master::RuleSet;
use latdeck_core::normalize::translate_solution;
use latdeck_core::redteam::{hide_any_swap, rule_report};
use latdeck_core::samples::{two_noncompetitive, two_pairs};
use latdeck_core::search::{find_secure_deck, SearchBudget};
use latdeck_core::{Ballot, BallotStyle, Deck, Swap};

fn feasible_ballots(style: &BallotStyle) -> Vec<Ballot> {
    let n = style.num_candidates();
    (0u32..1 << n)
        .map(|mask| Ballot::new((0..n).filter(|i| mask >> i & 1 == 1)))
        .filter(|b| style.is_feasible(b).unwrap())
        .collect()
}

fn all_swaps(n: usize) -> Vec<Swap> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    while next_permutation(&mut perm) {
        out.push(Swap::new(perm.clone()).unwrap());
    }
    out
}

fn meets_rules(style: &BallotStyle, totals: &[usize], rules: RuleSet) -> bool {
    if rules.at_least_one_vote && totals.iter().any(|&t| t == 0) {
        return false;
    }
    if rules.distinct_within_contest {
        for c in style.contests() {
            let mut t: Vec<usize> = c.candidates().iter().map(|&i| totals[i]).collect();
            t.sort_unstable();
            if t.windows(2).any(|w| w[0] == w[1]) {
                return false;
            }
        }
    }
    true
}

/// Shortest secure deck by walking every multiset of feasible ballots and
/// comparing tallies under every swap directly.
fn shortest_secure(style: &BallotStyle, rules: RuleSet, max_len: usize) -> Option<usize> {
    let ballots = feasible_ballots(style);
    let swaps = all_swaps(style.num_candidates());
    for len in 1..=max_len {
        let mut idx = vec![0usize; len];
        loop {
            let deck = Deck::new(idx.iter().map(|&k| ballots[k].clone()).collect());
            let correct = style.tabulate_correct(&deck).unwrap();
            if meets_rules(style, correct.totals(), rules)
                && swaps.iter().all(|s| style.tabulate_swapped(&deck, s).unwrap() != correct)
            {
                return Some(len);
            }
            // next non-decreasing index vector
            let Some(p) = (0..len).rev().find(|&p| idx[p] + 1 < ballots.len()) else { break };
            let v = idx[p] + 1;
            idx[p..].fill(v);
        }
    }
    None
}

#[test]
fn search_matches_deck_enumeration() {
    let styles = [
        two_pairs(),
        two_noncompetitive(),
        BallotStyle::from_shapes("three", &[(3, 1)]).unwrap(),
        BallotStyle::from_shapes("pair-single", &[(2, 1), (1, 1)]).unwrap(),
        BallotStyle::from_shapes("three-two", &[(3, 2)]).unwrap(),
    ];
    for style in &styles {
        for rules in [RuleSet::none(), RuleSet::at_least_one(), RuleSet::michigan()] {
            let best = shortest_secure(style, rules, 6).unwrap_or_else(|| panic!("{} {rules:?}", style.id));
            let hit = find_secure_deck(style, best, rules, SearchBudget::default()).unwrap();
            let deck = hit.deck.expect("search misses a secure deck");
            assert!(brute_force_check(style, &deck, BRUTE_FORCE_CAP).unwrap().is_secure());
            if best > 1 {
                let miss = find_secure_deck(style, best - 1, rules, SearchBudget::default()).unwrap();
                assert!(miss.deck.is_none(), "{} {rules:?}", style.id);
            }
        }
    }
}

#[test]
fn singleton_deck_hides_every_swap() {
    for style in [two_pairs(), two_noncompetitive()] {
        for sigma in all_swaps(style.num_candidates()) {
            let deck = hide_any_swap(&style, &sigma).unwrap();
            let rep = rule_report(&style, &deck, &sigma).unwrap();
            assert!(rep.hidden && rep.at_least_one_vote);
        }
    }
}

#[test]
fn dropping_contests_keeps_triangular_decks_secure() {
    let style = BallotStyle::from_shapes("mixed", &[(3, 1), (2, 1), (2, 2)]).unwrap();
    let deck = triangular_deck(&style);
    assert!(brute_force_check(&style, &deck, BRUTE_FORCE_CAP).unwrap().is_secure());
    for removed in [&[0][..], &[1], &[2], &[0, 2]] {
        let t = translate_solution(&style, &deck, removed).unwrap();
        assert!(brute_force_check(&t.style, &t.deck, BRUTE_FORCE_CAP).unwrap().is_secure());
    }
}
