//! Small reference styles and decks used in tests, docs and the CLI demo.

use alloc::string::ToString;
use alloc::vec;

use crate::ballot::{BallotStyle, Deck};

/// President (Washington, Jefferson, Lincoln; vote for 1) and Senate
/// (Webster, Clay; vote for 1).
pub fn president_senate() -> BallotStyle {
    BallotStyle::from_listing(
        "president-senate",
        [
            ("president", vec!["Washington".to_string(), "Jefferson".into(), "Lincoln".into()], 1),
            ("senate", vec!["Webster".to_string(), "Clay".into()], 1),
        ],
    )
    .expect("valid sample style")
}

/// The usual "distinct count per candidate" deck for [`president_senate`]:
/// `{Washington, Webster}`, two `{Jefferson, Clay}`, three `{Lincoln}`.
/// It gives totals (1, 2, 3, 1, 2) and hides the Jefferson/Clay swap.
pub fn heuristic_deck() -> Deck {
    Deck::from_marks(&[&[0, 3], &[1, 4], &[1, 4], &[2], &[2], &[2]])
}

/// One single-seat contest `{1}` and one two-seat contest `{2, 3}`. Both
/// contests are noncompetitive.
pub fn two_noncompetitive() -> BallotStyle {
    BallotStyle::from_shapes("noncompetitive-pair", &[(1, 1), (2, 2)]).expect("valid sample style")
}

/// Two contests with two candidates each, vote for one.
pub fn two_pairs() -> BallotStyle {
    BallotStyle::from_shapes("two-pairs", &[(2, 1), (2, 1)]).expect("valid sample style")
}
