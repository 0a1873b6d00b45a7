//! Style transformations that preserve optimal decks: merging
//! noncompetitive contests, the canonical normal form used to deduplicate
//! styles, and translation of a secure deck to a style with fewer contests.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::ballot::{Ballot, BallotStyle, Contest, Deck};
use crate::error::bail;
use crate::Result;

/// A style whose noncompetitive contests have been fused into one contest
/// (placed first) that allows a vote for every one of its candidates.
/// Candidate indices are unchanged, so decks need no remapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedStyle {
    pub style: BallotStyle,
    pub original: BallotStyle,
    /// Whether the first contest of `style` is the merged contest.
    pub has_merged: bool,
    /// For each contest of `style`, the original contests it came from.
    pub origin: Vec<Vec<usize>>,
}

/// Merges all noncompetitive contests into a single contest. A swap yields
/// the same tally on the merged style as on the original for every deck.
pub fn merge_noncompetitive(style: &BallotStyle) -> NormalizedStyle {
    let nc: Vec<usize> = (0..style.num_contests()).filter(|&c| style.contest(c).is_noncompetitive()).collect();
    let mut contests = Vec::new();
    let mut origin = Vec::new();
    if !nc.is_empty() {
        let cands: Vec<usize> = nc.iter().flat_map(|&c| style.contest(c).candidates().iter().copied()).collect();
        let v = cands.len();
        contests.push(Contest::new("noncompetitive", cands, v).expect("merged contest is valid"));
        origin.push(nc.clone());
    }
    for (c, contest) in style.contests().iter().enumerate() {
        if !contest.is_noncompetitive() {
            contests.push(contest.clone());
            origin.push(vec![c]);
        }
    }
    let merged = BallotStyle::new(style.id.clone(), contests, style.candidate_names().to_vec())
        .expect("merging keeps a partition of the candidates");
    NormalizedStyle { style: merged, original: style.clone(), has_merged: !nc.is_empty(), origin }
}

/// Dedup key of a style: competitive contest shapes `(size, max_votes)`
/// sorted descending, plus the number of candidates in noncompetitive
/// contests.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShapeKey {
    pub competitive: Vec<(usize, usize)>,
    pub noncompetitive: usize,
}

impl ShapeKey {
    pub fn of(style: &BallotStyle) -> ShapeKey {
        let mut competitive: Vec<(usize, usize)> = style
            .contests()
            .iter()
            .filter(|c| !c.is_noncompetitive())
            .map(|c| (c.len(), c.max_votes()))
            .collect();
        competitive.sort_unstable_by(|a, b| b.cmp(a));
        let noncompetitive = style.contests().iter().filter(|c| c.is_noncompetitive()).map(|c| c.len()).sum();
        ShapeKey { competitive, noncompetitive }
    }

    /// True when a secure deck for a style with key `self` translates to one
    /// for a style with key `target`: the target's competitive shapes form a
    /// sub-multiset of ours and it has no more noncompetitive candidates.
    pub fn covers(&self, target: &ShapeKey) -> bool {
        if target.noncompetitive > self.noncompetitive {
            return false;
        }
        let mut pool = self.competitive.clone();
        for shape in &target.competitive {
            match pool.iter().position(|s| s == shape) {
                Some(k) => {
                    pool.swap_remove(k);
                }
                None => return false,
            }
        }
        true
    }

    pub fn competitive_count(&self) -> usize {
        self.competitive.len()
    }

    /// Total number of candidates.
    pub fn num_candidates(&self) -> usize {
        self.competitive.iter().map(|s| s.0).sum::<usize>() + self.noncompetitive
    }
}

/// Canonical relabelled form of a style: noncompetitive contests merged,
/// contests sorted by size then vote cap (both descending), and candidates
/// renumbered consecutively in that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub style: BallotStyle,
    pub key: ShapeKey,
    /// `to_original[k]` is the original index of normal-form candidate `k`.
    pub to_original: Vec<usize>,
}

pub fn normal_form(style: &BallotStyle) -> NormalForm {
    let merged = merge_noncompetitive(style).style;
    let mut order: Vec<usize> = (0..merged.num_contests()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (merged.contest(a), merged.contest(b));
        (cb.len(), cb.max_votes()).cmp(&(ca.len(), ca.max_votes()))
    });
    let mut to_original = Vec::with_capacity(merged.num_candidates());
    let mut contests = Vec::new();
    for (pos, &c) in order.iter().enumerate() {
        let contest = merged.contest(c);
        let start = to_original.len();
        to_original.extend_from_slice(contest.candidates());
        let id = format!("c{}", pos + 1);
        contests.push(Contest::new(id, (start..to_original.len()).collect(), contest.max_votes()).expect("valid"));
    }
    let names = (1..=to_original.len()).map(|k| format!("n{k}")).collect();
    let key = ShapeKey::of(style);
    let style = BallotStyle::new(format!("normal:{}", style.id), contests, names).expect("valid");
    NormalForm { style, key, to_original }
}

impl NormalForm {
    /// Maps a deck over normal-form candidates to original candidates.
    pub fn deck_to_original(&self, deck: &Deck) -> Deck {
        relabel(deck, &self.to_original)
    }

    pub fn deck_from_original(&self, deck: &Deck) -> Deck {
        let mut inv = vec![0; self.to_original.len()];
        for (k, &i) in self.to_original.iter().enumerate() {
            inv[i] = k;
        }
        relabel(deck, &inv)
    }
}

/// Applies `map` to every mark of every ballot.
pub fn relabel(deck: &Deck, map: &[usize]) -> Deck {
    Deck::new(deck.ballots().iter().map(|b| Ballot::new(b.marks().iter().map(|&i| map[i]))).collect())
}

/// Result of removing candidates from a style and its deck.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translated {
    pub style: BallotStyle,
    pub deck: Deck,
    /// `to_source[k]` is the source index of reduced candidate `k`.
    pub to_source: Vec<usize>,
}

/// Drops the given contests from the style and strips their candidates from
/// every ballot. A secure deck stays secure for the reduced style (it need
/// not be minimal).
pub fn translate_solution(source: &BallotStyle, deck: &Deck, removed_contests: &[usize]) -> Result<Translated> {
    let mut removed = Vec::new();
    for &c in removed_contests {
        if c >= source.num_contests() {
            bail!(InvalidInput, "contest {c} does not exist");
        }
        removed.extend_from_slice(source.contest(c).candidates());
    }
    strip_candidates(source, deck, &removed)
}

/// Removes candidates from a style and deck. A contest may lose only some
/// of its candidates if it is noncompetitive (it behaves like independent
/// single-seat contests); contests losing all candidates disappear.
pub fn strip_candidates(source: &BallotStyle, deck: &Deck, removed: &[usize]) -> Result<Translated> {
    source.require_feasible(deck)?;
    let n = source.num_candidates();
    let mut gone = vec![false; n];
    for &i in removed {
        if i >= n {
            bail!(InvalidInput, "candidate {i} does not exist");
        }
        gone[i] = true;
    }
    let mut new_index = vec![usize::MAX; n];
    let mut to_source = Vec::new();
    let mut contests = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for contest in source.contests() {
        let kept: Vec<usize> = contest.candidates().iter().copied().filter(|&i| !gone[i]).collect();
        if kept.is_empty() {
            continue;
        }
        let v = if kept.len() == contest.len() {
            contest.max_votes()
        } else if contest.is_noncompetitive() {
            kept.len()
        } else {
            bail!(
                Precondition,
                "contest {:?} is competitive and can only be removed whole",
                contest.id
            );
        };
        let start = to_source.len();
        for &i in &kept {
            new_index[i] = to_source.len();
            to_source.push(i);
            names.push(source.candidate_name(i).into());
        }
        contests.push(Contest::new(contest.id.clone(), (start..to_source.len()).collect(), v)?);
    }
    if to_source.is_empty() {
        bail!(InvalidInput, "translation would remove every candidate");
    }
    let style = BallotStyle::new(source.id.clone(), contests, names)?;
    let deck = Deck::new(
        deck.ballots()
            .iter()
            .map(|b| Ballot::new(b.marks().iter().filter(|&&i| !gone[i]).map(|&i| new_index[i])))
            .collect(),
    );
    Ok(Translated { style, deck, to_source })
}
