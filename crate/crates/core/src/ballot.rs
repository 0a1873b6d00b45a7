//! Ballot styles, filled-out ballots, decks and the two tabulation rules.
//!
//! Candidates are identified by dense 0-based indices `0..N` (file formats
//! use 1-based indices; conversion happens at the IO boundary). Each
//! candidate belongs to exactly one contest.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::bail;
use crate::swap::Swap;
use crate::Result;

/// One contest: a set of candidates and a vote cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contest {
    pub id: String,
    candidates: Vec<usize>,
    max_votes: usize,
}

impl Contest {
    pub fn new(id: impl Into<String>, mut candidates: Vec<usize>, max_votes: usize) -> Result<Self> {
        let id = id.into();
        candidates.sort_unstable();
        if candidates.is_empty() {
            bail!(InvalidInput, "contest {id:?} has no candidates");
        }
        if candidates.windows(2).any(|w| w[0] == w[1]) {
            bail!(InvalidInput, "contest {id:?} lists a candidate twice");
        }
        if max_votes == 0 || max_votes > candidates.len() {
            bail!(
                InvalidInput,
                "contest {id:?}: vote cap {max_votes} outside 1..={}",
                candidates.len()
            );
        }
        Ok(Contest { id, candidates, max_votes })
    }

    /// Candidates in increasing index order; `candidates()[k]` is the
    /// candidate of rank `k` within the contest.
    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn max_votes(&self) -> usize {
        self.max_votes
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// A contest is noncompetitive when every candidate can be selected.
    pub fn is_noncompetitive(&self) -> bool {
        self.candidates.len() == self.max_votes
    }
}

/// A ballot style: contests partitioning the candidates `0..N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallotStyle {
    pub id: String,
    contests: Vec<Contest>,
    names: Vec<String>,
    contest_of: Vec<usize>,
}

impl BallotStyle {
    /// Builds a style from contests given as `(contest_id, candidate names,
    /// max_votes)`, assigning candidate indices in listing order.
    pub fn from_listing<I, S>(id: impl Into<String>, listing: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<String>, usize)>,
        S: Into<String>,
    {
        let mut contests = Vec::new();
        let mut names = Vec::new();
        for (cid, cands, v) in listing {
            let start = names.len();
            names.extend(cands);
            contests.push(Contest::new(cid, (start..names.len()).collect(), v)?);
        }
        Self::new(id, contests, names)
    }

    /// Builds a style from explicit contests over candidates `0..names.len()`.
    pub fn new(id: impl Into<String>, contests: Vec<Contest>, names: Vec<String>) -> Result<Self> {
        let n = names.len();
        let mut contest_of = vec![usize::MAX; n];
        for (c, contest) in contests.iter().enumerate() {
            for &i in contest.candidates() {
                if i >= n {
                    bail!(InvalidInput, "candidate index {i} out of range 0..{n}");
                }
                if contest_of[i] != usize::MAX {
                    bail!(InvalidInput, "candidate {i} appears in more than one contest");
                }
                contest_of[i] = c;
            }
        }
        if let Some(i) = contest_of.iter().position(|&c| c == usize::MAX) {
            bail!(InvalidInput, "candidate {i} belongs to no contest");
        }
        if n == 0 {
            bail!(InvalidInput, "style has no candidates");
        }
        Ok(BallotStyle { id: id.into(), contests, names, contest_of })
    }

    /// Convenience constructor from `(size, max_votes)` shapes, with
    /// generated names. Candidates are numbered consecutively.
    pub fn from_shapes(id: impl Into<String>, shapes: &[(usize, usize)]) -> Result<Self> {
        let mut listing = Vec::new();
        let mut next = 1;
        for (c, &(size, v)) in shapes.iter().enumerate() {
            let cands = (next..next + size).map(|i| alloc::format!("cand{i}")).collect();
            next += size;
            listing.push((alloc::format!("contest{}", c + 1), cands, v));
        }
        Self::from_listing(id, listing)
    }

    pub fn contests(&self) -> &[Contest] {
        &self.contests
    }

    pub fn contest(&self, c: usize) -> &Contest {
        &self.contests[c]
    }

    pub fn num_contests(&self) -> usize {
        self.contests.len()
    }

    pub fn num_candidates(&self) -> usize {
        self.names.len()
    }

    pub fn candidate_name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn candidate_names(&self) -> &[String] {
        &self.names
    }

    /// Contest containing candidate `i`.
    pub fn contest_of(&self, i: usize) -> usize {
        self.contest_of[i]
    }

    /// True iff the ballot overvotes no contest.
    pub fn is_feasible(&self, ballot: &Ballot) -> Result<bool> {
        self.check_ballot(ballot)?;
        let mut marks = vec![0usize; self.contests.len()];
        for &i in ballot.marks() {
            marks[self.contest_of[i]] += 1;
        }
        Ok(marks.iter().zip(&self.contests).all(|(&m, c)| m <= c.max_votes))
    }

    pub fn check_ballot(&self, ballot: &Ballot) -> Result<()> {
        match ballot.marks().last() {
            Some(&i) if i >= self.num_candidates() => {
                bail!(InvalidInput, "ballot marks unknown candidate index {i}")
            }
            _ => Ok(()),
        }
    }

    pub fn check_deck(&self, deck: &Deck) -> Result<()> {
        deck.ballots().iter().try_for_each(|b| self.check_ballot(b))
    }

    /// Returns an error naming the first ballot that overvotes a contest.
    pub fn require_feasible(&self, deck: &Deck) -> Result<()> {
        for (b, ballot) in deck.ballots().iter().enumerate() {
            if !self.is_feasible(ballot)? {
                bail!(Precondition, "ballot {} overvotes a contest", b + 1);
            }
        }
        Ok(())
    }

    pub fn check_swap(&self, sigma: &Swap) -> Result<()> {
        if sigma.len() != self.num_candidates() {
            bail!(
                InvalidInput,
                "swap acts on {} candidates but the style has {}",
                sigma.len(),
                self.num_candidates()
            );
        }
        Ok(())
    }

    /// Tally of a correctly configured machine. Marks in an overvoted
    /// contest are discarded.
    pub fn tabulate_correct(&self, deck: &Deck) -> Result<Tally> {
        self.check_deck(deck)?;
        let mut totals = vec![0usize; self.num_candidates()];
        let mut marks = vec![0usize; self.contests.len()];
        for ballot in deck.ballots() {
            marks.iter_mut().for_each(|m| *m = 0);
            for &i in ballot.marks() {
                marks[self.contest_of[i]] += 1;
            }
            for &i in ballot.marks() {
                let c = self.contest_of[i];
                if marks[c] <= self.contests[c].max_votes {
                    totals[i] += 1;
                }
            }
        }
        Ok(Tally(totals))
    }

    /// Tally of a machine whose target for candidate `i` is `sigma(i)`:
    /// candidate `i` is credited when target `sigma(i)` is marked and the
    /// machine does not see an overvote in `i`'s contest.
    pub fn tabulate_swapped(&self, deck: &Deck, sigma: &Swap) -> Result<Tally> {
        self.check_deck(deck)?;
        self.check_swap(sigma)?;
        let n = self.num_candidates();
        let mut totals = vec![0usize; n];
        let mut marked = vec![false; n];
        for ballot in deck.ballots() {
            for &t in ballot.marks() {
                marked[t] = true;
            }
            for contest in &self.contests {
                let seen = contest.candidates.iter().filter(|&&j| marked[sigma.apply(j)]).count();
                if seen <= contest.max_votes {
                    for &i in &contest.candidates {
                        if marked[sigma.apply(i)] {
                            totals[i] += 1;
                        }
                    }
                }
            }
            for &t in ballot.marks() {
                marked[t] = false;
            }
        }
        Ok(Tally(totals))
    }

    /// Whether a feasible deck detects the swap, decided by the two
    /// structural conditions: some candidate and its image have different
    /// mark counts, or the swap makes the machine see an overvote.
    pub fn detects(&self, deck: &Deck, sigma: &Swap) -> Result<bool> {
        self.check_swap(sigma)?;
        if sigma.is_identity() {
            bail!(InvalidInput, "detection is undefined for the identity swap");
        }
        self.require_feasible(deck)?;
        Ok(detects_unchecked(self, deck, sigma))
    }
}

/// Detection test without validation; callers guarantee a feasible deck
/// and a swap of matching size.
pub(crate) fn detects_unchecked(style: &BallotStyle, deck: &Deck, sigma: &Swap) -> bool {
    let counts = deck.mark_counts(style.num_candidates());
    if (0..counts.len()).any(|i| counts[i] != counts[sigma.apply(i)]) {
        return true;
    }
    swap_overvotes(style, deck, sigma)
}

/// True iff some ballot shows more than `v_c` marks in some contest `c`
/// once targets are read through `sigma`.
pub(crate) fn swap_overvotes(style: &BallotStyle, deck: &Deck, sigma: &Swap) -> bool {
    let mut marked = vec![false; style.num_candidates()];
    for ballot in deck.ballots() {
        for &t in ballot.marks() {
            marked[t] = true;
        }
        let over = style.contests().iter().any(|contest| {
            contest.candidates().iter().filter(|&&j| marked[sigma.apply(j)]).count()
                > contest.max_votes()
        });
        for &t in ballot.marks() {
            marked[t] = false;
        }
        if over {
            return true;
        }
    }
    false
}

/// A filled-out ballot: the set of marked targets, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Ballot(Vec<usize>);

impl Ballot {
    pub fn new(marks: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = marks.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Ballot(v)
    }

    pub fn empty() -> Self {
        Ballot(Vec::new())
    }

    pub fn marks(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A sequence of ballots. Order matters only for reporting.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Deck(Vec<Ballot>);

impl Deck {
    pub fn new(ballots: Vec<Ballot>) -> Self {
        Deck(ballots)
    }

    pub fn from_marks(ballots: &[&[usize]]) -> Self {
        Deck(ballots.iter().map(|b| Ballot::new(b.iter().copied())).collect())
    }

    pub fn ballots(&self) -> &[Ballot] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, ballot: Ballot) {
        self.0.push(ballot);
    }

    pub fn into_ballots(self) -> Vec<Ballot> {
        self.0
    }

    /// Number of ballots marking each candidate (ignores overvotes).
    pub fn mark_counts(&self, n: usize) -> Vec<usize> {
        let mut counts = vec![0usize; n];
        for b in &self.0 {
            for &i in b.marks() {
                counts[i] += 1;
            }
        }
        counts
    }
}

/// Per-candidate vote totals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tally(pub Vec<usize>);

impl Tally {
    pub fn totals(&self) -> &[usize] {
        &self.0
    }
}
