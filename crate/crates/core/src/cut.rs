//! Deck checking: search for a swap that a given deck fails to detect.
//!
//! The MILP has one binary `x[i][j]` per candidate pair with equal mark
//! counts (`x[i][j] = 1` iff the swap sends `i` to `j`). Pairs with unequal
//! counts are left out entirely, since any swap using one is detected.
//! Two enumeration oracles are provided for testing and certificates.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::ballot::{BallotStyle, Deck};
use crate::error::bail;
use crate::milp::{MilpSolver, Model, Relation, VarId, VarKind};
use crate::swap::{self, Swap};
use crate::{Error, Result};

/// Default candidate cap for [`brute_force_check`].
pub const BRUTE_FORCE_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Secure,
    Vulnerable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Milp,
    BruteForce,
    /// Enumeration restricted to swaps that preserve mark counts.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub witness: Option<Swap>,
    pub method: Method,
    /// Number of candidates the witness moves (the minimal-mode objective).
    pub moved_count: Option<usize>,
    /// Number of swaps examined by an enumeration method.
    pub scanned: Option<u64>,
    pub note: Option<String>,
}

impl CheckReport {
    fn secure(method: Method) -> Self {
        CheckReport { verdict: Verdict::Secure, witness: None, method, moved_count: None, scanned: None, note: None }
    }

    fn vulnerable(method: Method, sigma: Swap) -> Self {
        CheckReport {
            verdict: Verdict::Vulnerable,
            moved_count: Some(sigma.moved().len()),
            witness: Some(sigma),
            method,
            scanned: None,
            note: None,
        }
    }

    pub fn is_secure(&self) -> bool {
        self.verdict == Verdict::Secure
    }
}

fn trivial_report(style: &BallotStyle, method: Method) -> Option<CheckReport> {
    (style.num_candidates() < 2).then(|| CheckReport {
        note: Some("fewer than two candidates: no swap exists".into()),
        ..CheckReport::secure(method)
    })
}

/// The swap-search MILP for one deck.
#[derive(Debug, Clone)]
pub struct CutModel {
    pub model: Model,
    /// `(i, j, x[i][j])` for every pair with equal mark counts.
    pub pairs: Vec<(usize, usize, VarId)>,
    n: usize,
}

impl CutModel {
    /// Builds the model. With `minimal`, the objective counts moved
    /// candidates so an optimal solution is a minimal swap.
    pub fn build(style: &BallotStyle, deck: &Deck, minimal: bool) -> Result<Self> {
        style.require_feasible(deck)?;
        let n = style.num_candidates();
        let counts = deck.mark_counts(n);
        let mut model = Model::new("cut");
        let mut pairs = Vec::new();
        let mut var = vec![vec![None; n]; n];
        for i in 0..n {
            for j in 0..n {
                if counts[i] == counts[j] {
                    let x = model.add_var(format!("x_{i}_{j}"), VarKind::Binary);
                    var[i][j] = Some(x);
                    pairs.push((i, j, x));
                }
            }
        }
        for i in 0..n {
            let row: Vec<_> = var[i].iter().flatten().map(|&x| (x, 1.0)).collect();
            model.add_constraint(format!("row_{i}"), row, Relation::Eq, 1.0);
            let col: Vec<_> = (0..n).filter_map(|k| var[k][i]).map(|x| (x, 1.0)).collect();
            model.add_constraint(format!("col_{i}"), col, Relation::Eq, 1.0);
        }
        let diag: Vec<_> = (0..n).filter_map(|i| var[i][i]).map(|x| (x, 1.0)).collect();
        model.add_constraint("moves_two", diag, Relation::Le, (n - 2) as f64);

        let mut ballots: Vec<&[usize]> = deck.ballots().iter().map(|b| b.marks()).collect();
        ballots.sort_unstable();
        ballots.dedup();
        for (b, marks) in ballots.iter().enumerate() {
            for (c, contest) in style.contests().iter().enumerate() {
                let terms: Vec<_> = contest
                    .candidates()
                    .iter()
                    .flat_map(|&i| marks.iter().filter_map(move |&j| Some((i, j))))
                    .filter_map(|(i, j)| var[i][j])
                    .map(|x| (x, 1.0))
                    .collect();
                if terms.len() > contest.max_votes() {
                    model.add_constraint(format!("no_overvote_{b}_{c}"), terms, Relation::Le, contest.max_votes() as f64);
                }
            }
        }
        if minimal {
            let obj = pairs.iter().filter(|&&(i, j, _)| i != j).map(|&(_, _, x)| (x, 1.0)).collect();
            model.set_objective(obj);
        }
        Ok(CutModel { model, pairs, n })
    }

    pub fn decode(&self, values: &[f64]) -> Result<Swap> {
        let mut map = vec![usize::MAX; self.n];
        for &(i, j, x) in &self.pairs {
            if values[x.0] > 0.5 {
                map[i] = j;
            }
        }
        Swap::new(map).map_err(|_| Error::Internal("cut solution is not a permutation".into()))
    }
}

/// Searches for a swap the deck does not detect by solving the MILP.
///
/// `Secure` means the MILP is infeasible. A timeout is an error, never a
/// verdict. Witnesses are re-verified by direct tabulation.
pub fn find_undetected_swap<S: MilpSolver + ?Sized>(
    style: &BallotStyle,
    deck: &Deck,
    minimal: bool,
    time_limit: Option<f64>,
    solver: &S,
) -> Result<CheckReport> {
    style.require_feasible(deck)?;
    if let Some(r) = trivial_report(style, Method::Milp) {
        return Ok(r);
    }
    let mut cut = CutModel::build(style, deck, minimal)?;
    cut.model.params.time_limit = time_limit;
    let Some(values) = solver.solve(&cut.model).into_result()? else {
        return Ok(CheckReport::secure(Method::Milp));
    };
    let sigma = cut.decode(&values)?;
    verify_hidden(style, deck, &sigma)?;
    if minimal && !swap::is_minimal(style, &sigma)? {
        bail!(Internal, "minimal-mode witness has a disconnected contest graph");
    }
    Ok(CheckReport::vulnerable(Method::Milp, sigma))
}

/// Fails with an internal error unless `sigma` is a non-identity swap whose
/// tally equals the correct tally on `deck`.
pub fn verify_hidden(style: &BallotStyle, deck: &Deck, sigma: &Swap) -> Result<()> {
    if sigma.is_identity() {
        bail!(Internal, "witness is the identity");
    }
    if style.tabulate_swapped(deck, sigma)? != style.tabulate_correct(deck)? {
        bail!(Internal, "witness swap is detected by the deck");
    }
    Ok(())
}

/// Tries every non-identity permutation and compares tallies directly.
/// Reports the undetected swap moving the fewest candidates (first in
/// lexicographic order among ties).
pub fn brute_force_check(style: &BallotStyle, deck: &Deck, cap: usize) -> Result<CheckReport> {
    let n = style.num_candidates();
    if n > cap {
        bail!(Capacity, "brute force refuses {n} candidates (cap {cap})");
    }
    style.require_feasible(deck)?;
    if let Some(r) = trivial_report(style, Method::BruteForce) {
        return Ok(r);
    }
    let correct = style.tabulate_correct(deck)?;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Swap> = None;
    let mut scanned = 0u64;
    while next_permutation(&mut perm) {
        scanned += 1;
        let sigma = Swap::new(perm.clone())?;
        if style.tabulate_swapped(deck, &sigma)? == correct
            && best.as_ref().is_none_or(|b| sigma.moved().len() < b.moved().len())
        {
            best = Some(sigma);
        }
    }
    // Lexicographic enumeration from the identity visits every other
    // permutation exactly once.
    let mut report = match best {
        Some(sigma) => CheckReport::vulnerable(Method::BruteForce, sigma),
        None => CheckReport::secure(Method::BruteForce),
    };
    report.scanned = Some(scanned);
    Ok(report)
}

/// Rearranges into the next permutation in lexicographic order; returns
/// false (leaving the slice sorted descending) after the last one.
pub fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Exact check for larger styles. A swap mapping candidates with different
/// mark counts is always detected, so only swaps permuting candidates within
/// equal-count classes are enumerated, with pruning as soon as a partial
/// swap already forces an overvote. Leaves are confirmed by direct
/// tabulation. Gives up with [`Error::BudgetExhausted`] after `node_budget`
/// search nodes.
pub fn exhaustive_check(style: &BallotStyle, deck: &Deck, node_budget: u64) -> Result<CheckReport> {
    style.require_feasible(deck)?;
    if let Some(r) = trivial_report(style, Method::Exhaustive) {
        return Ok(r);
    }
    let mut search = ClassSearch::new(style, deck);
    let found = search.run(node_budget)?;
    let mut report = match found {
        Some(sigma) => {
            verify_hidden(style, deck, &sigma)?;
            CheckReport::vulnerable(Method::Exhaustive, sigma)
        }
        None => CheckReport::secure(Method::Exhaustive),
    };
    report.scanned = Some(search.nodes);
    Ok(report)
}

/// Backtracking over count-preserving swaps.
pub(crate) struct ClassSearch<'a> {
    style: &'a BallotStyle,
    /// Ballots as marked-target bitsets over candidates.
    ballots: Vec<Vec<bool>>,
    /// `seen[b][c]`: marks the machine reads in contest `c` of ballot `b`
    /// under the partial swap.
    seen: Vec<Vec<usize>>,
    /// Candidates grouped by contest, so a contest fills up early.
    order: Vec<usize>,
    class: Vec<usize>,
    used: Vec<bool>,
    map: Vec<usize>,
    correct: Vec<usize>,
    deck: &'a Deck,
    pub(crate) nodes: u64,
}

impl<'a> ClassSearch<'a> {
    pub(crate) fn new(style: &'a BallotStyle, deck: &'a Deck) -> Self {
        let n = style.num_candidates();
        let counts = deck.mark_counts(n);
        let mut ballots: Vec<Vec<bool>> = deck
            .ballots()
            .iter()
            .map(|b| {
                let mut m = vec![false; n];
                b.marks().iter().for_each(|&i| m[i] = true);
                m
            })
            .collect();
        ballots.sort_unstable();
        ballots.dedup();
        let order: Vec<usize> = style.contests().iter().flat_map(|c| c.candidates().iter().copied()).collect();
        let seen = vec![vec![0; style.num_contests()]; ballots.len()];
        let correct = style.tabulate_correct(deck).map(|t| t.0).unwrap_or_default();
        ClassSearch {
            style,
            ballots,
            seen,
            order,
            class: counts,
            used: vec![false; n],
            map: vec![usize::MAX; n],
            correct,
            deck,
            nodes: 0,
        }
    }

    pub(crate) fn run(&mut self, budget: u64) -> Result<Option<Swap>> {
        self.nodes = 0;
        self.dfs(0, budget)
    }

    fn dfs(&mut self, depth: usize, budget: u64) -> Result<Option<Swap>> {
        self.nodes += 1;
        if self.nodes > budget {
            bail!(BudgetExhausted, "count-preserving swap search exceeded {budget} nodes");
        }
        let n = self.map.len();
        if depth == n {
            let sigma = Swap::new(self.map.clone())?;
            if sigma.is_identity() {
                return Ok(None);
            }
            let t = self.style.tabulate_swapped(self.deck, &sigma)?;
            return Ok((t.0 == self.correct).then_some(sigma));
        }
        let i = self.order[depth];
        let c = self.style.contest_of(i);
        let cap = self.style.contest(c).max_votes();
        // Try the fixed point first so the identity branch is explored early
        // and witnesses tend to move few candidates.
        let targets = core::iter::once(i).chain((0..n).filter(move |&j| j != i));
        for j in targets.collect::<Vec<_>>() {
            if self.used[j] || self.class[j] != self.class[i] {
                continue;
            }
            let mut ok = true;
            for b in 0..self.ballots.len() {
                if self.ballots[b][j] {
                    self.seen[b][c] += 1;
                    if self.seen[b][c] > cap {
                        ok = false;
                    }
                }
            }
            if ok {
                self.used[j] = true;
                self.map[i] = j;
                let r = self.dfs(depth + 1, budget);
                self.used[j] = false;
                self.map[i] = usize::MAX;
                if !matches!(r, Ok(None)) {
                    self.undo(j, c);
                    return r;
                }
            }
            self.undo(j, c);
        }
        Ok(None)
    }

    fn undo(&mut self, j: usize, c: usize) {
        for b in 0..self.ballots.len() {
            if self.ballots[b][j] {
                self.seen[b][c] -= 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::EnumerationSolver;
    use crate::samples::{heuristic_deck, president_senate, two_noncompetitive};

    #[test]
    fn heuristic_deck_is_vulnerable() {
        let s = president_senate();
        let d = heuristic_deck();
        let r = brute_force_check(&s, &d, BRUTE_FORCE_CAP).unwrap();
        assert_eq!(r.verdict, Verdict::Vulnerable);
        assert_eq!(r.scanned, Some(119));
        assert_eq!(r.witness.unwrap(), Swap::transposition(5, 1, 4));
        let e = exhaustive_check(&s, &d, 1_000_000).unwrap();
        assert_eq!(e.verdict, Verdict::Vulnerable);
    }

    #[test]
    fn merged_example_deck_is_secure() {
        let s = two_noncompetitive();
        for d in [Deck::from_marks(&[&[1, 2], &[2]]), Deck::from_marks(&[&[2], &[1, 2]])] {
            assert!(brute_force_check(&s, &d, BRUTE_FORCE_CAP).unwrap().is_secure());
            assert!(exhaustive_check(&s, &d, 1_000).unwrap().is_secure());
        }
    }

    #[test]
    fn cut_model_pairs_follow_counts() {
        let s = president_senate();
        let cut = CutModel::build(&s, &heuristic_deck(), true).unwrap();
        // counts (1,2,3,1,2): classes {0,3}, {1,4}, {2} give 4 + 4 + 1 pairs
        assert_eq!(cut.pairs.len(), 9);
        let r = find_undetected_swap(&s, &heuristic_deck(), true, None, &EnumerationSolver::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Vulnerable);
        assert_eq!(r.moved_count, Some(2));
    }

    #[test]
    fn capacity_and_singletons() {
        let big = BallotStyle::from_shapes("big", &[(9, 1)]).unwrap();
        assert!(matches!(brute_force_check(&big, &Deck::default(), 8), Err(Error::Capacity(_))));
        let one = BallotStyle::from_shapes("one", &[(1, 1)]).unwrap();
        let r = brute_force_check(&one, &Deck::default(), 8).unwrap();
        assert!(r.is_secure() && r.note.is_some());
    }

    #[test]
    fn permutation_enumeration_counts() {
        let mut p = [0, 1, 2, 3];
        let mut k = 0;
        while next_permutation(&mut p) {
            k += 1;
        }
        assert_eq!(k, 23);
    }
}
