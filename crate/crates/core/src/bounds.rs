//! Constructive upper bounds: decks giving every candidate a distinct
//! positive vote total are always secure.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::ballot::{Ballot, BallotStyle, Deck};
use crate::error::bail;
use crate::milp::{MilpSolver, Model, Relation, VarId, VarKind};
use crate::{Error, Result};

/// Candidate `i` (0-based) alone on `i + 1` ballots: `N(N+1)/2` ballots in
/// total.
pub fn triangular_deck(style: &BallotStyle) -> Deck {
    let n = style.num_candidates();
    let mut deck = Deck::default();
    for i in 0..n {
        for _ in 0..=i {
            deck.push(Ballot::new([i]));
        }
    }
    deck
}

/// The distinct-votes MILP: choose which vote totals `1..=N` each contest
/// receives so that the longest contest (`Σ totals / v_c`, at least `N`)
/// is as short as possible.
#[derive(Debug, Clone)]
pub struct DistinctVotesModel {
    pub model: Model,
    /// `gamma[c][g - 1]`: contest `c` has a candidate with exactly `g` votes.
    pub gamma: Vec<Vec<VarId>>,
    pub length: VarId,
}

impl DistinctVotesModel {
    pub fn build(style: &BallotStyle) -> Self {
        let n = style.num_candidates();
        let mut m = Model::new("distinct_votes");
        let gamma: Vec<Vec<VarId>> = (0..style.num_contests())
            .map(|c| (1..=n).map(|g| m.add_var(format!("gamma_{c}_{g}"), VarKind::Binary)).collect())
            .collect();
        let length = m.add_var("B", VarKind::Integer);
        for (c, contest) in style.contests().iter().enumerate() {
            m.add_constraint(
                format!("size_{c}"),
                gamma[c].iter().map(|&v| (v, 1.0)).collect(),
                Relation::Eq,
                contest.len() as f64,
            );
            // v_c B >= Σ g gamma[c][g]
            let mut terms = vec![(length, contest.max_votes() as f64)];
            terms.extend(gamma[c].iter().enumerate().map(|(k, &v)| (v, -((k + 1) as f64))));
            m.add_constraint(format!("fits_{c}"), terms, Relation::Ge, 0.0);
        }
        for g in 0..n {
            m.add_constraint(format!("used_{}", g + 1), gamma.iter().map(|row| (row[g], 1.0)).collect(), Relation::Eq, 1.0);
        }
        m.add_constraint("at_least_n", vec![(length, 1.0)], Relation::Ge, n as f64);
        m.set_objective(vec![(length, 1.0)]);
        DistinctVotesModel { model: m, gamma, length }
    }

    /// Vote totals per candidate: within a contest the chosen totals are
    /// handed out in increasing order of candidate index.
    pub fn extract(&self, style: &BallotStyle, values: &[f64]) -> (Vec<usize>, usize) {
        let mut totals = vec![0; style.num_candidates()];
        for (c, contest) in style.contests().iter().enumerate() {
            let chosen = (0..self.gamma[c].len()).filter(|&k| values[self.gamma[c][k].0] > 0.5).map(|k| k + 1);
            for (&i, g) in contest.candidates().iter().zip(chosen) {
                totals[i] = g;
            }
        }
        (totals, values[self.length.0] as usize)
    }
}

/// Solves the distinct-votes MILP and packs the resulting totals.
pub fn distinct_votes_deck<S: MilpSolver + ?Sized>(style: &BallotStyle, solver: &S) -> Result<Deck> {
    let dv = DistinctVotesModel::build(style);
    let values = solver
        .solve(&dv.model)
        .into_result()?
        .ok_or_else(|| Error::Internal("distinct-votes model reported infeasible".into()))?;
    let (totals, length) = dv.extract(style, &values);
    pack_votes(style, &totals, length)
}

/// Round-robin packing: within each contest, walk candidates in increasing
/// total order and place each of candidate `i`'s `totals[i]` votes on the
/// next ballot, cycling through `length` ballots.
pub fn pack_votes(style: &BallotStyle, totals: &[usize], length: usize) -> Result<Deck> {
    let mut ballots: Vec<Vec<usize>> = vec![Vec::new(); length];
    for contest in style.contests() {
        let mut order = contest.candidates().to_vec();
        order.sort_by_key(|&i| (totals[i], i));
        if order.iter().map(|&i| totals[i]).sum::<usize>() > contest.max_votes() * length {
            bail!(InvalidInput, "contest {:?} needs more than {length} ballots", contest.id);
        }
        let mut b = 0;
        for &i in &order {
            if totals[i] > length {
                bail!(InvalidInput, "candidate total {} exceeds deck length {length}", totals[i]);
            }
            for _ in 0..totals[i] {
                ballots[b].push(i);
                b = (b + 1) % length.max(1);
            }
        }
    }
    let deck = Deck::new(ballots.into_iter().map(Ballot::new).collect());
    if deck.mark_counts(style.num_candidates()) != totals {
        bail!(Internal, "round-robin packing put a candidate twice on one ballot");
    }
    style.require_feasible(&deck).map_err(|_| Error::Internal("round-robin packing overvoted a contest".into()))?;
    Ok(deck)
}

/// The length of the shortest deck meeting the two common legal rules
/// contest by contest, the noncompetitive candidate count, and the
/// predicted optimum `max(H, NC)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormulaCheck {
    pub h: usize,
    pub nc: usize,
    pub predicted: usize,
}

pub fn optimal_length_formula(style: &BallotStyle) -> FormulaCheck {
    let h = style
        .contests()
        .iter()
        .map(|c| {
            let (n, v) = (c.len(), c.max_votes());
            n.max((n * (n + 1)).div_ceil(2 * v))
        })
        .max()
        .unwrap_or(0);
    let nc = style.contests().iter().filter(|c| c.is_noncompetitive()).map(|c| c.len()).sum();
    FormulaCheck { h, nc, predicted: h.max(nc) }
}
