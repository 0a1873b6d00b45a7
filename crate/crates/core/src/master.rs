//! The restricted deck-design problem: find `B` ballots that detect every
//! swap in a finite cut set.
//!
//! Variables: `beta[b][i]` (ballot `b` marks candidate `i`), `gamma[i][g]`
//! (candidate `i` is marked on exactly `g` ballots), `y[i,j]` (forced to 1
//! when `i` and `j` have equal counts), `p[σ][b][c]` (forced to 1 unless
//! contest `c` of ballot `b` is overvoted when read through `σ`), and
//! `lambda` chains ordering equivalent contests. Each cut `σ` needs some
//! `y[i,σ(i)] = 0` or some `p[σ][b][c] = 0`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::ballot::{detects_unchecked, Ballot, BallotStyle, Deck};
use crate::error::bail;
use crate::milp::{MilpSolver, Model, Relation, VarId, VarKind};
use crate::swap::Swap;
use crate::{Error, Result};

/// Default cap on the deck length accepted by [`build_master`].
pub const DEFAULT_MAX_DECK_LENGTH: usize = 500;

/// Legal requirements on test decks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RuleSet {
    /// Every candidate receives at least one vote.
    pub at_least_one_vote: bool,
    /// Candidates in the same contest receive different numbers of votes.
    pub distinct_within_contest: bool,
    /// Append one ballot marking every candidate after optimisation.
    pub append_full_overvote_ballot: bool,
    /// Append one ballot with exactly `v_c + 1` marks in every competitive
    /// contest after optimisation.
    pub append_exact_overvote_ballot: bool,
    /// Acknowledges that tabulators flag overvoted ballots, without which
    /// the exact overvote ballot may mask a swap.
    pub assume_overvote_alert: bool,
}

impl RuleSet {
    pub fn none() -> Self {
        RuleSet::default()
    }

    /// Michigan's minimum requirements: a positive vote total for every
    /// candidate and distinct totals within each contest.
    pub fn michigan() -> Self {
        RuleSet { at_least_one_vote: true, distinct_within_contest: true, ..RuleSet::default() }
    }

    pub fn at_least_one() -> Self {
        RuleSet { at_least_one_vote: true, ..RuleSet::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.append_exact_overvote_ballot && !self.assume_overvote_alert {
            bail!(
                InvalidRules,
                "the exact overvote ballot requires acknowledging that overvoted ballots raise an alert"
            );
        }
        if self.append_exact_overvote_ballot && self.append_full_overvote_ballot {
            bail!(InvalidRules, "choose at most one overvote ballot");
        }
        Ok(())
    }
}

/// Toggles for the five solver improvements, numbered 1 to 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Improvements {
    /// 1: only build `p` for overvotable contests and `y` for cut pairs.
    pub reduced_model: bool,
    /// 2: strictly increasing vote counts within each contest.
    pub within_contest_order: bool,
    /// 3: lexicographic order between equivalent contests.
    pub across_contest_order: bool,
    /// 4: cut generation returns minimal swaps.
    pub minimal_cuts: bool,
    /// 5: merge noncompetitive contests before solving.
    pub merge_noncompetitive: bool,
}

impl Default for Improvements {
    fn default() -> Self {
        Improvements::all()
    }
}

impl Improvements {
    pub fn all() -> Self {
        Improvements {
            reduced_model: true,
            within_contest_order: true,
            across_contest_order: true,
            minimal_cuts: true,
            merge_noncompetitive: true,
        }
    }

    pub fn none() -> Self {
        Improvements {
            reduced_model: false,
            within_contest_order: false,
            across_contest_order: false,
            minimal_cuts: false,
            merge_noncompetitive: false,
        }
    }

    /// All improvements except number `k` (1..=5).
    pub fn without(k: u8) -> Result<Self> {
        let mut imp = Improvements::all();
        imp.set(k, false)?;
        Ok(imp)
    }

    pub fn set(&mut self, k: u8, on: bool) -> Result<()> {
        match k {
            1 => self.reduced_model = on,
            2 => self.within_contest_order = on,
            3 => self.across_contest_order = on,
            4 => self.minimal_cuts = on,
            5 => self.merge_noncompetitive = on,
            _ => bail!(InvalidInput, "improvement numbers are 1 to 5, got {k}"),
        }
        Ok(())
    }
}

/// Contests that some feasible ballot can overvote when read through
/// `sigma`: the largest number of marks `sigma` can route into contest `c`
/// from one feasible ballot exceeds `v_c`. Runs in O(C² + N).
pub fn overvotable_contests(style: &BallotStyle, sigma: &Swap) -> Vec<usize> {
    let nc = style.num_contests();
    let mut routed = vec![0usize; nc * nc];
    for i in 0..style.num_candidates() {
        routed[style.contest_of(i) * nc + style.contest_of(sigma.apply(i))] += 1;
    }
    (0..nc)
        .filter(|&c| {
            let reach: usize =
                (0..nc).map(|c2| routed[c * nc + c2].min(style.contest(c2).max_votes())).sum();
            reach > style.contest(c).max_votes()
        })
        .collect()
}

/// Pairs `(c, c')`, `c < c'`, of equivalent contests (same size and vote
/// cap) with no equivalent contest strictly between them.
pub fn sequential_equivalent_pairs(style: &BallotStyle) -> Vec<(usize, usize)> {
    let mut last: Vec<((usize, usize), usize)> = Vec::new();
    let mut pairs = Vec::new();
    for (c, contest) in style.contests().iter().enumerate() {
        let key = (contest.len(), contest.max_votes());
        match last.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => {
                pairs.push((slot.1, c));
                slot.1 = c;
            }
            None => last.push((key, c)),
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Strict lexicographic comparison of two equivalent contests by vote
/// counts, starting from the highest-ranked candidate: true iff `c`
/// precedes `c2`.
pub fn lex_precedes(style: &BallotStyle, counts: &[usize], c: usize, c2: usize) -> bool {
    let (a, b) = (style.contest(c).candidates(), style.contest(c2).candidates());
    for k in (0..a.len()).rev() {
        if counts[a[k]] != counts[b[k]] {
            return counts[a[k]] < counts[b[k]];
        }
    }
    false
}

/// Variable counts of a built master model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Census {
    pub beta: usize,
    pub gamma: usize,
    pub y: usize,
    pub p: usize,
    pub lambda: usize,
    pub constraints: usize,
}

/// A built master model plus what is needed to read and verify its answer.
#[derive(Debug, Clone)]
pub struct MasterModel {
    pub model: Model,
    pub deck_length: usize,
    pub cuts: Vec<Swap>,
    pub rules: RuleSet,
    pub improvements: Improvements,
    beta: Vec<Vec<VarId>>,
    gamma: Vec<Vec<VarId>>,
    census: Census,
}

impl MasterModel {
    pub fn census(&self) -> Census {
        self.census
    }

    pub fn extract_deck(&self, values: &[f64]) -> Deck {
        Deck::new(
            self.beta
                .iter()
                .map(|row| Ballot::new(row.iter().enumerate().filter(|(_, v)| values[v.0] > 0.5).map(|(i, _)| i)))
                .collect(),
        )
    }

    fn gamma_value(&self, values: &[f64], i: usize) -> Option<usize> {
        let hot: Vec<usize> = (0..self.gamma[i].len()).filter(|&g| values[self.gamma[i][g].0] > 0.5).collect();
        (hot.len() == 1).then(|| hot[0])
    }
}

/// Builds the restricted problem for deck length `b` with the default cap.
pub fn build_master(
    style: &BallotStyle,
    cuts: &[Swap],
    b: usize,
    rules: RuleSet,
    improvements: Improvements,
) -> Result<MasterModel> {
    build_master_capped(style, cuts, b, rules, improvements, DEFAULT_MAX_DECK_LENGTH)
}

pub fn build_master_capped(
    style: &BallotStyle,
    cuts: &[Swap],
    b_len: usize,
    rules: RuleSet,
    improvements: Improvements,
    max_b: usize,
) -> Result<MasterModel> {
    rules.validate()?;
    if b_len == 0 {
        bail!(InvalidInput, "deck length must be at least 1");
    }
    if b_len > max_b {
        bail!(Capacity, "deck length {b_len} exceeds the cap {max_b}");
    }
    let mut unique: Vec<Swap> = Vec::with_capacity(cuts.len());
    for sigma in cuts {
        style.check_swap(sigma)?;
        if sigma.is_identity() {
            bail!(InvalidInput, "cut set contains the identity");
        }
        if !unique.contains(sigma) {
            unique.push(sigma.clone());
        }
    }
    let n = style.num_candidates();
    let bf = b_len as f64;
    let mut m = Model::new(format!("master_B{b_len}"));
    let mut census = Census::default();

    let beta: Vec<Vec<VarId>> = (0..b_len)
        .map(|b| (0..n).map(|i| m.add_var(format!("beta_{b}_{i}"), VarKind::Binary)).collect())
        .collect();
    census.beta = b_len * n;
    for (b, row) in beta.iter().enumerate() {
        for (c, contest) in style.contests().iter().enumerate() {
            if contest.len() > contest.max_votes() {
                let terms = contest.candidates().iter().map(|&i| (row[i], 1.0)).collect();
                m.add_constraint(format!("feasible_{b}_{c}"), terms, Relation::Le, contest.max_votes() as f64);
            }
        }
    }
    let count_terms = |i: usize, sign: f64| -> Vec<(VarId, f64)> { beta.iter().map(|row| (row[i], sign)).collect() };

    let gamma: Vec<Vec<VarId>> = (0..n)
        .map(|i| (0..=b_len).map(|g| m.add_var(format!("gamma_{i}_{g}"), VarKind::Binary)).collect())
        .collect();
    census.gamma = n * (b_len + 1);
    for i in 0..n {
        m.add_constraint(format!("one_count_{i}"), gamma[i].iter().map(|&v| (v, 1.0)).collect(), Relation::Eq, 1.0);
        let mut terms = count_terms(i, 1.0);
        terms.extend(gamma[i].iter().enumerate().skip(1).map(|(g, &v)| (v, -(g as f64))));
        m.add_constraint(format!("count_{i}"), terms, Relation::Eq, 0.0);
        if rules.at_least_one_vote {
            m.add_constraint(format!("at_least_one_{i}"), vec![(gamma[i][0], 1.0)], Relation::Eq, 0.0);
        }
    }

    // y[i][j] >= gamma[i][g] + gamma[j][g] - 1 for every g.
    let mut y_pairs: Vec<(usize, usize)> = if improvements.reduced_model {
        unique.iter().flat_map(|s| s.moved().into_iter().map(move |i| (i, s.apply(i)))).collect()
    } else {
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
    };
    y_pairs.sort_unstable();
    y_pairs.dedup();
    let mut y_var = vec![None; n * n];
    for &(i, j) in &y_pairs {
        let y = m.add_var(format!("y_{i}_{j}"), VarKind::Continuous);
        y_var[i * n + j] = Some(y);
        for g in 0..=b_len {
            let terms = if i == j {
                vec![(y, 1.0), (gamma[i][g], -2.0)]
            } else {
                vec![(y, 1.0), (gamma[i][g], -1.0), (gamma[j][g], -1.0)]
            };
            m.add_constraint(format!("tie_{i}_{j}_{g}"), terms, Relation::Ge, -1.0);
        }
    }
    census.y = y_pairs.len();

    for (s, sigma) in unique.iter().enumerate() {
        let contests: Vec<usize> = if improvements.reduced_model {
            overvotable_contests(style, sigma)
        } else {
            (0..style.num_contests()).collect()
        };
        let mut detect: Vec<(VarId, f64)> = Vec::new();
        let mut rhs = 1.0;
        let moved: Vec<usize> = if improvements.reduced_model { sigma.moved() } else { (0..n).collect() };
        for &i in &moved {
            let y = y_var[i * n + sigma.apply(i)].ok_or_else(|| Error::Internal("missing tie variable".into()))?;
            detect.push((y, -1.0));
            rhs -= 1.0;
        }
        for b in 0..b_len {
            for &c in &contests {
                let contest = style.contest(c);
                let v = contest.max_votes() as f64;
                let p = m.add_var(format!("p_{s}_{b}_{c}"), VarKind::Binary);
                census.p += 1;
                // (v+1) p + Σ beta[b][σ(i)] >= v+1: p may be 0 only on an overvote.
                let mut terms = vec![(p, v + 1.0)];
                terms.extend(contest.candidates().iter().map(|&i| (beta[b][sigma.apply(i)], 1.0)));
                m.add_constraint(format!("overvote_{s}_{b}_{c}"), terms, Relation::Ge, v + 1.0);
                detect.push((p, -1.0));
                rhs -= 1.0;
            }
        }
        m.add_constraint(format!("detect_{s}"), detect, Relation::Ge, rhs);
    }

    if improvements.within_contest_order || rules.distinct_within_contest {
        for (c, contest) in style.contests().iter().enumerate() {
            for (k, w) in contest.candidates().windows(2).enumerate() {
                let mut terms = count_terms(w[1], 1.0);
                terms.extend(count_terms(w[0], -1.0));
                m.add_constraint(format!("order_{c}_{k}"), terms, Relation::Ge, 1.0);
            }
        }
    }

    if improvements.across_contest_order {
        for (c, c2) in sequential_equivalent_pairs(style) {
            let (a, b) = (style.contest(c).candidates(), style.contest(c2).candidates());
            let len = a.len();
            let lam: Vec<VarId> =
                (0..len).map(|k| m.add_var(format!("lambda_{c}_{c2}_{k}"), VarKind::Binary)).collect();
            census.lambda += len;
            // d_k = count(b[k]) - count(a[k])
            let diff = |k: usize, sign: f64| -> Vec<(VarId, f64)> {
                let mut t = count_terms(b[k], sign);
                t.extend(count_terms(a[k], -sign));
                t
            };
            let top = len - 1;
            let mut t = vec![(lam[top], 1.0)];
            t.extend(diff(top, -1.0));
            m.add_constraint(format!("lex_top_{c}_{c2}"), t, Relation::Le, 0.0);
            for k in 0..top {
                let mut t = vec![(lam[k], 1.0), (lam[k + 1], -bf)];
                t.extend(diff(k, -1.0));
                m.add_constraint(format!("lex_{c}_{c2}_{k}"), t, Relation::Le, 0.0);
                // The chain is monotone: once decided at a higher rank it
                // stays decided.
                m.add_constraint(format!("lex_mono_{c}_{c2}_{k}"), vec![(lam[k], 1.0), (lam[k + 1], -1.0)], Relation::Ge, 0.0);
            }
            // Ranks above the deciding rank must tie: |d_k| <= B lambda_k.
            for k in 1..len {
                let mut up = vec![(lam[k], bf)];
                up.extend(diff(k, -1.0));
                m.add_constraint(format!("lex_tie_hi_{c}_{c2}_{k}"), up, Relation::Ge, 0.0);
                let mut lo = vec![(lam[k], bf)];
                lo.extend(diff(k, 1.0));
                m.add_constraint(format!("lex_tie_lo_{c}_{c2}_{k}"), lo, Relation::Ge, 0.0);
            }
            m.add_constraint(format!("lex_first_{c}_{c2}"), vec![(lam[0], 1.0)], Relation::Eq, 1.0);
        }
    }

    census.constraints = m.constraints().len();
    Ok(MasterModel { model: m, deck_length: b_len, cuts: unique, rules, improvements, beta, gamma, census })
}

/// Solves the restricted problem. Returns `None` when no deck of this length
/// satisfies the model. A returned deck has been re-verified: it is feasible,
/// detects every cut, honours the active rules and ordering constraints,
/// and agrees with the `gamma` encoding.
pub fn solve_feasibility<S: MilpSolver + ?Sized>(
    master: &MasterModel,
    style: &BallotStyle,
    solver: &S,
) -> Result<Option<Deck>> {
    let Some(values) = solver.solve(&master.model).into_result()? else {
        return Ok(None);
    };
    let deck = master.extract_deck(&values);
    verify_master_deck(master, style, &deck, &values)?;
    Ok(Some(deck))
}

fn verify_master_deck(master: &MasterModel, style: &BallotStyle, deck: &Deck, values: &[f64]) -> Result<()> {
    let fail = |msg: String| -> Result<()> { Err(Error::Internal(msg)) };
    if style.require_feasible(deck).is_err() {
        return fail("master returned an overvoted ballot".into());
    }
    let counts = deck.mark_counts(style.num_candidates());
    for (i, &cnt) in counts.iter().enumerate() {
        if master.gamma_value(values, i) != Some(cnt) {
            return fail(format!("gamma encoding disagrees with the vote count of candidate {i}"));
        }
        if master.rules.at_least_one_vote && cnt == 0 {
            return fail(format!("candidate {i} received no vote"));
        }
    }
    if master.improvements.within_contest_order || master.rules.distinct_within_contest {
        for contest in style.contests() {
            if contest.candidates().windows(2).any(|w| counts[w[0]] >= counts[w[1]]) {
                return fail("within-contest ordering violated".into());
            }
        }
    }
    if master.improvements.across_contest_order {
        for (c, c2) in sequential_equivalent_pairs(style) {
            if !lex_precedes(style, &counts, c, c2) {
                return fail(format!("contests {c} and {c2} are not lexicographically ordered"));
            }
        }
    }
    for sigma in &master.cuts {
        if !detects_unchecked(style, deck, sigma) {
            return fail("master deck misses a cut".into());
        }
    }
    Ok(())
}
