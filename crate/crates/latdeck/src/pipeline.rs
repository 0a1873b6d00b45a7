//! Batch solving of many ballot styles: deduplication by normal form,
//! processing order, reuse of solved decks by translation, and synthetic
//! benchmark inputs.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use latdeck_core::bounds::{optimal_length_formula, FormulaCheck};
use latdeck_core::cut::find_undetected_swap;
use latdeck_core::experiments::generate_experiment;
use latdeck_core::master::{Improvements, RuleSet};
use latdeck_core::milp::MilpSolver;
use latdeck_core::normalize::{normal_form, strip_candidates, NormalForm, ShapeKey};
use latdeck_core::{Ballot, BallotStyle, Deck, Error};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::solver::{rule_ballots, solve_style, Certificate, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Solved by the cutting-plane method.
    Full,
    /// Copy of the deck of a style with the same normal form.
    Reuse,
    /// The cutting-plane method stopped early because a deck translated
    /// from a larger style already had the optimal length.
    Translate,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Reuse => "reuse",
            Mode::Translate => "translate",
        }
    }
}

/// Styles sharing one normal form.
#[derive(Debug, Clone)]
pub struct KeyGroup {
    pub key: ShapeKey,
    /// Input positions, sorted by style id; the first one is solved.
    pub members: Vec<usize>,
    /// Earlier groups whose decks translate to this one.
    pub sources: Vec<usize>,
    pub wave: usize,
}

#[derive(Debug, Clone)]
pub struct BatchPlan {
    pub styles: Vec<BallotStyle>,
    pub forms: Vec<NormalForm>,
    /// In processing order: more competitive contests first, then more
    /// noncompetitive candidates, then style id.
    pub groups: Vec<KeyGroup>,
    pub num_waves: usize,
}

impl BatchPlan {
    pub fn new(styles: Vec<BallotStyle>) -> BatchPlan {
        let forms: Vec<NormalForm> = styles.iter().map(normal_form).collect();
        let mut by_key: BTreeMap<ShapeKey, Vec<usize>> = BTreeMap::new();
        for (k, f) in forms.iter().enumerate() {
            by_key.entry(f.key.clone()).or_default().push(k);
        }
        let mut groups: Vec<KeyGroup> = by_key
            .into_iter()
            .map(|(key, mut members)| {
                members.sort_by(|&a, &b| styles[a].id.cmp(&styles[b].id).then(a.cmp(&b)));
                KeyGroup { key, members, sources: Vec::new(), wave: 0 }
            })
            .collect();
        groups.sort_by(|a, b| {
            b.key
                .competitive_count()
                .cmp(&a.key.competitive_count())
                .then(b.key.noncompetitive.cmp(&a.key.noncompetitive))
                .then_with(|| styles[a.members[0]].id.cmp(&styles[b.members[0]].id))
        });
        for g in 0..groups.len() {
            let sources: Vec<usize> = (0..g).filter(|&s| groups[s].key.covers(&groups[g].key)).collect();
            groups[g].wave = sources.iter().map(|&s| groups[s].wave + 1).max().unwrap_or(0);
            groups[g].sources = sources;
        }
        let num_waves = groups.iter().map(|g| g.wave + 1).max().unwrap_or(0);
        BatchPlan { styles, forms, groups, num_waves }
    }
}

/// Translates a deck on the normal form `source` to the normal form with
/// key `target` by dropping unmatched competitive contests and surplus
/// noncompetitive candidates.
pub fn translate_normal(source: &NormalForm, deck: &Deck, target: &ShapeKey) -> Result<Deck, Error> {
    if !source.key.covers(target) {
        return Err(Error::Precondition("source style does not cover the target".into()));
    }
    let style = &source.style;
    let mut wanted = target.competitive.clone();
    let mut removed = Vec::new();
    for contest in style.contests() {
        if contest.is_noncompetitive() {
            removed.extend_from_slice(&contest.candidates()[target.noncompetitive..]);
            continue;
        }
        match wanted.iter().position(|&s| s == (contest.len(), contest.max_votes())) {
            Some(k) => {
                wanted.swap_remove(k);
            }
            None => removed.extend_from_slice(contest.candidates()),
        }
    }
    let t = strip_candidates(style, deck, &removed)?;
    let nf = normal_form(&t.style);
    if nf.key != *target {
        return Err(Error::Internal("translated style has the wrong shape".into()));
    }
    Ok(nf.deck_from_original(&t.deck))
}

#[derive(Debug, Clone)]
pub struct BatchOptions {
    pub rules: RuleSet,
    pub improvements: Improvements,
    pub jobs: usize,
    pub time_limit: Option<Duration>,
    /// Re-check every output deck on its original style with the cut MILP.
    pub verify: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            rules: RuleSet::michigan(),
            improvements: Improvements::all(),
            jobs: 1,
            time_limit: None,
            verify: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StyleRecord {
    pub style_id: String,
    pub mode: Mode,
    /// Deck in the style's own candidate indices.
    pub deck: Option<Deck>,
    pub rule_ballots: Vec<Ballot>,
    pub deck_length: usize,
    pub certificate: Option<Certificate>,
    pub iterations: usize,
    pub wall_ms: f64,
    pub formula: FormulaCheck,
    /// Style whose deck was copied or translated.
    pub source: Option<String>,
    pub verified_secure: Option<bool>,
    pub error: Option<String>,
}

impl StyleRecord {
    pub fn is_solved(&self) -> bool {
        self.error.is_none() && self.certificate == Some(Certificate::CertifiedOptimal) && self.verified_secure != Some(false)
    }
}

#[derive(Debug, Clone)]
pub struct BatchSummary {
    /// In input order.
    pub records: Vec<StyleRecord>,
    pub full: usize,
    pub reused: usize,
    pub translated: usize,
    pub failed: usize,
    pub wall: Duration,
}

impl BatchSummary {
    pub fn all_solved(&self) -> bool {
        self.records.iter().all(StyleRecord::is_solved)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> anyhow::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["style_id", "B*", "H", "NC", "predicted", "iterations", "wall_ms", "mode", "certificate"])?;
        for r in &self.records {
            let cert = match (&r.error, r.certificate) {
                (Some(_), _) => "ERROR",
                (None, Some(Certificate::CertifiedOptimal)) => "CERTIFIED_OPTIMAL",
                (None, _) => "TIME_LIMIT_PARTIAL",
            };
            out.write_record([
                r.style_id.clone(),
                r.deck_length.to_string(),
                r.formula.h.to_string(),
                r.formula.nc.to_string(),
                r.formula.predicted.to_string(),
                r.iterations.to_string(),
                format!("{:.1}", r.wall_ms),
                r.mode.as_str().to_string(),
                cert.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Outcome for one key group, in normal-form indices.
#[derive(Debug, Clone)]
struct GroupOutcome {
    mode: Mode,
    deck: Option<Deck>,
    deck_length: usize,
    certificate: Option<Certificate>,
    iterations: usize,
    wall_ms: f64,
    source: Option<usize>,
    error: Option<String>,
}

fn solve_group<S: MilpSolver + ?Sized>(
    plan: &BatchPlan,
    g: usize,
    done: &[Option<GroupOutcome>],
    opts: &BatchOptions,
    solver: &S,
) -> GroupOutcome {
    let group = &plan.groups[g];
    let form = &plan.forms[group.members[0]];
    // Shortest known deck among solved sources.
    let best = group
        .sources
        .iter()
        .filter_map(|&s| done[s].as_ref().and_then(|o| o.deck.as_ref().map(|d| (d.len(), s))))
        .min();
    let start = Instant::now();
    let translated = |s: usize| -> Result<Deck, Error> {
        let src = &plan.groups[s];
        let deck = done[s].as_ref().and_then(|o| o.deck.clone()).expect("source has a deck");
        translate_normal(&plan.forms[src.members[0]], &deck, &group.key)
    };
    let options = SolveOptions { time_limit: opts.time_limit, stop_at_length: best.map(|b| b.0), ..SolveOptions::default() };
    let result = solve_style(&form.style, opts.rules, opts.improvements, options, solver);
    let mut out = GroupOutcome {
        mode: Mode::Full,
        deck: None,
        deck_length: 0,
        certificate: None,
        iterations: 0,
        wall_ms: 0.0,
        source: None,
        error: None,
    };
    match result {
        Err(e) => out.error = Some(e.to_string()),
        Ok(r) => {
            out.deck_length = r.deck_length;
            out.iterations = r.iterations;
            out.certificate = Some(r.certificate);
            if let Some(d) = r.deck {
                out.deck = Some(d);
            } else if let Some((_, s)) = best {
                // Early halt, or a time limit with a known deck to fall back on.
                match translated(s) {
                    Ok(d) => {
                        out.mode = Mode::Translate;
                        out.source = Some(s);
                        if r.certificate == Certificate::TimeLimitPartial {
                            out.deck_length = d.len();
                        }
                        out.deck = Some(d);
                    }
                    Err(e) => out.error = Some(format!("translation failed: {e}")),
                }
            }
        }
    }
    out.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    out
}

fn check_rules(style: &BallotStyle, deck: &Deck, rules: &RuleSet) -> Result<(), String> {
    let counts = deck.mark_counts(style.num_candidates());
    if rules.at_least_one_vote && counts.contains(&0) {
        return Err("a candidate receives no vote".into());
    }
    if rules.distinct_within_contest {
        for c in style.contests() {
            let mut v: Vec<usize> = c.candidates().iter().map(|&i| counts[i]).collect();
            v.sort_unstable();
            if v.windows(2).any(|w| w[0] == w[1]) {
                return Err(format!("two candidates of contest {:?} tie", c.id));
            }
        }
    }
    Ok(())
}

/// Solves every style. Failures are recorded per style and never stop the
/// batch.
pub fn batch_solve<S: MilpSolver + ?Sized>(
    styles: Vec<BallotStyle>,
    opts: &BatchOptions,
    solver: &S,
) -> anyhow::Result<BatchSummary> {
    let start = Instant::now();
    opts.rules.validate()?;
    let plan = BatchPlan::new(styles);
    log::info!("{} styles, {} normal forms, {} waves", plan.styles.len(), plan.groups.len(), plan.num_waves);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs.max(1)).build()?;
    let mut done: Vec<Option<GroupOutcome>> = vec![None; plan.groups.len()];
    for wave in 0..plan.num_waves {
        let members: Vec<usize> = (0..plan.groups.len()).filter(|&g| plan.groups[g].wave == wave).collect();
        let outcomes: Vec<(usize, GroupOutcome)> = pool.install(|| {
            members.par_iter().map(|&g| (g, solve_group(&plan, g, &done, opts, solver))).collect()
        });
        for (g, o) in outcomes {
            done[g] = Some(o);
        }
    }

    let mut records: Vec<Option<StyleRecord>> = vec![None; plan.styles.len()];
    let jobs: Vec<(usize, usize, bool)> = plan
        .groups
        .iter()
        .enumerate()
        .flat_map(|(g, grp)| grp.members.iter().enumerate().map(move |(k, &m)| (g, m, k == 0)))
        .collect();
    let built: Vec<(usize, StyleRecord)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(g, m, lead)| {
                let t0 = Instant::now();
                let o = done[g].as_ref().expect("every group ran");
                let style = &plan.styles[m];
                let lead_id = &plan.styles[plan.groups[g].members[0]].id;
                let mut rec = StyleRecord {
                    style_id: style.id.clone(),
                    mode: if lead { o.mode } else { Mode::Reuse },
                    deck: o.deck.as_ref().map(|d| plan.forms[m].deck_to_original(d)),
                    rule_ballots: Vec::new(),
                    deck_length: o.deck_length,
                    certificate: o.certificate,
                    iterations: if lead { o.iterations } else { 0 },
                    wall_ms: 0.0,
                    formula: optimal_length_formula(style),
                    source: if lead { o.source.map(|s| plan.styles[plan.groups[s].members[0]].id.clone()) } else { Some(lead_id.clone()) },
                    verified_secure: None,
                    error: o.error.clone(),
                };
                if let Some(deck) = &rec.deck {
                    rec.rule_ballots = rule_ballots(style, &opts.rules);
                    if let Err(e) = check_rules(style, deck, &opts.rules) {
                        rec.error = Some(e);
                    }
                    if opts.verify {
                        match find_undetected_swap(style, deck, false, None, solver) {
                            Ok(r) => rec.verified_secure = Some(r.is_secure()),
                            Err(e) => rec.error = Some(format!("verification failed: {e}")),
                        }
                    }
                }
                rec.wall_ms = if lead { o.wall_ms } else { 0.0 } + t0.elapsed().as_secs_f64() * 1e3;
                (m, rec)
            })
            .collect()
    });
    for (m, rec) in built {
        records[m] = Some(rec);
    }
    let records: Vec<StyleRecord> = records.into_iter().map(|r| r.expect("every style has a record")).collect();
    let count = |mode| records.iter().filter(|r| r.is_solved() && r.mode == mode).count();
    Ok(BatchSummary {
        full: count(Mode::Full),
        reused: count(Mode::Reuse),
        translated: count(Mode::Translate),
        failed: records.iter().filter(|r| !r.is_solved()).count(),
        records,
        wall: start.elapsed(),
    })
}

/// Styles drawn the way one election produces them: a few jurisdictions
/// each list up to `max_contests` contests, and every style holds a random
/// subset of one jurisdiction's contests. Contest shapes mix the three
/// experiment families (vote-for-one races, two-way races, and contests
/// where every candidate can be chosen).
pub fn synthetic_styles(count: usize, max_contests: usize, seed: u64) -> Vec<BallotStyle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_contests = max_contests.max(2);
    let palette: [(usize, usize); 6] = [(2, 1), (2, 1), (3, 1), (4, 1), (1, 1), (2, 2)];
    let jurisdictions: Vec<Vec<(usize, usize)>> = (0..4)
        .map(|_| {
            let mut list: Vec<(usize, usize)> = (0..max_contests).map(|_| *palette.choose(&mut rng).unwrap()).collect();
            // Every list opens with a top-of-ticket race.
            list[0] = (3, 1);
            list
        })
        .collect();
    (0..count)
        .map(|k| {
            let list = jurisdictions.choose(&mut rng).unwrap();
            let c = rng.gen_range(2..=max_contests);
            let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, list.len(), c).into_vec();
            picked.sort_unstable();
            let shapes: Vec<(usize, usize)> = picked.iter().map(|&i| list[i]).collect();
            BallotStyle::from_shapes(format!("synthetic-{k:03}"), &shapes).expect("palette shapes are valid")
        })
        .collect()
}

/// The three benchmark families for `2..=max_contests`.
pub fn experiment_styles(family: u8, max_contests: usize) -> Result<Vec<BallotStyle>, Error> {
    (2..=max_contests).map(|c| generate_experiment(family, c)).collect()
}

/// One benchmark instance under one improvement configuration.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub family: u8,
    pub contests: usize,
    pub candidates: usize,
    /// `all`, or `no-k` with improvement `k` disabled.
    pub config: String,
    pub deck_length: usize,
    pub iterations: usize,
    pub wall_ms: f64,
    pub certificate: String,
}

/// Solves family `family` for `2..=max_contests` with all improvements and
/// with each improvement in `ablate` disabled in turn.
pub fn bench<S: MilpSolver + ?Sized>(
    family: u8,
    max_contests: usize,
    ablate: &[u8],
    rules: RuleSet,
    time_limit: Option<Duration>,
    solver: &S,
) -> Result<Vec<BenchRow>, Error> {
    let mut configs = vec![("all".to_string(), Improvements::all())];
    for &k in ablate {
        configs.push((format!("no-{k}"), Improvements::without(k)?));
    }
    let mut rows = Vec::new();
    for style in experiment_styles(family, max_contests)? {
        for (name, imp) in &configs {
            let options = SolveOptions { time_limit, ..SolveOptions::default() };
            let r = solve_style(&style, rules, *imp, options, solver)?;
            log::info!("{} {name}: B = {} after {} iterations", style.id, r.deck_length, r.iterations);
            rows.push(BenchRow {
                family,
                contests: style.num_contests(),
                candidates: style.num_candidates(),
                config: name.clone(),
                deck_length: r.deck_length,
                iterations: r.iterations,
                wall_ms: r.wall.as_secs_f64() * 1e3,
                certificate: match r.certificate {
                    Certificate::CertifiedOptimal => "CERTIFIED_OPTIMAL".into(),
                    Certificate::TimeLimitPartial => "TIME_LIMIT_PARTIAL".into(),
                },
            });
        }
    }
    Ok(rows)
}
