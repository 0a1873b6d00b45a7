use latdeck::pipeline::{batch_solve, BatchOptions, Mode};
use latdeck::solver::{solve_style, Certificate, SolveOptions};
use latdeck::HighsSolver;
use latdeck_core::bounds::{distinct_votes_deck, triangular_deck};
use latdeck_core::cut::{brute_force_check, exhaustive_check, BRUTE_FORCE_CAP};
use latdeck_core::master::{build_master, solve_feasibility, Improvements, RuleSet};
use latdeck_core::milp::MilpSolver;
use latdeck_core::normalize::translate_solution;
use latdeck_core::search::{find_secure_deck, SearchBudget};
use latdeck_core::{BallotStyle, Deck};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_styles(count: usize, max_n: usize, seed: u64) -> Vec<BallotStyle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let mut shapes = Vec::new();
            let mut n = 0;
            while n < max_n {
                let size = rng.gen_range(1..=3.min(max_n - n));
                let v = rng.gen_range(1..=size);
                shapes.push((size, v));
                n += size;
                if rng.gen_bool(0.3) {
                    break;
                }
            }
            BallotStyle::from_shapes(format!("r{k}"), &shapes).unwrap()
        })
        .collect()
}

fn solve(style: &BallotStyle, rules: RuleSet, imp: Improvements) -> (Deck, usize, usize) {
    let r = solve_style(style, rules, imp, SolveOptions::default(), &HighsSolver::default()).unwrap();
    assert_eq!(r.certificate, Certificate::CertifiedOptimal);
    (r.deck.unwrap(), r.deck_length, r.iterations)
}

#[test]
fn certificates_hold_on_random_styles() {
    for style in random_styles(20, 6, 11) {
        for rules in [RuleSet::none(), RuleSet::michigan()] {
            let (deck, b, _) = solve(&style, rules, Improvements::all());
            assert_eq!(deck.len(), b);
            assert!(brute_force_check(&style, &deck, BRUTE_FORCE_CAP).unwrap().is_secure(), "{}", style.id);
            if b > 1 {
                let shorter = find_secure_deck(&style, b - 1, rules, SearchBudget::default()).unwrap();
                assert!(shorter.deck.is_none(), "{} has a secure deck of length {}", style.id, b - 1);
            }
        }
    }
}

#[test]
fn improvements_do_not_change_the_optimum() {
    for style in random_styles(12, 6, 5) {
        let (_, b, _) = solve(&style, RuleSet::at_least_one(), Improvements::all());
        for k in 1..=5 {
            let (_, bk, _) = solve(&style, RuleSet::at_least_one(), Improvements::without(k).unwrap());
            assert_eq!(b, bk, "{} with improvement {k} off", style.id);
        }
        let (_, b0, _) = solve(&style, RuleSet::at_least_one(), Improvements::none());
        assert_eq!(b, b0);
    }
}

#[test]
fn translated_decks_stay_secure() {
    for style in random_styles(15, 6, 23).into_iter().filter(|s| s.num_contests() >= 2) {
        let (deck, _, _) = solve(&style, RuleSet::none(), Improvements::all());
        for c in 0..style.num_contests() {
            let t = translate_solution(&style, &deck, &[c]).unwrap();
            assert!(brute_force_check(&t.style, &t.deck, BRUTE_FORCE_CAP).unwrap().is_secure());
        }
    }
}

#[test]
fn heuristic_bounds_sit_above_the_optimum() {
    let solver = HighsSolver::default();
    for style in random_styles(10, 6, 3) {
        let (_, b, _) = solve(&style, RuleSet::at_least_one(), Improvements::all());
        let dv = distinct_votes_deck(&style, &solver).unwrap();
        let tri = triangular_deck(&style);
        assert!(b <= dv.len() && dv.len() <= tri.len());
        assert!(brute_force_check(&style, &dv, BRUTE_FORCE_CAP).unwrap().is_secure());
    }
}

#[test]
fn master_examples_on_the_merged_style() {
    let solver = HighsSolver::default();
    let merged = BallotStyle::from_shapes("m", &[(3, 3)]).unwrap();
    let m = build_master(&merged, &[], 2, RuleSet::none(), Improvements::all()).unwrap();
    let deck = solve_feasibility(&m, &merged, &solver).unwrap().unwrap();
    assert_eq!(deck.mark_counts(3), [0, 1, 2]);
    let m = build_master(&merged, &[], 1, RuleSet::at_least_one(), Improvements::all()).unwrap();
    assert!(solve_feasibility(&m, &merged, &solver).unwrap().is_none());
    // repeated solves agree
    let a = solver.solve(&m.model);
    let b = solver.solve(&m.model);
    assert_eq!((a.status, a.objective), (b.status, b.objective));
}

#[test]
fn batch_dedup_and_translation() {
    let style = BallotStyle::from_shapes("base", &[(3, 1), (2, 1)]).unwrap();
    let copies: Vec<BallotStyle> = (0..10)
        .map(|k| {
            let mut s = style.clone();
            s.id = format!("copy{k}");
            s
        })
        .collect();
    let opts = BatchOptions { jobs: 2, ..BatchOptions::default() };
    let summary = batch_solve(copies, &opts, &HighsSolver::default()).unwrap();
    assert_eq!((summary.full, summary.reused), (1, 9));
    assert!(summary.all_solved());

    // style k holds the first k contests of one list
    let list = [(3, 1), (2, 1), (1, 1), (2, 1), (1, 1)];
    let nested: Vec<BallotStyle> =
        (1..=list.len()).map(|k| BallotStyle::from_shapes(format!("nest{k}"), &list[..k]).unwrap()).collect();
    let summary = batch_solve(nested.clone(), &opts, &HighsSolver::default()).unwrap();
    assert!(summary.all_solved());
    assert!(summary.translated >= 1, "no early halts");
    for (style, rec) in nested.iter().zip(&summary.records) {
        let deck = rec.deck.as_ref().unwrap();
        assert!(exhaustive_check(style, deck, 100_000_000).unwrap().is_secure(), "{}", style.id);
        let (_, b, _) = solve(style, RuleSet::michigan(), Improvements::all());
        assert_eq!(rec.deck_length, b, "{}", style.id);
        assert_eq!(deck.len(), b);
        if rec.mode == Mode::Translate {
            assert!(rec.source.is_some());
        }
    }
}
