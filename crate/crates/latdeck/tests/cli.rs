use std::fs;
use std::path::Path;
use std::process::Command;

use latdeck::io::{write_json, DeckFile, StyleFile, SwapFile};
use latdeck_core::samples::{heuristic_deck, president_senate, two_pairs};
use latdeck_core::Swap;

fn latdeck(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_latdeck")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn write_style(dir: &Path, name: &str, style: &latdeck_core::BallotStyle) -> String {
    let p = dir.join(name);
    write_json(&p, &StyleFile::from_style(style)).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn check_reports_witness_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let s = president_senate();
    let style = write_style(dir.path(), "s.json", &s);
    let deck = dir.path().join("d.json");
    write_json(&deck, &DeckFile::new(&s, &heuristic_deck(), &[]).unwrap()).unwrap();
    let deck = deck.to_str().unwrap();
    for extra in [&[][..], &["--minimal"], &["--brute-force"]] {
        let mut args = vec!["check", "--style", &style, "--deck", deck];
        args.extend_from_slice(extra);
        let (code, out) = latdeck(&args);
        assert_eq!(code, 3, "{out}");
        assert!(out.starts_with("VULNERABLE"));
        let witness: SwapFile = serde_json::from_str(out.trim_start_matches("VULNERABLE").trim()).unwrap();
        let sigma = witness.to_swap().unwrap();
        assert_eq!(
            s.tabulate_swapped(&heuristic_deck(), &sigma).unwrap(),
            s.tabulate_correct(&heuristic_deck()).unwrap()
        );
    }
}

#[test]
fn solve_then_check_is_secure() {
    let dir = tempfile::tempdir().unwrap();
    let style = write_style(dir.path(), "s.json", &two_pairs());
    let out = dir.path().join("deck.json");
    let trace = dir.path().join("trace.json");
    let csv = dir.path().join("deck.csv");
    let (code, text) = latdeck(&[
        "solve",
        "--style",
        &style,
        "--rules",
        "michigan",
        "--out",
        out.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--append-overvote",
        "full",
    ]);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("B* = 4"));
    let file: DeckFile = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file.ballots.len(), 4);
    assert_eq!(file.rule_ballots, [vec![1, 2, 3, 4]]);
    assert!(fs::read_to_string(&trace).unwrap().contains("\"trace\""));
    let (code, text) = latdeck(&["check", "--style", &style, "--deck", out.to_str().unwrap()]);
    assert_eq!((code, text.trim()), (0, "SECURE"));
    let (code, _) = latdeck(&["check", "--style", &style, "--deck", csv.to_str().unwrap(), "--brute-force"]);
    assert_eq!(code, 0);
}

#[test]
fn exact_overvote_needs_acknowledgement() {
    let dir = tempfile::tempdir().unwrap();
    let style = write_style(dir.path(), "s.json", &two_pairs());
    let out = dir.path().join("deck.json");
    let out = out.to_str().unwrap();
    let (code, _) = latdeck(&["solve", "--style", &style, "--out", out, "--append-overvote", "exact"]);
    assert_eq!(code, 1);
    let (code, _) = latdeck(&[
        "solve",
        "--style",
        &style,
        "--out",
        out,
        "--append-overvote",
        "exact",
        "--assume-overvote-alert",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn bound_and_redteam() {
    let dir = tempfile::tempdir().unwrap();
    let s = president_senate();
    let style = write_style(dir.path(), "s.json", &s);
    let (code, text) = latdeck(&["bound", "--style", &style, "--method", "distinct"]);
    assert_eq!(code, 0);
    assert!(text.starts_with("length 8"));
    let (_, text) = latdeck(&["bound", "--style", &style, "--method", "triangular"]);
    assert!(text.starts_with("length 15"));

    let sigma = dir.path().join("sigma.json");
    write_json(&sigma, &SwapFile::from_swap(&Swap::transposition(5, 1, 4))).unwrap();
    let (code, text) = latdeck(&["redteam", "--style", &style, "--sigma", sigma.to_str().unwrap(), "--rules", "distinct"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["swap_hidden"], true);
    assert_eq!(v["distinct_within_contest"], true);
    assert_eq!(v["deck"]["ballots"].as_array().unwrap().len(), 10);
}

#[test]
fn batch_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let styles = dir.path().join("styles");
    fs::create_dir(&styles).unwrap();
    for (k, shapes) in [vec![(2, 1), (2, 1)], vec![(2, 1), (2, 1)], vec![(2, 1)], vec![(1, 1), (2, 2)]].iter().enumerate() {
        let s = latdeck_core::BallotStyle::from_shapes(format!("style{k}"), shapes).unwrap();
        write_style(&styles, &format!("style{k}.json"), &s);
    }
    let out = dir.path().join("results");
    let (code, text) = latdeck(&[
        "batch",
        "--dir",
        styles.to_str().unwrap(),
        "--rules",
        "michigan",
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(code, 0, "{text}");
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "style_id,B*,H,NC,predicted,iterations,wall_ms,mode,certificate");
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().any(|l| l.starts_with("style1,4,") && l.contains(",reuse,")));
    assert!(out.join("style2.deck.json").exists());
}

#[test]
fn bench_prints_csv() {
    let (code, text) = latdeck(&["bench", "--experiment", "2", "--max-c", "2", "--ablate", "3"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "family,contests,candidates,config,deck_length,iterations,wall_ms,certificate");
    assert_eq!(lines.len(), 3);
}
