//! File formats. Candidate indices are one-based on disk and zero-based in
//! memory.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use latdeck_core::{Ballot, BallotStyle, Deck, Swap};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContestFile {
    pub contest_id: String,
    pub candidates: Vec<String>,
    pub max_votes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleFile {
    pub style_id: String,
    pub contests: Vec<ContestFile>,
}

impl StyleFile {
    pub fn from_style(style: &BallotStyle) -> StyleFile {
        StyleFile {
            style_id: style.id.clone(),
            contests: style
                .contests()
                .iter()
                .map(|c| ContestFile {
                    contest_id: c.id.clone(),
                    candidates: c.candidates().iter().map(|&i| style.candidate_name(i).to_string()).collect(),
                    max_votes: c.max_votes(),
                })
                .collect(),
        }
    }

    /// Candidates are numbered in listing order.
    pub fn to_style(&self) -> Result<BallotStyle> {
        let listing = self.contests.iter().map(|c| (c.contest_id.clone(), c.candidates.clone(), c.max_votes));
        Ok(BallotStyle::from_listing(self.style_id.clone(), listing)?)
    }
}

/// Per-candidate expected totals, keyed by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedTotal {
    pub candidate: String,
    pub votes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeckFile {
    pub style_id: String,
    pub ballots: Vec<Vec<usize>>,
    /// Ballots added for overvote rules; not part of the optimised deck.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rule_ballots: Vec<Vec<usize>>,
    /// Expected totals of `ballots` followed by `rule_ballots`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Vec<ExpectedTotal>>,
}

fn to_one_based(b: &Ballot) -> Vec<usize> {
    b.marks().iter().map(|&i| i + 1).collect()
}

fn from_one_based(marks: &[usize], n: usize) -> Result<Ballot> {
    for &m in marks {
        if m == 0 || m > n {
            bail!("candidate index {m} outside 1..={n}");
        }
    }
    Ok(Ballot::new(marks.iter().map(|&m| m - 1)))
}

impl DeckFile {
    pub fn new(style: &BallotStyle, deck: &Deck, rule_ballots: &[Ballot]) -> Result<DeckFile> {
        let mut all = deck.clone();
        for b in rule_ballots {
            all.push(b.clone());
        }
        let tally = style.tabulate_correct(&all)?;
        Ok(DeckFile {
            style_id: style.id.clone(),
            ballots: deck.ballots().iter().map(to_one_based).collect(),
            rule_ballots: rule_ballots.iter().map(to_one_based).collect(),
            expected: Some(
                tally
                    .totals()
                    .iter()
                    .enumerate()
                    .map(|(i, &votes)| ExpectedTotal { candidate: style.candidate_name(i).to_string(), votes })
                    .collect(),
            ),
        })
    }

    /// The optimised ballots only.
    pub fn deck(&self, style: &BallotStyle) -> Result<Deck> {
        let n = style.num_candidates();
        Ok(Deck::new(self.ballots.iter().map(|b| from_one_based(b, n)).collect::<Result<_>>()?))
    }

    pub fn rule_ballots(&self, style: &BallotStyle) -> Result<Vec<Ballot>> {
        let n = style.num_candidates();
        self.rule_ballots.iter().map(|b| from_one_based(b, n)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapFile {
    pub sigma: Vec<usize>,
}

impl SwapFile {
    pub fn from_swap(sigma: &Swap) -> SwapFile {
        SwapFile { sigma: sigma.as_slice().iter().map(|&t| t + 1).collect() }
    }

    pub fn to_swap(&self) -> Result<Swap> {
        if self.sigma.contains(&0) {
            bail!("swap targets are one-based");
        }
        Ok(Swap::new(self.sigma.iter().map(|&t| t - 1).collect())?)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_style(path: &Path) -> Result<BallotStyle> {
    read_json::<StyleFile>(path)?.to_style().with_context(|| format!("invalid style in {}", path.display()))
}

/// Reads a deck as JSON, or as a 0/1 CSV matrix when the extension is
/// `.csv`. Rule ballots in a JSON file are appended after the deck.
pub fn read_deck(path: &Path, style: &BallotStyle) -> Result<Deck> {
    if path.extension().is_some_and(|e| e == "csv") {
        return read_deck_csv(path, style);
    }
    let file: DeckFile = read_json(path)?;
    if file.style_id != style.id {
        log::warn!("deck {} was written for style {:?}, checking against {:?}", path.display(), file.style_id, style.id);
    }
    let mut deck = file.deck(style)?;
    for b in file.rule_ballots(style)? {
        deck.push(b);
    }
    Ok(deck)
}

/// Header row of candidate names, one row of 0/1 cells per ballot.
pub fn write_deck_csv(path: &Path, style: &BallotStyle, deck: &Deck) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(style.candidate_names())?;
    for b in deck.ballots() {
        w.write_record((0..style.num_candidates()).map(|i| if b.contains(i) { "1" } else { "0" }))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_deck_csv(path: &Path, style: &BallotStyle) -> Result<Deck> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    // Columns are matched to candidates by name, so their order is free.
    let mut column_of = Vec::with_capacity(header.len());
    for name in header.iter() {
        match style.candidate_names().iter().position(|n| n == name) {
            Some(i) => column_of.push(i),
            None => bail!("column {name:?} is not a candidate of style {:?}", style.id),
        }
    }
    let mut ballots = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut marks = Vec::new();
        for (k, cell) in rec.iter().enumerate() {
            match cell.trim() {
                "1" => marks.push(column_of[k]),
                "0" | "" => {}
                other => bail!("row {}: cell {other:?} is not 0 or 1", row + 1),
            }
        }
        ballots.push(Ballot::new(marks));
    }
    Ok(Deck::new(ballots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use latdeck_core::samples::{heuristic_deck, president_senate};

    #[test]
    fn style_json_shape() {
        let text = r#"{"style_id": "s", "contests": [
            {"contest_id": "p", "candidates": ["a", "b", "c"], "max_votes": 1},
            {"contest_id": "q", "candidates": ["d", "e"], "max_votes": 1}]}"#;
        let style = serde_json::from_str::<StyleFile>(text).unwrap().to_style().unwrap();
        assert_eq!(style.num_candidates(), 5);
        assert_eq!(style.contest(1).candidates(), [3, 4]);
    }

    #[test]
    fn deck_files_are_one_based() {
        let s = president_senate();
        let f = DeckFile::new(&s, &heuristic_deck(), &[]).unwrap();
        assert_eq!(f.ballots[0], [1, 4]);
        let votes: Vec<usize> = f.expected.as_ref().unwrap().iter().map(|e| e.votes).collect();
        assert_eq!(votes, [1, 2, 3, 1, 2]);
        assert_eq!(f.deck(&s).unwrap(), heuristic_deck());
        let bad = DeckFile { ballots: vec![vec![0]], ..f };
        assert!(bad.deck(&s).is_err());
    }

    #[test]
    fn csv_deck() {
        let s = president_senate();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        write_deck_csv(&p, &s, &heuristic_deck()).unwrap();
        assert_eq!(read_deck(&p, &s).unwrap(), heuristic_deck());
    }

    #[test]
    fn swap_file() {
        let f = SwapFile { sigma: vec![1, 5, 3, 4, 2] };
        assert_eq!(f.to_swap().unwrap(), Swap::transposition(5, 1, 4));
        assert!(SwapFile { sigma: vec![1, 1] }.to_swap().is_err());
    }
}
