//! Synthetic benchmark styles.
//!
//! - Family 1: contests of sizes `1, 2, ..., C`, vote for one.
//! - Family 2: `C` contests of two candidates, vote for one.
//! - Family 3: contests of sizes `1, 2, ..., C` where every candidate can be
//!   selected (all noncompetitive).

use alloc::format;
use alloc::vec::Vec;

use crate::ballot::BallotStyle;
use crate::error::bail;
use crate::Result;

pub const MIN_CONTESTS: usize = 2;
pub const MAX_CONTESTS: usize = 12;

pub fn generate_experiment(family: u8, contests: usize) -> Result<BallotStyle> {
    if !(MIN_CONTESTS..=MAX_CONTESTS).contains(&contests) {
        bail!(InvalidInput, "contest count {contests} outside {MIN_CONTESTS}..={MAX_CONTESTS}");
    }
    let shapes: Vec<(usize, usize)> = match family {
        1 => (1..=contests).map(|c| (c, 1)).collect(),
        2 => (0..contests).map(|_| (2, 1)).collect(),
        3 => (1..=contests).map(|c| (c, c)).collect(),
        _ => bail!(InvalidInput, "unknown experiment family {family}"),
    };
    BallotStyle::from_shapes(format!("family{family}-C{contests}"), &shapes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shapes(s: &BallotStyle) -> Vec<(usize, usize)> {
        s.contests().iter().map(|c| (c.len(), c.max_votes())).collect()
    }

    #[test]
    fn families() {
        assert_eq!(shapes(&generate_experiment(2, 3).unwrap()), [(2, 1), (2, 1), (2, 1)]);
        assert_eq!(shapes(&generate_experiment(3, 2).unwrap()), [(1, 1), (2, 2)]);
        assert_eq!(shapes(&generate_experiment(1, 2).unwrap()), [(1, 1), (2, 1)]);
        assert_eq!(generate_experiment(1, 12).unwrap().num_candidates(), 78);
        assert!(generate_experiment(1, 1).is_err());
        assert!(generate_experiment(1, 13).is_err());
        assert!(generate_experiment(4, 3).is_err());
    }
}
