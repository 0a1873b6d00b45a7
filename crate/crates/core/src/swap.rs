//! Swaps (candidate permutations), their cycles, and the contest graph used
//! to split a swap into minimal pieces.

use alloc::vec;
use alloc::vec::Vec;

use crate::ballot::BallotStyle;
use crate::error::bail;
use crate::{Error, Result};

/// A bijection on candidates: candidate `i` is read from target `apply(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Swap {
    map: Vec<usize>,
}

impl Swap {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &j in &map {
            if j >= map.len() || seen[j] {
                bail!(InvalidInput, "mapping is not a bijection on 0..{}", map.len());
            }
            seen[j] = true;
        }
        Ok(Swap { map })
    }

    pub fn identity(n: usize) -> Self {
        Swap { map: (0..n).collect() }
    }

    /// Exchanges `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(a, b);
        Swap { map }
    }

    /// Builds a swap from cycles `(a b c)` meaning `a -> b -> c -> a`.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut map: Vec<usize> = (0..n).collect();
        for cyc in cycles {
            for (k, &a) in cyc.iter().enumerate() {
                if a >= n {
                    bail!(InvalidInput, "cycle element {a} out of range");
                }
                map[a] = cyc[(k + 1) % cyc.len()];
            }
        }
        Swap::new(map)
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Candidates not fixed by the swap, increasing.
    pub fn moved(&self) -> Vec<usize> {
        (0..self.map.len()).filter(|&i| self.map[i] != i).collect()
    }

    pub fn inverse(&self) -> Swap {
        let mut inv = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Swap { map: inv }
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Swap) -> Swap {
        Swap { map: other.map.iter().map(|&j| self.map[j]).collect() }
    }

    /// n-fold composition.
    pub fn pow(&self, n: usize) -> Swap {
        let mut out = Swap::identity(self.len());
        for _ in 0..n {
            out = self.compose(&out);
        }
        out
    }

    /// Disjoint cycles covering every candidate (fixed points are
    /// singleton cycles). Cycles are ordered by their smallest candidate and
    /// each cycle starts at its smallest candidate.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.map.len()];
        let mut out = Vec::new();
        for start in 0..self.map.len() {
            if seen[start] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cyc.push(i);
                i = self.map[i];
            }
            out.push(cyc);
        }
        out
    }
}

/// The contest graph of a swap: contests with a moved candidate, linked when
/// the swap maps a candidate of one contest to a target of the other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapGraph {
    /// Contests containing a moved candidate, increasing.
    pub vertices: Vec<usize>,
    /// Unordered contest pairs `(c, c')` with `c < c'`; loops are omitted.
    pub edges: Vec<(usize, usize)>,
    /// Connected components, each sorted, ordered by smallest contest.
    pub components: Vec<Vec<usize>>,
}

impl SwapGraph {
    pub fn num_components(&self) -> usize {
        self.components.len()
    }
}

pub fn build_swap_graph(style: &BallotStyle, sigma: &Swap) -> Result<SwapGraph> {
    style.check_swap(sigma)?;
    if sigma.is_identity() {
        bail!(InvalidInput, "the identity swap has no contest graph");
    }
    let nc = style.num_contests();
    let mut is_vertex = vec![false; nc];
    let mut parent: Vec<usize> = (0..nc).collect();
    let mut edges = Vec::new();
    for i in sigma.moved() {
        let (a, b) = (style.contest_of(i), style.contest_of(sigma.apply(i)));
        is_vertex[a] = true;
        is_vertex[b] = true;
        if a != b {
            edges.push((a.min(b), a.max(b)));
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let vertices: Vec<usize> = (0..nc).filter(|&c| is_vertex[c]).collect();
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; nc];
    for &c in &vertices {
        let r = find(&mut parent, c);
        if slot[r] == usize::MAX {
            slot[r] = components.len();
            components.push(Vec::new());
        }
        components[slot[r]].push(c);
    }
    Ok(SwapGraph { vertices, edges, components })
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// A swap is minimal when its contest graph is connected.
pub fn is_minimal(style: &BallotStyle, sigma: &Swap) -> Result<bool> {
    Ok(build_swap_graph(style, sigma)?.num_components() == 1)
}

/// Restricts the swap to each connected component of its contest graph,
/// acting as the identity elsewhere. Every piece is minimal, and a deck
/// that hides the swap also hides every piece.
pub fn split_by_components(style: &BallotStyle, sigma: &Swap) -> Result<Vec<Swap>> {
    let graph = build_swap_graph(style, sigma)?;
    let mut comp_of = vec![usize::MAX; style.num_contests()];
    for (k, comp) in graph.components.iter().enumerate() {
        for &c in comp {
            comp_of[c] = k;
        }
    }
    let n = sigma.len();
    let pieces = (0..graph.components.len())
        .map(|k| {
            let map = (0..n)
                .map(|i| if comp_of[style.contest_of(i)] == k { sigma.apply(i) } else { i })
                .collect();
            Swap::new(map).map_err(|_| Error::Internal("component restriction is not a bijection".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::{heuristic_deck, president_senate};
    use proptest::prelude::*;

    fn five_contests() -> BallotStyle {
        BallotStyle::from_shapes("five", &[(2, 1), (2, 1), (2, 1), (2, 1), (2, 1)]).unwrap()
    }

    #[test]
    fn cross_contest_transposition() {
        let s = president_senate();
        let g = build_swap_graph(&s, &Swap::transposition(5, 1, 4)).unwrap();
        assert_eq!(g.vertices, [0, 1]);
        assert_eq!(g.edges, [(0, 1)]);
        assert_eq!(g.num_components(), 1);
        assert!(is_minimal(&s, &Swap::transposition(5, 0, 2)).unwrap());
        assert!(build_swap_graph(&s, &Swap::identity(5)).is_err());
    }

    #[test]
    fn three_cycle_in_one_contest() {
        let s = president_senate();
        let sigma = Swap::from_cycles(5, &[&[0, 1, 2]]).unwrap();
        let g = build_swap_graph(&s, &sigma).unwrap();
        assert_eq!(g.vertices, [0]);
        assert_eq!(g.num_components(), 1);
        assert_eq!(sigma.cycles(), [vec![0, 1, 2], vec![3], vec![4]]);
    }

    #[test]
    fn two_components() {
        // contests 0..5 hold candidates (0,1),(2,3),(4,5),(6,7),(8,9)
        let s = five_contests();
        let sigma = Swap::from_cycles(10, &[&[0, 2], &[1, 5, 3], &[6, 9], &[7, 8]]).unwrap();
        let g = build_swap_graph(&s, &sigma).unwrap();
        assert_eq!(g.components, [vec![0, 1, 2], vec![3, 4]]);
        assert!(!is_minimal(&s, &sigma).unwrap());
        let parts = split_by_components(&s, &sigma).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].moved(), [0, 1, 2, 3, 5]);
        assert_eq!(parts[1].moved(), [6, 7, 8, 9]);
        assert_eq!(parts[0].compose(&parts[1]), sigma);
    }

    #[test]
    fn cycles_of_transposition() {
        let sigma = Swap::transposition(5, 1, 4);
        assert_eq!(sigma.cycles(), [vec![0], vec![1, 4], vec![2], vec![3]]);
        assert_eq!(Swap::identity(3).cycles().len(), 3);
        assert!(Swap::new(vec![0, 0]).is_err());
    }

    #[test]
    fn pieces_of_hidden_swap_stay_hidden() {
        let s = president_senate();
        let d = heuristic_deck();
        let sigma = Swap::transposition(5, 1, 4);
        for p in split_by_components(&s, &sigma).unwrap() {
            assert!(!s.detects(&d, &p).unwrap());
        }
    }

    fn style_and_swap() -> impl Strategy<Value = (BallotStyle, Swap)> {
        prop::collection::vec(1usize..=3, 1..=4)
            .prop_flat_map(|sizes| {
                let n: usize = sizes.iter().sum();
                (Just(sizes), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
            })
            .prop_filter_map("identity", |(sizes, perm)| {
                let shapes: Vec<(usize, usize)> = sizes.iter().map(|&s| (s, 1)).collect();
                let sigma = Swap::new(perm).unwrap();
                (!sigma.is_identity()).then(|| (BallotStyle::from_shapes("p", &shapes).unwrap(), sigma))
            })
    }

    proptest! {
        #[test]
        fn split_partitions_moved_points((style, sigma) in style_and_swap()) {
            let g = build_swap_graph(&style, &sigma).unwrap();
            for &(a, b) in &g.edges {
                prop_assert!(g.components.iter().any(|k| k.contains(&a) && k.contains(&b)));
            }
            let parts = split_by_components(&style, &sigma).unwrap();
            prop_assert_eq!(parts.len(), g.num_components());
            let mut moved: Vec<usize> = parts.iter().flat_map(|p| p.moved()).collect();
            moved.sort_unstable();
            prop_assert_eq!(moved, sigma.moved());
            let mut acc = Swap::identity(sigma.len());
            for (a, p) in parts.iter().enumerate() {
                prop_assert!(is_minimal(&style, p).unwrap());
                for q in &parts[a + 1..] {
                    prop_assert_eq!(p.compose(q), q.compose(p));
                }
                acc = p.compose(&acc);
            }
            prop_assert_eq!(acc, sigma);
        }

        #[test]
        fn cycles_cover_and_follow_map(perm in Just((0..7usize).collect::<Vec<_>>()).prop_shuffle()) {
            let sigma = Swap::new(perm).unwrap();
            let cycles = sigma.cycles();
            let mut all: Vec<usize> = cycles.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..7).collect::<Vec<_>>());
            for cyc in &cycles {
                prop_assert_eq!(cyc[0], *cyc.iter().min().unwrap());
                for k in 0..cyc.len() {
                    prop_assert_eq!(sigma.apply(cyc[k]), cyc[(k + 1) % cyc.len()]);
                }
            }
            prop_assert!(cycles.windows(2).all(|w| w[0][0] < w[1][0]));
        }
    }
}
