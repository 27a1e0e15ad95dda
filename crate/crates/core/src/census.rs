//! Ground-truth census: enumerate every diagram of at most `n` pawns and count
//! the unreachable ones with the greedy matcher.
//!
//! Subsets are walked in colex order (Gosper's hack) over a relabelled grid in
//! which bit order equals greedy order, so a reachability check is one pass
//! over the set bits with a free-file mask. Work splits into independent
//! `(pawn count, highest bit)` tasks whose counts merge by addition.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::board::{origin_unchecked, total_diagrams, BigCount, BoardSize, Square};
use crate::error::{Error, Result};
use crate::percent::Percent;

/// Largest board the 64-bit subset walker supports (`9 * 7 = 63` cells).
pub const MAX_BRUTE_N: usize = 9;
/// Above this size a brute-force run takes hours.
pub const PRACTICAL_BRUTE_N: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusResult {
    pub n: BoardSize,
    #[serde(with = "crate::board::big_count_serde")]
    pub unreachable: BigCount,
    #[serde(with = "crate::board::big_count_serde")]
    pub total: BigCount,
    /// Diagrams accounted for by the walk; equals `total` for a complete run.
    #[serde(with = "crate::board::big_count_serde")]
    pub visited: BigCount,
    pub percent: Percent,
}

impl CensusResult {
    fn new(n: BoardSize, unreachable: u64, visited: u64) -> Self {
        let total = total_diagrams(n);
        let unreachable = BigUint::from(unreachable);
        CensusResult {
            n,
            percent: Percent::from_ratio(&unreachable, &total),
            unreachable,
            total,
            visited: BigUint::from(visited),
        }
    }
}

/// Grid relabelled so that bit `j` is the `j`-th square in greedy order.
struct GreedyGrid {
    left_mask: Vec<u32>,
    right: Vec<u8>,
    mirror: Vec<u8>,
}

impl GreedyGrid {
    fn new(n: BoardSize) -> Self {
        let cells = n.cells();
        let mut order: Vec<Square> = (0..cells).map(|i| Square::from_index(i, n)).collect();
        order.sort_by_key(|&s| {
            let u = origin_unchecked(s, n);
            (u.r(), u.l(), s.index(n))
        });
        let mut position = vec![0u8; cells];
        for (j, s) in order.iter().enumerate() {
            position[s.index(n)] = j as u8;
        }
        let left_mask = order
            .iter()
            .map(|&s| u32::MAX << (origin_unchecked(s, n).l() - 1))
            .collect();
        let right = order
            .iter()
            .map(|&s| origin_unchecked(s, n).r() as u8)
            .collect();
        let mirror = order
            .iter()
            .map(|&s| position[s.mirrored(n).index(n)])
            .collect();
        GreedyGrid {
            left_mask,
            right,
            mirror,
        }
    }

    #[inline]
    fn reachable(&self, mut bits: u64) -> bool {
        let mut free = u32::MAX;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let candidates = free & self.left_mask[j];
            if candidates == 0 {
                return false;
            }
            let f = candidates.trailing_zeros();
            if f as u8 >= self.right[j] {
                return false;
            }
            free &= !(1 << f);
        }
        true
    }

    #[inline]
    fn mirrored(&self, mut bits: u64) -> u64 {
        let mut out = 0;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            out |= 1 << self.mirror[j];
        }
        out
    }
}

#[inline]
fn next_colex(x: u64) -> u64 {
    let c = x & x.wrapping_neg();
    let r = x + c;
    (((r ^ x) >> 2) / c) | r
}

/// Calls `visit` for every `k`-subset of the low `h` bits.
#[inline]
fn for_each_subset(k: usize, h: usize, mut visit: impl FnMut(u64)) {
    if k == 0 {
        visit(0);
        return;
    }
    if k > h {
        return;
    }
    let limit = 1u64 << h;
    let mut x = (1u64 << k) - 1;
    while x < limit {
        visit(x);
        x = next_colex(x);
    }
}

fn tasks(n: BoardSize) -> Vec<(usize, usize)> {
    let cells = n.cells();
    let mut tasks = Vec::new();
    for k in 1..=n.get() {
        for top in (k - 1)..cells {
            tasks.push((k, top));
        }
    }
    tasks
}

fn check_size(n: BoardSize) -> Result<()> {
    if n.get() > MAX_BRUTE_N {
        return Err(Error::CensusTooLarge {
            n: n.get(),
            max: MAX_BRUTE_N,
        });
    }
    Ok(())
}

/// Exact unreachable count by visiting all diagrams.
pub fn brute_force_count(n: BoardSize) -> Result<CensusResult> {
    check_size(n)?;
    let grid = GreedyGrid::new(n);
    let (unreachable, visited) = tasks(n)
        .into_par_iter()
        .map(|(k, top)| {
            let high = 1u64 << top;
            let (mut bad, mut seen) = (0u64, 0u64);
            for_each_subset(k - 1, top, |rest| {
                seen += 1;
                if !grid.reachable(rest | high) {
                    bad += 1;
                }
            });
            (bad, seen)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    // The empty diagram is reachable.
    Ok(CensusResult::new(n, unreachable, visited + 1))
}

/// Same count, checking only one diagram of each mirror pair.
pub fn reflection_pruned_count(n: BoardSize) -> Result<CensusResult> {
    Ok(reflection_census(n)?.result)
}

/// Breakdown of a reflection-pruned census.
#[derive(Clone, Debug)]
pub struct ReflectionCensus {
    pub result: CensusResult,
    /// Unreachable diagrams equal to their own mirror image.
    pub symmetric_unreachable: u64,
    /// Unreachable canonical representatives of asymmetric pairs.
    pub asymmetric_canonical_unreachable: u64,
}

pub fn reflection_census(n: BoardSize) -> Result<ReflectionCensus> {
    check_size(n)?;
    let grid = GreedyGrid::new(n);
    let (sym, asym, visited) = tasks(n)
        .into_par_iter()
        .map(|(k, top)| {
            let high = 1u64 << top;
            let (mut sym, mut asym, mut seen) = (0u64, 0u64, 0u64);
            for_each_subset(k - 1, top, |rest| {
                let d = rest | high;
                let m = grid.mirrored(d);
                if d > m {
                    return;
                }
                let weight = if d == m { 1 } else { 2 };
                seen += weight;
                if !grid.reachable(d) {
                    if d == m {
                        sym += 1;
                    } else {
                        asym += 1;
                    }
                }
            });
            (sym, asym, seen)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(ReflectionCensus {
        result: CensusResult::new(n, sym + 2 * asym, visited + 1),
        symmetric_unreachable: sym,
        asymmetric_canonical_unreachable: asym,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::{Diagram, SquareSet};
    use crate::reach::is_reachable;

    fn b(n: usize) -> BoardSize {
        BoardSize::new(n).unwrap()
    }

    #[test]
    fn small_counts() {
        assert_eq!(
            brute_force_count(b(3)).unwrap().unreachable,
            BigUint::from(0u32)
        );
        assert_eq!(
            brute_force_count(b(4)).unwrap().unreachable,
            BigUint::from(18u32)
        );
        assert_eq!(
            brute_force_count(b(5)).unwrap().unreachable,
            BigUint::from(550u32)
        );
        assert_eq!(
            brute_force_count(b(6)).unwrap().unreachable,
            BigUint::from(16398u32)
        );
    }

    #[test]
    fn reflection_agrees() {
        for n in 3..=6 {
            let plain = brute_force_count(b(n)).unwrap();
            let split = reflection_census(b(n)).unwrap();
            assert_eq!(plain, split.result);
            assert_eq!(
                BigUint::from(
                    split.symmetric_unreachable + 2 * split.asymmetric_canonical_unreachable
                ),
                plain.unreachable
            );
        }
    }

    #[test]
    fn visits_every_diagram() {
        for n in 3..=6 {
            let r = brute_force_count(b(n)).unwrap();
            assert_eq!(r.visited, r.total);
            let r = reflection_pruned_count(b(n)).unwrap();
            assert_eq!(r.visited, r.total);
        }
    }

    #[test]
    fn relabelled_check_matches_oracle() {
        // Every diagram of n=4 plus its greedy-grid encoding.
        let n = b(4);
        let grid = GreedyGrid::new(n);
        let cells = n.cells();
        let mut order: Vec<usize> = (0..cells).collect();
        order.sort_by_key(|&i| {
            let u = origin_unchecked(Square::from_index(i, n), n);
            (u.r(), u.l(), i)
        });
        for mask in 0u64..1 << cells {
            if mask.count_ones() as usize > n.get() {
                continue;
            }
            let set: SquareSet = order
                .iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .map(|(_, &i)| i)
                .collect();
            let d = Diagram::from_set(n, set).unwrap();
            assert_eq!(grid.reachable(mask), is_reachable(&d), "{d:?}");
        }
    }

    #[test]
    fn too_large_is_rejected() {
        assert!(brute_force_count(b(10)).is_err());
    }
}
