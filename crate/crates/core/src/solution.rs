//! Pawn-count solutions over a family's partition and the number of diagrams
//! inside `⋃V` each one stands for.
//!
//! A ledger entry is keyed by the pawn counts of the live parts plus the
//! running total `p`. Its value is the product of `C(|ρ|, count)` over the
//! retired parts; live parts contribute their binomial only when the ledger
//! is evaluated, so splitting a live part never divides.

use rustc_hash::FxHashMap;

use crate::board::{BinomialTable, FileInterval, Geometry};
use crate::error::Result;
use crate::partition::{PartFate, PartitionState, SplitMap};

/// How retired parts are accounted for.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LedgerMode {
    /// Retired counts are folded into the entry value.
    #[default]
    Collapsed,
    /// Retired counts stay in the key; values are only multiplied at the end.
    Uncollapsed,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolutionLedger {
    mode: LedgerMode,
    /// Key layout: live counts, then retired counts (uncollapsed only), then `p`.
    entries: FxHashMap<Box<[u8]>, u128>,
}

impl SolutionLedger {
    /// The empty family: one empty solution of weight 1.
    pub fn new(mode: LedgerMode) -> Self {
        let mut entries = FxHashMap::default();
        entries.insert(vec![0u8].into_boxed_slice(), 1);
        SolutionLedger { mode, entries }
    }

    pub fn mode(&self) -> LedgerMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[u8], u128)> {
        self.entries.iter().map(|(k, &v)| (&k[..], v))
    }

    /// Diagrams inside `⋃V` by pawn total, given the state the ledger belongs to.
    pub fn totals_by_pawns(
        &self,
        state: &PartitionState,
        binom: &BinomialTable,
        n: usize,
    ) -> Vec<u128> {
        let live: Vec<u32> = state.live_parts().iter().map(|p| p.size).collect();
        let retired: Vec<u32> = match self.mode {
            LedgerMode::Collapsed => Vec::new(),
            LedgerMode::Uncollapsed => state.retired_parts().iter().map(|p| p.size).collect(),
        };
        let mut totals = vec![0u128; n + 1];
        for (key, &value) in &self.entries {
            let p = *key.last().unwrap() as usize;
            let mut c = value;
            for (&size, &x) in live.iter().chain(&retired).zip(key.iter()) {
                c = c
                    .checked_mul(binom.get(size, x as u32))
                    .expect("count overflow");
            }
            totals[p] += c;
        }
        totals
    }
}

/// Extends every solution of `V \ v` to the solutions of `V` that put more
/// than `|u|` pawns in the new triangle, within a supply of `budget` pawns.
pub fn produce_solutions(
    ledger: &SolutionLedger,
    split: &SplitMap,
    budget: usize,
    binom: &BinomialTable,
) -> SolutionLedger {
    let mut out = SolutionLedger {
        mode: ledger.mode,
        entries: FxHashMap::default(),
    };
    let old_live = split.fates.len();
    let mut producer = Producer {
        split,
        binom,
        budget: budget as u32,
        mode: ledger.mode,
        out: &mut out.entries,
        live: Vec::with_capacity(split.live_count + 1),
        retired: Vec::new(),
        reach: vec![0; old_live + 1],
        prior_retired: &[],
        p: 0,
    };
    for (key, &value) in &ledger.entries {
        let p = *key.last().unwrap() as u32;
        let counts = &key[..old_live];
        producer.prior_retired = &key[old_live..key.len() - 1];
        producer.p = p;
        // reach[j]: most pawns parts j.. can still put inside the new triangle.
        for j in (0..old_live).rev() {
            let own = match split.fates[j] {
                PartFate::Retired { .. } => 0,
                PartFate::Split { inside, .. } => {
                    inside.map_or(0, |(_, s)| s.min(counts[j] as u32))
                }
            };
            producer.reach[j] = producer.reach[j + 1] + own;
        }
        producer.live.clear();
        producer.retired.clear();
        producer.descend(0, counts, value, 0);
    }
    out
}

struct Producer<'a> {
    split: &'a SplitMap,
    binom: &'a BinomialTable,
    budget: u32,
    mode: LedgerMode,
    out: &'a mut FxHashMap<Box<[u8]>, u128>,
    live: Vec<u8>,
    retired: Vec<u8>,
    reach: Vec<u32>,
    prior_retired: &'a [u8],
    p: u32,
}

impl Producer<'_> {
    fn retire(&mut self, size: u32, pawns: u32, value: u128) -> u128 {
        match self.mode {
            LedgerMode::Collapsed => value
                .checked_mul(self.binom.get(size, pawns))
                .expect("count overflow"),
            LedgerMode::Uncollapsed => {
                self.retired.push(pawns as u8);
                value
            }
        }
    }

    fn unretire(&mut self) {
        if self.mode == LedgerMode::Uncollapsed {
            self.retired.pop();
        }
    }

    fn descend(&mut self, j: usize, counts: &[u8], value: u128, inside: u32) {
        let orphan_room = self
            .split
            .orphan
            .map_or(0, |(_, s)| s.min(self.budget - self.p));
        if inside + self.reach[j] + orphan_room < self.split.demand() {
            return;
        }
        if j == counts.len() {
            self.finish(value, inside);
            return;
        }
        let x = counts[j] as u32;
        match self.split.fates[j] {
            PartFate::Retired { size } => {
                let v = self.retire(size, x, value);
                self.descend(j + 1, counts, v, inside);
                self.unretire();
            }
            PartFate::Split {
                inside: piece_in,
                outside: piece_out,
                remainder,
            } => {
                let size_in = piece_in.map_or(0, |(_, s)| s);
                let size_out = piece_out.map_or(0, |(_, s)| s);
                for y_in in (0..=x.min(size_in)).rev() {
                    let rest = x - y_in;
                    if rest > size_out + remainder {
                        break;
                    }
                    if piece_in.is_some() {
                        self.live.push(y_in as u8);
                    }
                    let lo = rest.saturating_sub(remainder);
                    for y_out in lo..=rest.min(size_out) {
                        if piece_out.is_some() {
                            self.live.push(y_out as u8);
                        }
                        if remainder > 0 {
                            let v = self.retire(remainder, rest - y_out, value);
                            self.descend(j + 1, counts, v, inside + y_in);
                            self.unretire();
                        } else {
                            self.descend(j + 1, counts, value, inside + y_in);
                        }
                        pop_if(&mut self.live, piece_out.is_some());
                    }
                    pop_if(&mut self.live, piece_in.is_some());
                }
            }
        }
    }

    fn finish(&mut self, value: u128, inside: u32) {
        let demand = self.split.demand();
        let mut key =
            Vec::with_capacity(self.live.len() + self.retired.len() + self.prior_retired.len() + 2);
        match self.split.orphan {
            None => {
                if inside < demand {
                    return;
                }
                key.extend_from_slice(&self.live);
                self.emit(key, value, self.p);
            }
            Some((_, size)) => {
                let lo = demand.saturating_sub(inside);
                let hi = size.min(self.budget - self.p);
                for y in lo..=hi {
                    let mut key = key.clone();
                    key.extend_from_slice(&self.live);
                    key.push(y as u8);
                    self.emit(key, value, self.p + y);
                }
            }
        }
    }

    fn emit(&mut self, mut key: Vec<u8>, value: u128, p: u32) {
        if self.mode == LedgerMode::Uncollapsed {
            key.extend_from_slice(self.prior_retired);
            key.extend_from_slice(&self.retired);
        }
        key.push(p as u8);
        let slot = self.out.entry(key.into_boxed_slice()).or_insert(0);
        *slot = slot.checked_add(value).expect("count overflow");
    }
}

#[inline]
fn pop_if(v: &mut Vec<u8>, present: bool) {
    if present {
        v.pop();
    }
}

/// In-`⋃V` diagram counts of one satisfiable family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyCount {
    /// Index `p`: diagrams with exactly `p` pawns, all inside `⋃V`.
    pub by_pawns: Vec<u128>,
    /// `|⋃V|`.
    pub q: u32,
}

impl FamilyCount {
    pub fn from_ledger(
        ledger: &SolutionLedger,
        state: &PartitionState,
        binom: &BinomialTable,
        n: usize,
    ) -> Self {
        FamilyCount {
            by_pawns: ledger.totals_by_pawns(state, binom, n),
            q: state.covered(),
        }
    }

    pub fn total(&self) -> u128 {
        self.by_pawns.iter().sum()
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (usize, u128)> + '_ {
        self.by_pawns
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, c)| c > 0)
    }
}

/// Table sized for every binomial the counter needs on this board.
pub fn binomial_table(geom: &Geometry) -> BinomialTable {
    let n = geom.board();
    BinomialTable::new(n.cells(), n.get())
}

/// Runs refinement and production over `intervals` from scratch. `None` when
/// the family is unsatisfiable; an error when the intervals are out of order.
pub fn count_for_family_with(
    intervals: &[FileInterval],
    geom: &Geometry,
    mode: LedgerMode,
) -> Result<Option<FamilyCount>> {
    let binom = binomial_table(geom);
    let n = geom.board().get();
    let mut state = PartitionState::new();
    let mut ledger = SolutionLedger::new(mode);
    for &u in intervals {
        let (next, split) = state.refine(u, geom)?;
        ledger = produce_solutions(&ledger, &split, n, &binom);
        state = next;
        if ledger.is_empty() {
            // Later intervals could only tighten the constraints, but keep
            // validating their order.
            for w in intervals.windows(2) {
                if w[1] <= w[0] {
                    return Err(crate::error::Error::Ordering {
                        prev: w[0].to_string(),
                        next: w[1].to_string(),
                    });
                }
            }
            return Ok(None);
        }
    }
    Ok(Some(FamilyCount::from_ledger(&ledger, &state, &binom, n)))
}

pub fn count_for_family(
    intervals: &[FileInterval],
    geom: &Geometry,
) -> Result<Option<FamilyCount>> {
    count_for_family_with(intervals, geom, LedgerMode::Collapsed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::BoardSize;

    fn g(n: usize) -> Geometry {
        Geometry::new(BoardSize::new(n).unwrap())
    }

    fn fam(list: &[(usize, usize)]) -> Vec<FileInterval> {
        list.iter().map(|&(l, r)| FileInterval::raw(l, r)).collect()
    }

    #[test]
    fn n4_examples() {
        let geom = g(4);
        let c = count_for_family(&fam(&[(1, 2)]), &geom).unwrap().unwrap();
        assert_eq!(c.by_pawns, vec![0, 0, 0, 1, 0]);
        assert_eq!(c.q, 3);
        let c = count_for_family(&fam(&[(1, 3)]), &geom).unwrap().unwrap();
        assert_eq!(c.by_pawns, vec![0, 0, 0, 0, 5]);
        assert_eq!(c.q, 5);
        let c = count_for_family(&fam(&[(1, 2), (1, 3)]), &geom)
            .unwrap()
            .unwrap();
        assert_eq!(c.by_pawns, vec![0, 0, 0, 0, 2]);
        assert_eq!(c.q, 5);
    }

    #[test]
    fn n4_production_step() {
        let geom = g(4);
        let binom = binomial_table(&geom);
        let (s1, split1) = PartitionState::new()
            .refine(FileInterval::raw(1, 2), &geom)
            .unwrap();
        let l1 = produce_solutions(
            &SolutionLedger::new(LedgerMode::Collapsed),
            &split1,
            4,
            &binom,
        );
        assert_eq!(l1.entries().collect::<Vec<_>>(), vec![(&[3u8, 3][..], 1)]);
        let (s2, split2) = s1.refine(FileInterval::raw(1, 3), &geom).unwrap();
        let l2 = produce_solutions(&l1, &split2, 4, &binom);
        // Part of three squares keeps its three pawns; the orphan {b3, c2} takes one.
        assert_eq!(
            l2.entries().collect::<Vec<_>>(),
            vec![(&[3u8, 1, 4][..], 1)]
        );
        assert_eq!(l2.totals_by_pawns(&s2, &binom, 4), vec![0, 0, 0, 0, 2]);
    }

    #[test]
    fn unsatisfiable_and_misordered() {
        let geom = g(4);
        assert_eq!(count_for_family(&fam(&[(1, 1)]), &geom).unwrap(), None);
        assert_eq!(
            count_for_family(&fam(&[(1, 2), (2, 4)]), &geom).unwrap(),
            None
        );
        assert!(count_for_family(&fam(&[(1, 3), (1, 2)]), &geom).is_err());
    }

    #[test]
    fn empty_family_is_one_empty_solution() {
        let geom = g(5);
        let c = count_for_family(&[], &geom).unwrap().unwrap();
        assert_eq!(c.by_pawns, vec![1, 0, 0, 0, 0, 0]);
        assert_eq!(c.q, 0);
    }
}
