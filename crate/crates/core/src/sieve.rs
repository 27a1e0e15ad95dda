//! Inclusion-exclusion over combinations of family signatures.
//!
//! Any set of intervals splits into continuous components whose spans are at
//! least one file apart, and the components' triangle unions are disjoint.
//! So the constraint count of an arbitrary family factorizes over its
//! components, and the components differ from the enumerated anchored
//! families only by displacement and reflection. A combination picks one
//! signature per component; its contribution is
//!
//! ```text
//! (-1)^(Σz + 1) · Π C(s) · F(S) · R(S)
//! ```
//!
//! where `F` counts the ways to place the components on the board and `R`
//! counts the ways to fill the rest of the grid with the leftover pawns.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::board::{binomial, total_diagrams, BigCount, BoardSize};
use crate::family::FamilyClass;
use crate::percent::Percent;
use crate::solution::FamilyCount;

/// Everything the sieve needs to know about one (family, pawn count) pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub edge: bool,
    /// Span width `w`.
    pub width: u8,
    /// Pawns inside the covered cells, `p`.
    pub pawns: u8,
    /// Number of intervals, `z`.
    pub intervals: u8,
    /// Covered cells `q = |⋃V|`.
    pub covered: u16,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(e={} w={} p={} z={} q={})",
            self.edge as u8, self.width, self.pawns, self.intervals, self.covered
        )
    }
}

/// Summed counts `C(s)` per signature, over all enumerated families.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignatureTable {
    counts: BTreeMap<Signature, u128>,
}

impl SignatureTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, s: Signature, count: u128) {
        if count > 0 {
            *self.counts.entry(s).or_insert(0) += count;
        }
    }

    pub fn add_family(
        &mut self,
        class: FamilyClass,
        width: usize,
        intervals: usize,
        counts: &FamilyCount,
    ) {
        for (p, c) in counts.nonzero() {
            self.add(
                Signature {
                    edge: class == FamilyClass::Edge,
                    width: width as u8,
                    pawns: p as u8,
                    intervals: intervals as u8,
                    covered: counts.q as u16,
                },
                c,
            );
        }
    }

    pub fn merge(&mut self, other: &SignatureTable) {
        for (&s, &c) in &other.counts {
            self.add(s, c);
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Signature, u128)> + '_ {
        self.counts.iter().map(|(&s, &c)| (s, c))
    }

    /// Merged classes `(e, w, p, q)` with signed weights `Σ (-1)^z C(s)`.
    fn merged(&self) -> Vec<Item> {
        let mut classes: BTreeMap<(bool, u8, u8, u16), BigInt> = BTreeMap::new();
        for (s, c) in self.iter() {
            let w = classes
                .entry((s.edge, s.width, s.pawns, s.covered))
                .or_insert_with(BigInt::zero);
            if s.intervals % 2 == 0 {
                *w += c;
            } else {
                *w -= c;
            }
        }
        classes
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|((edge, width, pawns, covered), weight)| Item {
                edge,
                width: width as usize,
                pawns: pawns as usize,
                covered: covered as usize,
                weight,
            })
            .collect()
    }

    fn raw(&self) -> Vec<Item> {
        self.iter()
            .map(|(s, c)| Item {
                edge: s.edge,
                width: s.width as usize,
                pawns: s.pawns as usize,
                covered: s.covered as usize,
                weight: if s.intervals % 2 == 0 {
                    BigInt::from(c)
                } else {
                    -BigInt::from(c)
                },
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
struct Item {
    edge: bool,
    width: usize,
    pawns: usize,
    covered: usize,
    /// `(-1)^z C`, possibly summed over several signatures.
    weight: BigInt,
}

/// Placement count for a multiset of components.
///
/// `edges` are the widths of edge members; `interior` lists the widths of
/// non-edge members grouped by identity as `(width, multiplicity)`.
/// `identical_edges` says whether two edge members are the same signature.
pub fn placement_count(
    n: usize,
    edges: &[usize],
    identical_edges: bool,
    interior: &[(usize, usize)],
) -> BigUint {
    let g = |len: i64| -> BigUint {
        let m: usize = interior.iter().map(|&(_, k)| k).sum();
        if m == 0 {
            return BigUint::one();
        }
        let total: i64 = interior.iter().map(|&(w, k)| (w * k) as i64).sum();
        let mut arrangements = factorial(m);
        for &(_, k) in interior {
            arrangements /= factorial(k);
        }
        let gaps = len - total + 1;
        if gaps < 0 {
            return BigUint::zero();
        }
        arrangements * binomial(gaps as u64, m as i64)
    };
    let n_ = n as i64;
    match *edges {
        [] => g(n_ - 2),
        [w] if w == n => {
            if interior.is_empty() {
                BigUint::one()
            } else {
                BigUint::zero()
            }
        }
        [w] => g(n_ - 2 - w as i64) * 2u32,
        [w1, w2] => {
            if w1 + w2 + 1 > n {
                return BigUint::zero();
            }
            let sides: u32 = if identical_edges { 1 } else { 2 };
            g(n_ - 2 - (w1 + w2) as i64) * sides
        }
        _ => BigUint::zero(),
    }
}

fn factorial(k: usize) -> BigUint {
    (1..=k as u64).fold(BigUint::one(), |acc, i| acc * i)
}

/// Diagrams of at most `n - pawns` pawns on the cells outside `⋃V`.
pub fn remainder_count(n: BoardSize, pawns: usize, covered: usize) -> BigUint {
    let Some(free_pawns) = n.get().checked_sub(pawns) else {
        return BigUint::zero();
    };
    let free_cells = n.cells().saturating_sub(covered) as u64;
    (0..=free_pawns as i64)
        .map(|r| binomial(free_cells, r))
        .sum()
}

/// One combination with a nonzero contribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contribution {
    /// Members in signature order, repeated by multiplicity.
    pub members: Vec<Signature>,
    /// `Π C(s)`.
    pub coefficient: BigUint,
    pub placements: BigUint,
    pub remainder: BigUint,
    /// Signed contribution to the unreachable count.
    pub value: BigInt,
}

impl fmt::Display for Contribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.value.is_negative() { '-' } else { '+' };
        write!(f, "{sign}{} =", self.value.abs())?;
        for (i, s) in self.members.iter().enumerate() {
            f.write_str(if i == 0 { " " } else { " + " })?;
            write!(f, "{s}")?;
        }
        write!(
            f,
            "  C={} F={} R={}",
            self.coefficient, self.placements, self.remainder
        )
    }
}

/// Walks every multiset of items with `Σp <= n` and a possible placement,
/// calling `visit(chosen, F, R)`.
fn for_each_combination(
    n: BoardSize,
    items: &[Item],
    mut visit: impl FnMut(&[usize], &BigUint, &BigUint),
) {
    let mut chosen = Vec::new();
    combinations(n, items, 0, 0, 0, 0, &mut chosen, &mut visit);
}

#[allow(clippy::too_many_arguments)]
fn combinations(
    n: BoardSize,
    items: &[Item],
    start: usize,
    pawns: usize,
    used_files: usize,
    edges: usize,
    chosen: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize], &BigUint, &BigUint),
) {
    for i in start..items.len() {
        let it = &items[i];
        let pawns = pawns + it.pawns;
        // Members need pairwise gaps, so `Σw + (m - 1) <= n`.
        let files = used_files + it.width + usize::from(!chosen.is_empty());
        let edges = edges + usize::from(it.edge);
        if pawns > n.get() || files > n.get() || edges > 2 {
            continue;
        }
        chosen.push(i);
        let covered: usize = chosen.iter().map(|&j| items[j].covered).sum();
        let f = placements_of(n.get(), items, chosen);
        if !f.is_zero() {
            let r = remainder_count(n, pawns, covered);
            visit(chosen, &f, &r);
        }
        combinations(n, items, i, pawns, files, edges, chosen, visit);
        chosen.pop();
    }
}

fn placements_of(n: usize, items: &[Item], chosen: &[usize]) -> BigUint {
    let edge_ids: Vec<usize> = chosen.iter().copied().filter(|&j| items[j].edge).collect();
    let edges: Vec<usize> = edge_ids.iter().map(|&j| items[j].width).collect();
    let identical = edge_ids.len() == 2 && edge_ids[0] == edge_ids[1];
    let mut interior: Vec<(usize, usize)> = Vec::new();
    let mut last = None;
    for &j in chosen.iter().filter(|&&j| !items[j].edge) {
        if last == Some(j) {
            interior.last_mut().expect("run started").1 += 1;
        } else {
            interior.push((items[j].width, 1));
            last = Some(j);
        }
    }
    placement_count(n, &edges, identical, &interior)
}

fn signed(f: &BigUint, r: &BigUint, weights: impl Iterator<Item = BigInt>) -> BigInt {
    let product = weights.fold(BigInt::one(), |acc, w| acc * w);
    -(product * BigInt::from(f.clone()) * BigInt::from(r.clone()))
}

/// Every nonzero contribution, one per signature multiset.
pub fn contribution_ledger(n: BoardSize, table: &SignatureTable) -> Vec<Contribution> {
    let sigs: Vec<(Signature, u128)> = table.iter().collect();
    let items = table.raw();
    let mut out = Vec::new();
    for_each_combination(n, &items, |chosen, f, r| {
        let value = signed(f, r, chosen.iter().map(|&j| items[j].weight.clone()));
        if value.is_zero() {
            return;
        }
        out.push(Contribution {
            members: chosen.iter().map(|&j| sigs[j].0).collect(),
            coefficient: chosen.iter().map(|&j| BigUint::from(sigs[j].1)).product(),
            placements: f.clone(),
            remainder: r.clone(),
            value,
        });
    });
    out
}

fn into_count(total: BigInt) -> BigCount {
    total
        .to_biguint()
        .expect("inclusion-exclusion total is nonnegative")
}

/// Unreachable count, summing merged `(e, w, p, q)` classes.
pub fn sieve_total(n: BoardSize, table: &SignatureTable) -> BigCount {
    let items = table.merged();
    let mut total = BigInt::zero();
    for_each_combination(n, &items, |chosen, f, r| {
        total += signed(f, r, chosen.iter().map(|&j| items[j].weight.clone()));
    });
    into_count(total)
}

/// Unreachable count, summing over every signature multiset.
pub fn sieve_total_raw(n: BoardSize, table: &SignatureTable) -> BigCount {
    let items = table.raw();
    let mut total = BigInt::zero();
    for_each_combination(n, &items, |chosen, f, r| {
        total += signed(f, r, chosen.iter().map(|&j| items[j].weight.clone()));
    });
    into_count(total)
}

/// Unreachable count from a dynamic program over ordered placements: a
/// left edge slot, a right edge slot and a left-to-right run of interior
/// components. No multiset bookkeeping is involved.
pub fn sieve_total_by_placement(n: BoardSize, table: &SignatureTable) -> BigCount {
    let items = table.merged();
    let size = n.get();
    let (edge, interior): (Vec<&Item>, Vec<&Item>) = items.iter().partition(|it| it.edge);

    // runs[(m, Σw, Σp, Σq)] = Σ over ordered interior sequences of Π weight.
    type Key = (usize, usize, usize, usize);
    let mut runs: BTreeMap<Key, BigInt> = BTreeMap::new();
    runs.insert((0, 0, 0, 0), BigInt::one());
    let mut frontier: Vec<(Key, BigInt)> = vec![((0, 0, 0, 0), BigInt::one())];
    while !frontier.is_empty() {
        let mut next: BTreeMap<Key, BigInt> = BTreeMap::new();
        for ((m, w, p, q), value) in &frontier {
            for it in &interior {
                let key = (m + 1, w + it.width, p + it.pawns, q + it.covered);
                if key.2 > size || key.1 + m > size {
                    continue;
                }
                *next.entry(key).or_insert_with(BigInt::zero) += value * &it.weight;
            }
        }
        for (k, v) in &next {
            *runs.entry(*k).or_insert_with(BigInt::zero) += v;
        }
        frontier = next.into_iter().collect();
    }

    let one = Item {
        edge: true,
        width: 0,
        pawns: 0,
        covered: 0,
        weight: BigInt::one(),
    };
    let mut total = BigInt::zero();
    let slots = |right: bool| {
        std::iter::once(&one).chain(
            edge.iter()
                .copied()
                .filter(move |it| !right || it.width < size),
        )
    };
    for left in slots(false) {
        for right in slots(true) {
            let (wl, wr) = (left.width, right.width);
            let both = wl > 0 && wr > 0;
            if both && (wl == size || wl + wr + 1 > size) {
                continue;
            }
            // Interior components live strictly between the edge members.
            let full = wl == size || wr == size;
            let len = size as i64 - 2 - wl as i64 - wr as i64;
            let edge_weight = &left.weight * &right.weight;
            for (&(m, w, p, q), weight) in &runs {
                if m == 0 && wl == 0 && wr == 0 {
                    continue;
                }
                if full && m > 0 {
                    continue;
                }
                let pawns = p + left.pawns + right.pawns;
                if pawns > size {
                    continue;
                }
                let ways = if m == 0 {
                    BigUint::one()
                } else {
                    let gaps = len - w as i64 + 1;
                    if gaps < 0 {
                        continue;
                    }
                    binomial(gaps as u64, m as i64)
                };
                let r = remainder_count(n, pawns, q + left.covered + right.covered);
                total -= &edge_weight * weight * BigInt::from(ways) * BigInt::from(r);
            }
        }
    }
    into_count(total)
}

/// `100 · unreachable / total`, two decimals.
pub fn percent_unreachable(n: BoardSize, unreachable: &BigCount) -> Percent {
    Percent::from_ratio(unreachable, &total_diagrams(n))
}
