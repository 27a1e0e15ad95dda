//! Enumeration of satisfiable interval families.
//!
//! A family `U` is an ordered set of file intervals; it is satisfiable when
//! some placement of at most `n` pawns puts more than `|u|` pawns in every
//! `v_u`. Only continuous, anchored families are enumerated: edge families
//! start at file 1, non-edge families start at file 2 and end before file `n`.
//! Every other family is a displacement, a reflection, or a disjoint multiset
//! of these, which the sieve accounts for.
//!
//! The walk is a depth-first search over families in lexicographic order.
//! Superset closure of unsatisfiability prunes whole subtrees, and three
//! further rules skip siblings without counting them:
//!
//! * an unsatisfiable `U + [l, r]` makes `U + [l, r']` unsatisfiable for all
//!   `r' > r` (right-lengthening);
//! * when `r + 1 < n`, it also makes `U + [l + 1, r + 1]` unsatisfiable
//!   (right-shifting), so later left ends are capped in width;
//! * a family with a displaced or reflected unsatisfiable sub-family (a core)
//!   is unsatisfiable.

use rustc_hash::FxHashSet as HashSet;
use std::fmt;
use std::io::{BufRead, Write};

use crate::board::{BinomialTable, BoardSize, FileInterval, Geometry};
use crate::error::{Error, Result};
use crate::partition::PartitionState;
use crate::solution::{binomial_table, produce_solutions, FamilyCount, LedgerMode, SolutionLedger};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyClass {
    Edge,
    NonEdge,
}

impl FamilyClass {
    /// Files intervals of this class may use.
    pub fn bounds(self, n: BoardSize) -> (usize, usize) {
        match self {
            FamilyClass::Edge => (1, n.get()),
            FamilyClass::NonEdge => (2, n.get() - 1),
        }
    }
}

impl fmt::Display for FamilyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyClass::Edge => "edge",
            FamilyClass::NonEdge => "non-edge",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntervalFamily {
    pub class: FamilyClass,
    pub intervals: Vec<FileInterval>,
}

impl IntervalFamily {
    pub fn new(class: FamilyClass, intervals: Vec<FileInterval>) -> Self {
        IntervalFamily { class, intervals }
    }

    /// `(⋃U)_l, (⋃U)_r`.
    pub fn span(&self) -> Option<(usize, usize)> {
        span(&self.intervals)
    }

    pub fn width(&self) -> usize {
        self.span().map_or(0, |(l, r)| r - l + 1)
    }

    pub fn is_continuous(&self) -> bool {
        is_continuous(&self.intervals)
    }

    pub fn is_strictly_ordered(&self) -> bool {
        self.intervals.windows(2).all(|w| w[0] < w[1])
    }

    /// Anchoring rule of the family's class.
    pub fn is_anchored(&self, n: BoardSize) -> bool {
        match (self.class, self.span()) {
            (FamilyClass::Edge, Some((l, _))) => l == 1,
            (FamilyClass::NonEdge, Some((l, r))) => l == 2 && r < n.get(),
            (_, None) => false,
        }
    }
}

impl fmt::Display for IntervalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, u) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{u}")?;
        }
        f.write_str("}")
    }
}

pub fn span(intervals: &[FileInterval]) -> Option<(usize, usize)> {
    let l = intervals.iter().map(|u| u.l()).min()?;
    let r = intervals.iter().map(|u| u.r()).max()?;
    Some((l, r))
}

/// Whether the union of files is one contiguous range.
pub fn is_continuous(intervals: &[FileInterval]) -> bool {
    let mut sorted: Vec<FileInterval> = intervals.to_vec();
    sorted.sort();
    let mut reach = match sorted.first() {
        Some(u) => u.r(),
        None => return true,
    };
    for u in &sorted[1..] {
        if u.l() > reach + 1 {
            return false;
        }
        reach = reach.max(u.r());
    }
    true
}

/// `u` can never hold more than `|u|` pawns, or would need more than `n`.
pub fn always_unsat(u: FileInterval, geom: &Geometry) -> bool {
    geom.interval_size(u) as usize <= u.width() || u.width() >= geom.board().get()
}

/// Next candidate interval after `u` (or the first one, for `None`) within
/// the class bounds, skipping always-unsatisfiable intervals.
///
/// With `lengthen`, `u` itself may grow to the right first; otherwise the
/// left end advances. Intervals ending before file `n` with width at least
/// `width_cap` are excluded.
pub fn lexicographically_next_u(
    u: Option<FileInterval>,
    lengthen: bool,
    width_cap: Option<usize>,
    class: FamilyClass,
    geom: &Geometry,
) -> Option<FileInterval> {
    let n = geom.board().get();
    let (lo, hi) = class.bounds(geom.board());
    let blocked = |l: usize, r: usize| r < n && width_cap.is_some_and(|cap| r - l + 1 >= cap);
    let scan = |l: usize, from: usize| {
        (from..=hi)
            .filter(|&r| !blocked(l, r))
            .map(|r| FileInterval::raw(l, r))
            .find(|&v| !always_unsat(v, geom))
    };
    let (mut l, first) = match u {
        None => (lo, Some(lo)),
        Some(u) if lengthen => (u.l(), Some(u.r() + 1)),
        Some(u) => (u.l(), None),
    };
    if let Some(from) = first {
        if let Some(v) = scan(l, from) {
            return Some(v);
        }
    }
    loop {
        l += 1;
        if l > hi {
            return None;
        }
        if let Some(v) = scan(l, l) {
            return Some(v);
        }
    }
}

/// Where a stored core may be matched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoreAnchor {
    /// Unsatisfiable with its leftmost interval clamped at file 1.
    Left,
    /// Unsatisfiable with its rightmost interval clamped at file `n`.
    Right,
    /// Unsatisfiable away from both edges.
    Interior,
}

impl CoreAnchor {
    fn tag(self) -> char {
        match self {
            CoreAnchor::Left => 'L',
            CoreAnchor::Right => 'R',
            CoreAnchor::Interior => 'I',
        }
    }
}

/// Unsatisfiable families keyed by shape (intervals displaced so the span
/// starts at file 1) and by the edge the shape was proven against.
///
/// An edge core proves every placement of its shape that does not touch the
/// opposite edge unsatisfiable, because moving away from an edge only shrinks
/// triangles. Reversals are stored alongside, as right-anchored shapes.
///
/// Dropping cores only costs pruning, so the set may be capped in size.
#[derive(Clone, Debug, Default)]
pub struct UnsatCoreSet {
    left: HashSet<Box<[u8]>>,
    right: HashSet<Box<[u8]>>,
    interior: HashSet<Box<[u8]>>,
    limit: Option<usize>,
}

impl PartialEq for UnsatCoreSet {
    fn eq(&self, other: &Self) -> bool {
        self.left == other.left && self.right == other.right && self.interior == other.interior
    }
}

impl Eq for UnsatCoreSet {}

impl UnsatCoreSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// A set that stops recording once it holds `limit` keys.
    pub fn with_limit(limit: usize) -> Self {
        UnsatCoreSet {
            limit: Some(limit),
            ..Self::default()
        }
    }

    pub fn set_limit(&mut self, limit: Option<usize>) {
        self.limit = limit;
    }

    pub fn is_full(&self) -> bool {
        self.limit.is_some_and(|l| self.len() >= l)
    }

    pub fn len(&self) -> usize {
        self.left.len() + self.right.len() + self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn set_mut(&mut self, anchor: CoreAnchor) -> &mut HashSet<Box<[u8]>> {
        match anchor {
            CoreAnchor::Left => &mut self.left,
            CoreAnchor::Right => &mut self.right,
            CoreAnchor::Interior => &mut self.interior,
        }
    }

    pub fn insert_key(&mut self, anchor: CoreAnchor, key: Vec<u8>) -> bool {
        self.set_mut(anchor).insert(key.into_boxed_slice())
    }

    pub fn contains_key(&self, anchor: CoreAnchor, key: &[u8]) -> bool {
        match anchor {
            CoreAnchor::Left => self.left.contains(key),
            CoreAnchor::Right => self.right.contains(key),
            CoreAnchor::Interior => self.interior.contains(key),
        }
    }

    /// Records an unsatisfiable continuous family together with its reversal.
    pub fn record(&mut self, intervals: &[FileInterval], n: BoardSize) {
        if self.is_full() {
            return;
        }
        let Some((l, r)) = span(intervals) else {
            return;
        };
        let mut mirrored: Vec<FileInterval> = intervals.iter().map(|u| u.mirrored(n)).collect();
        mirrored.sort();
        let touches_left = l == 1;
        let touches_right = r == n.get();
        if touches_left {
            self.insert_key(CoreAnchor::Left, shape_key(intervals));
            self.insert_key(CoreAnchor::Right, shape_key(&mirrored));
        }
        if touches_right {
            self.insert_key(CoreAnchor::Right, shape_key(intervals));
            self.insert_key(CoreAnchor::Left, shape_key(&mirrored));
        }
        if !touches_left && !touches_right {
            self.insert_key(CoreAnchor::Interior, shape_key(intervals));
            self.insert_key(CoreAnchor::Interior, shape_key(&mirrored));
        }
    }

    /// Whether a continuous family placed where it is contains a stored core
    /// shape that applies at that position.
    pub fn matches(&self, intervals: &[FileInterval], n: BoardSize, key: &mut Vec<u8>) -> bool {
        let Some((l, r)) = span(intervals) else {
            return false;
        };
        let candidates: &[CoreAnchor] = match (l == 1, r == n.get()) {
            (true, true) => &[CoreAnchor::Left, CoreAnchor::Right],
            (true, false) => &[CoreAnchor::Left],
            (false, true) => &[CoreAnchor::Right],
            (false, false) => &[CoreAnchor::Left, CoreAnchor::Right, CoreAnchor::Interior],
        };
        shape_key_into(intervals, key);
        candidates
            .iter()
            .any(|&anchor| self.contains_key(anchor, key))
    }

    pub fn extend(&mut self, other: UnsatCoreSet) {
        self.left.extend(other.left);
        self.right.extend(other.right);
        self.interior.extend(other.interior);
    }

    /// One key per line: anchor tag, then `l-r` offsets from file 1.
    pub fn save<W: Write>(&self, n: BoardSize, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::CoreCache(e.to_string());
        writeln!(out, "# unsat cores n={n}").map_err(io)?;
        for anchor in [CoreAnchor::Left, CoreAnchor::Right, CoreAnchor::Interior] {
            let set = match anchor {
                CoreAnchor::Left => &self.left,
                CoreAnchor::Right => &self.right,
                CoreAnchor::Interior => &self.interior,
            };
            let mut keys: Vec<&Box<[u8]>> = set.iter().collect();
            keys.sort();
            for key in keys {
                let body: Vec<String> = key
                    .chunks(2)
                    .map(|c| format!("{}-{}", c[0], c[1]))
                    .collect();
                writeln!(out, "{} {}", anchor.tag(), body.join(" ")).map_err(io)?;
            }
        }
        Ok(())
    }

    /// Reads a file written by [`UnsatCoreSet::save`] for the same board size.
    pub fn load<R: BufRead>(n: BoardSize, input: R) -> Result<Self> {
        let bad = |line: &str| Error::CoreCache(format!("malformed line {line:?}"));
        let mut set = UnsatCoreSet::new();
        let mut header_seen = false;
        for line in input.lines() {
            let line = line.map_err(|e| Error::CoreCache(e.to_string()))?;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(size) = rest.trim().strip_prefix("unsat cores n=") {
                    if size.trim() != n.to_string() {
                        return Err(Error::CoreCache(format!(
                            "cache is for n={}, not n={n}",
                            size.trim()
                        )));
                    }
                    header_seen = true;
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let anchor = match tokens.next() {
                Some("L") => CoreAnchor::Left,
                Some("R") => CoreAnchor::Right,
                Some("I") => CoreAnchor::Interior,
                _ => return Err(bad(line)),
            };
            let mut key = Vec::new();
            for t in tokens {
                let (a, b) = t.split_once('-').ok_or_else(|| bad(line))?;
                let a: u8 = a.parse().map_err(|_| bad(line))?;
                let b: u8 = b.parse().map_err(|_| bad(line))?;
                if a > b || b as usize >= n.get() {
                    return Err(bad(line));
                }
                key.extend([a, b]);
            }
            if key.is_empty() {
                return Err(bad(line));
            }
            set.insert_key(anchor, key);
        }
        if !header_seen {
            return Err(Error::CoreCache("missing header line".into()));
        }
        Ok(set)
    }
}

/// Displacement-invariant key: `(l - base, r - base)` per interval.
pub fn shape_key(intervals: &[FileInterval]) -> Vec<u8> {
    let mut key = Vec::with_capacity(intervals.len() * 2);
    shape_key_into(intervals, &mut key);
    key
}

fn shape_key_into(intervals: &[FileInterval], key: &mut Vec<u8>) {
    key.clear();
    let base = span(intervals).map_or(0, |(l, _)| l);
    for u in intervals {
        key.push((u.l() - base) as u8);
        key.push((u.r() - base) as u8);
    }
}

/// Whether any suffix of `intervals` (dropping leading members one at a
/// time) is a stored core at its position.
pub fn contains_unsat_core(intervals: &[FileInterval], cores: &UnsatCoreSet, n: BoardSize) -> bool {
    let mut key = Vec::new();
    contains_core_with(intervals, cores, n, &mut key)
}

fn contains_core_with(
    intervals: &[FileInterval],
    cores: &UnsatCoreSet,
    n: BoardSize,
    key: &mut Vec<u8>,
) -> bool {
    if cores.is_empty() {
        return false;
    }
    (0..intervals.len()).any(|start| {
        let suffix = &intervals[start..];
        is_continuous_sorted(suffix) && cores.matches(suffix, n, key)
    })
}

fn is_continuous_sorted(intervals: &[FileInterval]) -> bool {
    let mut reach = intervals[0].r();
    for u in &intervals[1..] {
        if u.l() > reach + 1 {
            return false;
        }
        reach = reach.max(u.r());
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationOptions {
    pub use_cores: bool,
    pub shift_rule: bool,
    pub ledger: LedgerMode,
    /// Track explicit square sets in every partition state.
    pub explicit_sets: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            use_cores: true,
            shift_rule: true,
            ledger: LedgerMode::Collapsed,
            explicit_sets: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnumerationStats {
    pub satisfiable: u64,
    pub unsat_counted: u64,
    pub unsat_by_core: u64,
    pub max_ledger: usize,
    pub max_depth: usize,
}

impl EnumerationStats {
    pub fn merge(&mut self, other: &EnumerationStats) {
        self.satisfiable += other.satisfiable;
        self.unsat_counted += other.unsat_counted;
        self.unsat_by_core += other.unsat_by_core;
        self.max_ledger = self.max_ledger.max(other.max_ledger);
        self.max_depth = self.max_depth.max(other.max_depth);
    }
}

pub enum FamilyEvent<'a> {
    Satisfiable {
        family: &'a IntervalFamily,
        counts: &'a FamilyCount,
        state: &'a PartitionState,
    },
    Unsatisfiable {
        family: &'a IntervalFamily,
        /// Pruned by a core match rather than by counting.
        by_core: bool,
    },
}

pub struct PassOutput {
    pub cores: UnsatCoreSet,
    pub stats: EnumerationStats,
}

/// Walks every satisfiable anchored family of `class`, reporting each one
/// (and each unsatisfiable family it tried) to `visit`.
pub fn enumerate_families<F>(
    class: FamilyClass,
    cores_in: UnsatCoreSet,
    geom: &Geometry,
    options: EnumerationOptions,
    visit: F,
) -> PassOutput
where
    F: FnMut(FamilyEvent<'_>),
{
    let root = Root::new(class, geom, options);
    let mut walker = Walker::new(&root, cores_in, visit);
    let state = root.empty_state();
    let ledger = SolutionLedger::new(options.ledger);
    walker.expand(&state, &ledger, root.lo - 1);
    PassOutput {
        cores: walker.cores,
        stats: walker.stats,
    }
}

/// Parallel variant: subtrees below each first interval run independently,
/// each with its own copy of `cores_in`; discovered cores are merged after.
/// Events from one subtree arrive in order; subtrees interleave.
pub fn enumerate_families_parallel<F>(
    class: FamilyClass,
    cores_in: UnsatCoreSet,
    geom: &Geometry,
    options: EnumerationOptions,
    visit: F,
) -> PassOutput
where
    F: Fn(FamilyEvent<'_>) + Sync,
{
    use rayon::prelude::*;
    let root = Root::new(class, geom, options);
    let firsts: Vec<FileInterval> = {
        let mut v = Vec::new();
        let mut cand = lexicographically_next_u(None, true, None, class, geom);
        while let Some(u) = cand.filter(|u| u.l() == root.lo) {
            v.push(u);
            cand = lexicographically_next_u(Some(u), true, None, class, geom);
        }
        v
    };
    let results: Vec<PassOutput> = firsts
        .par_iter()
        .map(|&first| {
            let mut walker = Walker::new(&root, cores_in.clone(), &visit);
            walker.expand_single(
                first,
                &root.empty_state(),
                &SolutionLedger::new(options.ledger),
            );
            PassOutput {
                cores: walker.cores,
                stats: walker.stats,
            }
        })
        .collect();
    let mut cores = cores_in;
    let mut stats = EnumerationStats::default();
    for r in results {
        cores.extend(r.cores);
        stats.merge(&r.stats);
    }
    PassOutput { cores, stats }
}

struct Root<'g> {
    class: FamilyClass,
    geom: &'g Geometry,
    binom: BinomialTable,
    options: EnumerationOptions,
    lo: usize,
}

impl<'g> Root<'g> {
    fn new(class: FamilyClass, geom: &'g Geometry, options: EnumerationOptions) -> Self {
        let (lo, _) = class.bounds(geom.board());
        Root {
            class,
            geom,
            binom: binomial_table(geom),
            options,
            lo,
        }
    }

    fn empty_state(&self) -> PartitionState {
        if self.options.explicit_sets {
            PartitionState::with_explicit_sets()
        } else {
            PartitionState::new()
        }
    }
}

struct Walker<'r, 'g, F> {
    root: &'r Root<'g>,
    cores: UnsatCoreSet,
    stats: EnumerationStats,
    family: IntervalFamily,
    key: Vec<u8>,
    visit: F,
}

impl<'r, 'g, F: FnMut(FamilyEvent<'_>)> Walker<'r, 'g, F> {
    fn new(root: &'r Root<'g>, cores: UnsatCoreSet, visit: F) -> Self {
        Walker {
            root,
            cores,
            stats: EnumerationStats::default(),
            family: IntervalFamily::new(root.class, Vec::new()),
            key: Vec::new(),
            visit,
        }
    }

    /// Tries `family + u`; returns whether it was satisfiable (and walked).
    fn attempt(
        &mut self,
        u: FileInterval,
        state: &PartitionState,
        ledger: &SolutionLedger,
        union_r: usize,
    ) -> bool {
        let n = self.root.geom.board();
        self.family.intervals.push(u);
        let sat = if self.root.options.use_cores
            && contains_core_with(&self.family.intervals, &self.cores, n, &mut self.key)
        {
            self.stats.unsat_by_core += 1;
            (self.visit)(FamilyEvent::Unsatisfiable {
                family: &self.family,
                by_core: true,
            });
            false
        } else {
            let (child, split) = state
                .refine(u, self.root.geom)
                .expect("candidates are ordered");
            let next = produce_solutions(ledger, &split, n.get(), &self.root.binom);
            if next.is_empty() {
                self.stats.unsat_counted += 1;
                self.cores.record(&self.family.intervals, n);
                (self.visit)(FamilyEvent::Unsatisfiable {
                    family: &self.family,
                    by_core: false,
                });
                false
            } else {
                self.stats.satisfiable += 1;
                self.stats.max_ledger = self.stats.max_ledger.max(next.len());
                self.stats.max_depth = self.stats.max_depth.max(self.family.intervals.len());
                let counts = FamilyCount::from_ledger(&next, &child, &self.root.binom, n.get());
                (self.visit)(FamilyEvent::Satisfiable {
                    family: &self.family,
                    counts: &counts,
                    state: &child,
                });
                self.expand(&child, &next, union_r.max(u.r()));
                true
            }
        };
        self.family.intervals.pop();
        sat
    }

    fn expand_single(&mut self, u: FileInterval, state: &PartitionState, ledger: &SolutionLedger) {
        self.attempt(u, state, ledger, self.root.lo - 1);
    }

    fn expand(&mut self, state: &PartitionState, ledger: &SolutionLedger, union_r: usize) {
        let geom = self.root.geom;
        let n = geom.board().get();
        let class = self.root.class;
        let mut cap: Option<usize> = None;
        let last = self.family.intervals.last().copied();
        let mut cand = lexicographically_next_u(last, true, cap, class, geom);
        while let Some(u) = cand {
            if u.l() > union_r + 1 {
                break;
            }
            let sat = self.attempt(u, state, ledger, union_r);
            if !sat && self.root.options.shift_rule && u.r() + 1 < n {
                cap = Some(cap.map_or(u.width(), |c| c.min(u.width())));
            }
            cand = lexicographically_next_u(Some(u), sat, cap, class, geom);
        }
    }
}
