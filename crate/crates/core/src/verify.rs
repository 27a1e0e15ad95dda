//! Property suites that cross-check every stage against a slower oracle.
//!
//! Each suite returns a [`SuiteOutcome`]; a failing suite carries a shrunk
//! counterexample. Random sampling is driven by a seeded ChaCha stream, so a
//! report can be replayed from its seed.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::board::{BoardSize, Diagram, FileInterval, Geometry, SquareSet};
use crate::census::{brute_force_count, PRACTICAL_BRUTE_N};
use crate::engine::{build_signature_table, EngineOptions};
use crate::family::{
    enumerate_families, EnumerationOptions, FamilyClass, FamilyEvent, UnsatCoreSet,
};
use crate::partition::{part_squares, PartitionState};
use crate::reach::{edf_assignment, reference_is_reachable, BipartiteModel};
use crate::sieve::{
    contribution_ledger, placement_count, remainder_count, sieve_total, sieve_total_by_placement,
    sieve_total_raw,
};
use crate::solution::{count_for_family_with, FamilyCount, LedgerMode};

/// Largest board for suites that enumerate inside `⋃V` exhaustively.
pub const MAX_FAMILY_ORACLE_N: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub checked: u64,
    pub passed: bool,
    /// Counterexample on failure, or a note for skipped and report-only suites.
    pub detail: Option<String>,
}

impl SuiteOutcome {
    fn pass(name: &str, checked: u64) -> Self {
        SuiteOutcome {
            name: name.into(),
            checked,
            passed: true,
            detail: None,
        }
    }

    fn fail(name: &str, checked: u64, detail: String) -> Self {
        SuiteOutcome {
            name: name.into(),
            checked,
            passed: false,
            detail: Some(detail),
        }
    }

    fn skipped(name: &str, why: &str) -> Self {
        SuiteOutcome {
            name: name.into(),
            checked: 0,
            passed: true,
            detail: Some(format!("skipped: {why}")),
        }
    }

    fn note(mut self, text: String) -> Self {
        self.detail = Some(text);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n: BoardSize,
    pub seed: u64,
    pub samples: u64,
    pub suites: Vec<SuiteOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub n: BoardSize,
    /// Random diagrams per sampled suite; zero keeps only deterministic suites.
    pub samples: u64,
    pub seed: u64,
}

pub fn run_all(config: VerifyConfig) -> VerifyReport {
    let VerifyConfig { n, samples, seed } = config;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suites = vec![
        matching_equivalence(n, samples, &mut rng),
        partition_invariants(n),
        family_counts(n),
        placement_counts(n),
        remainder_counts(n),
        bonferroni(n),
        sieve_routes(n),
        brute_agreement(n),
    ];
    if samples > 0 {
        suites.push(reflection_and_shift(n, samples, &mut rng));
        suites.push(displacement_observation(n, samples, &mut rng));
    }
    VerifyReport {
        n,
        seed,
        samples,
        suites,
    }
}

/// A uniformly random pawn count, then a uniform placement of that many pawns.
pub fn random_diagram(n: BoardSize, rng: &mut impl Rng) -> Diagram {
    let k = rng.random_range(0..=n.get());
    let set: SquareSet = sample(rng, n.cells(), k).into_iter().collect();
    Diagram::from_set(n, set).expect("at most n pawns")
}

/// Removes pawns one at a time while `bad` still holds.
pub fn shrink(d: &Diagram, bad: impl Fn(&Diagram) -> bool) -> Diagram {
    let mut current = *d;
    'outer: loop {
        for i in current.occupied().iter().collect::<Vec<_>>() {
            let mut set = *current.occupied();
            set.remove(i);
            let smaller = Diagram::from_set(current.board(), set).expect("fewer pawns");
            if bad(&smaller) {
                current = smaller;
                continue 'outer;
            }
        }
        return current;
    }
}

fn for_each_small_diagram(n: BoardSize, mut visit: impl FnMut(Diagram) -> bool) -> u64 {
    // Colex over all subsets of the grid with at most n pawns.
    let cells = n.cells();
    let mut checked = 0;
    for k in 0..=n.get() {
        if k == 0 {
            checked += 1;
            if !visit(Diagram::empty(n)) {
                return checked;
            }
            continue;
        }
        let mut x: u64 = (1 << k) - 1;
        while x < 1 << cells {
            let set: SquareSet = (0..cells).filter(|&i| x >> i & 1 == 1).collect();
            checked += 1;
            if !visit(Diagram::from_set(n, set).expect("k <= n")) {
                return checked;
            }
            let c = x & x.wrapping_neg();
            let r = x + c;
            x = (((r ^ x) >> 2) / c) | r;
        }
    }
    checked
}

fn edf_disagrees(d: &Diagram) -> bool {
    let model = BipartiteModel::new(d);
    match edf_assignment(&model) {
        Some(a) => !a.is_valid_for(&model) || !a.is_perfect() || !reference_is_reachable(d),
        None => reference_is_reachable(d),
    }
}

/// Greedy versus augmenting-path matching: exhaustive up to n = 6, sampled above.
pub fn matching_equivalence(n: BoardSize, samples: u64, rng: &mut impl Rng) -> SuiteOutcome {
    const NAME: &str = "matching_equivalence";
    let mut failure = None;
    let mut checked = 0;
    if n.get() <= MAX_FAMILY_ORACLE_N {
        checked += for_each_small_diagram(n, |d| {
            if edf_disagrees(&d) {
                failure = Some(d);
                return false;
            }
            true
        });
    }
    for _ in 0..samples {
        if failure.is_some() {
            break;
        }
        let d = random_diagram(n, rng);
        checked += 1;
        if edf_disagrees(&d) {
            failure = Some(d);
        }
    }
    match failure {
        Some(d) => SuiteOutcome::fail(NAME, checked, format!("{:?}", shrink(&d, edf_disagrees))),
        None => SuiteOutcome::pass(NAME, checked),
    }
}

fn check_partition(
    intervals: &[FileInterval],
    state: &PartitionState,
    geom: &Geometry,
) -> Result<(), String> {
    let mut union = SquareSet::EMPTY;
    for u in intervals {
        union = union.union(&geom.set(u.l(), u.r()));
    }
    let last = intervals.last().expect("nonempty family");
    let reachable_later = geom.set(last.l(), geom.board().get());
    let mut seen = SquareSet::EMPTY;
    for part in state.all_parts() {
        let closed = part_squares(part, geom);
        let explicit = part.explicit_squares().ok_or("explicit sets not tracked")?;
        if closed != *explicit || closed.len() as u32 != part.size {
            return Err(format!(
                "closed form disagrees with explicit set for {part:?}"
            ));
        }
        if !closed.is_disjoint(&seen) {
            return Err(format!("part overlaps an earlier part: {part:?}"));
        }
        seen = seen.union(&closed);
        if part.retired && !closed.is_disjoint(&reachable_later) {
            return Err(format!("retired part still reachable: {part:?}"));
        }
        for s in closed.iter() {
            let members = intervals
                .iter()
                .enumerate()
                .filter(|(_, u)| geom.set(u.l(), u.r()).contains(s))
                .fold(0u128, |m, (i, _)| m | 1 << i);
            if !part.retired && members != part.members {
                return Err(format!(
                    "square {s} has members {members:#b}, part says {:#b}",
                    part.members
                ));
            }
        }
    }
    if seen != union || state.covered() as usize != union.len() {
        return Err("parts do not cover the union of triangles".into());
    }
    Ok(())
}

/// Disjointness, coverage, membership and closed-form sizes of every
/// partition reached during enumeration.
pub fn partition_invariants(n: BoardSize) -> SuiteOutcome {
    const NAME: &str = "partition_invariants";
    if n.get() > 7 {
        return SuiteOutcome::skipped(NAME, "n > 7");
    }
    let geom = Geometry::new(n);
    let options = EnumerationOptions {
        explicit_sets: true,
        ..Default::default()
    };
    let mut checked = 0;
    let mut failure = None;
    for class in [FamilyClass::Edge, FamilyClass::NonEdge] {
        enumerate_families(class, UnsatCoreSet::new(), &geom, options, |e| {
            if let FamilyEvent::Satisfiable { family, state, .. } = e {
                checked += 1;
                if failure.is_none() {
                    if let Err(msg) = check_partition(&family.intervals, state, &geom) {
                        failure = Some(format!("{family}: {msg}"));
                    }
                }
            }
        });
    }
    match failure {
        Some(msg) => SuiteOutcome::fail(NAME, checked, msg),
        None => SuiteOutcome::pass(NAME, checked),
    }
}

/// Per-pawn-count diagrams inside `⋃V` meeting every constraint, by brute force.
pub fn brute_family_count(intervals: &[FileInterval], geom: &Geometry) -> Vec<u128> {
    let n = geom.board().get();
    let mut union = SquareSet::EMPTY;
    for u in intervals {
        union = union.union(&geom.set(u.l(), u.r()));
    }
    let cells: Vec<usize> = union.iter().collect();
    assert!(
        cells.len() < 64,
        "union too large for the brute-force oracle"
    );
    let local = |set: &SquareSet| {
        cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| set.contains(c))
            .fold(0u64, |m, (i, _)| m | 1 << i)
    };
    let constraints: Vec<(u64, u32)> = intervals
        .iter()
        .map(|u| (local(&geom.set(u.l(), u.r())), u.width() as u32))
        .collect();
    let mut by_pawns = vec![0u128; n + 1];
    let q = cells.len();
    for k in 1..=n.min(q) {
        let mut x: u64 = (1 << k) - 1;
        while x < 1 << q {
            if constraints.iter().all(|&(m, w)| (x & m).count_ones() > w) {
                by_pawns[k] += 1;
            }
            let c = x & x.wrapping_neg();
            let r = x + c;
            x = (((r ^ x) >> 2) / c) | r;
        }
    }
    by_pawns
}

/// Every family the enumerator visits, satisfiable or not, against the
/// brute-force in-`⋃V` count; also collapsed against uncollapsed ledgers.
pub fn family_counts(n: BoardSize) -> SuiteOutcome {
    const NAME: &str = "family_counts";
    if n.get() > MAX_FAMILY_ORACLE_N {
        return SuiteOutcome::skipped(NAME, "n > 6");
    }
    let geom = Geometry::new(n);
    let mut checked = 0;
    let mut failure: Option<String> = None;
    let mut cores = UnsatCoreSet::new();
    for class in [FamilyClass::Edge, FamilyClass::NonEdge] {
        let out = enumerate_families(class, cores, &geom, EnumerationOptions::default(), |e| {
            if failure.is_some() {
                return;
            }
            checked += 1;
            let (family, got) = match e {
                FamilyEvent::Satisfiable { family, counts, .. } => (family, Some(counts.clone())),
                FamilyEvent::Unsatisfiable { family, .. } => (family, None),
            };
            let brute = brute_family_count(&family.intervals, &geom);
            let got_by_pawns = got
                .as_ref()
                .map_or_else(|| vec![0; n.get() + 1], |c| c.by_pawns.clone());
            if got_by_pawns != brute {
                failure = Some(format!(
                    "{family}: counted {got_by_pawns:?}, brute force {brute:?}"
                ));
                return;
            }
            let uncollapsed =
                count_for_family_with(&family.intervals, &geom, LedgerMode::Uncollapsed)
                    .expect("ordered family");
            if uncollapsed.as_ref().map(|c: &FamilyCount| &c.by_pawns)
                != got.as_ref().map(|c| &c.by_pawns)
            {
                failure = Some(format!(
                    "{family}: collapsed and uncollapsed ledgers differ"
                ));
            }
        });
        cores = out.cores;
    }
    match failure {
        Some(msg) => SuiteOutcome::fail(NAME, checked, msg),
        None => SuiteOutcome::pass(NAME, checked),
    }
}

/// Member of a placement test: identity, edge flag, width.
type Member = (usize, bool, usize);

/// Placements by direct search over start files; identical members must
/// appear with increasing starts so each set of offsets counts once.
fn direct_placements(n: usize, members: &[Member]) -> u64 {
    fn go(n: usize, members: &[Member], i: usize, taken: &mut Vec<(usize, usize)>) -> u64 {
        let Some(&(id, edge, w)) = members.get(i) else {
            return 1;
        };
        let mut ways = 0;
        for start in 1..=(n + 1).saturating_sub(w) {
            let end = start + w - 1;
            let touches = start == 1 || end == n;
            if edge != touches || (edge && w == n && start != 1) {
                continue;
            }
            if i > 0 && members[i - 1] == (id, edge, w) && start <= taken[i - 1].0 {
                continue;
            }
            if taken.iter().all(|&(s, e)| end + 1 < s || e + 1 < start) {
                taken.push((start, end));
                ways += go(n, members, i + 1, taken);
                taken.pop();
            }
        }
        ways
    }
    go(n, members, 0, &mut Vec::new())
}

fn combinatorial_placements(n: usize, members: &[Member]) -> BigUint {
    let edges: Vec<&Member> = members.iter().filter(|m| m.1).collect();
    let widths: Vec<usize> = edges.iter().map(|m| m.2).collect();
    let identical = edges.len() == 2 && edges[0] == edges[1];
    let mut interior: Vec<(usize, usize)> = Vec::new();
    let mut last = None;
    for m in members.iter().filter(|m| !m.1) {
        if last == Some(m) {
            interior.last_mut().expect("run").1 += 1;
        } else {
            interior.push((m.2, 1));
            last = Some(m);
        }
    }
    placement_count(n, &widths, identical, &interior)
}

/// Closed-form placement counts against direct search, for every multiset of
/// up to three members drawn from two identities per (edge, width).
pub fn placement_counts(n: BoardSize) -> SuiteOutcome {
    const NAME: &str = "placement_counts";
    let size = n.get();
    let mut kinds: Vec<Member> = Vec::new();
    for id in 0..2 {
        kinds.extend((1..=size).map(|w| (id, true, w)));
        kinds.extend((1..=size.saturating_sub(2)).map(|w| (id, false, w)));
    }
    kinds.sort();
    let mut checked = 0;
    let k = kinds.len();
    for a in 0..k {
        for b in a..=k {
            for c in b..=k {
                // Index k means "no member" so smaller multisets are included.
                if (b == k && c != k) || (a == k) {
                    continue;
                }
                let members: Vec<Member> = [a, b, c]
                    .iter()
                    .filter(|&&i| i < k)
                    .map(|&i| kinds[i])
                    .collect();
                checked += 1;
                let direct = direct_placements(size, &members);
                let closed = combinatorial_placements(size, &members);
                if BigUint::from(direct) != closed {
                    return SuiteOutcome::fail(
                        NAME,
                        checked,
                        format!("members {members:?}: closed form {closed}, direct {direct}"),
                    );
                }
            }
        }
    }
    SuiteOutcome::pass(NAME, checked)
}

fn count_small_subsets(free_cells: usize, max: usize) -> u128 {
    let mut total = 1u128;
    for k in 1..=max.min(free_cells) {
        let mut x: u128 = (1 << k) - 1;
        while x < 1 << free_cells {
            total += 1;
            let c = x & x.wrapping_neg();
            let r = x + c;
            x = (((r ^ x) >> 2) / c) | r;
        }
    }
    total
}

/// Remainder counts for every `(Σp, Σq)` of the nonzero combinations, against
/// direct subset enumeration of the free cells.
pub fn remainder_counts(n: BoardSize) -> SuiteOutcome {
    const NAME: &str = "remainder_counts";
    if n.get() > MAX_FAMILY_ORACLE_N {
        return SuiteOutcome::skipped(NAME, "n > 6");
    }
    let (table, _, _) = build_signature_table(n, &EngineOptions::default());
    let mut pairs: Vec<(usize, usize)> = contribution_ledger(n, &table)
        .iter()
        .map(|c| {
            let p = c.members.iter().map(|s| s.pawns as usize).sum();
            let q = c.members.iter().map(|s| s.covered as usize).sum();
            (p, q)
        })
        .collect();
    pairs.sort();
    pairs.dedup();
    for (i, &(p, q)) in pairs.iter().enumerate() {
        let direct = count_small_subsets(n.cells() - q, n.get() - p);
        let closed = remainder_count(n, p, q);
        if BigUint::from(direct) != closed {
            return SuiteOutcome::fail(
                NAME,
                i as u64 + 1,
                format!("p={p} q={q}: closed {closed}, direct {direct}"),
            );
        }
    }
    SuiteOutcome::pass(NAME, pairs.len() as u64)
}

/// Partial sums grouped by `Σz` alternate around the true count.
pub fn bonferroni(n: BoardSize) -> SuiteOutcome {
    const NAME: &str = "bonferroni";
    if n.get() > MAX_FAMILY_ORACLE_N {
        return SuiteOutcome::skipped(NAME, "n > 6");
    }
    let (table, _, _) = build_signature_table(n, &EngineOptions::default());
    let ledger = contribution_ledger(n, &table);
    let mut by_z: BTreeMap<usize, BigInt> = BTreeMap::new();
    for c in &ledger {
        let z: usize = c.members.iter().map(|s| s.intervals as usize).sum();
        *by_z.entry(z).or_default() += &c.value;
    }
    let truth = BigInt::from(sieve_total(n, &table));
    let mut partial = BigInt::default();
    let max_z = by_z.keys().max().copied().unwrap_or(0);
    for z in 1..=max_z {
        partial += by_z.get(&z).cloned().unwrap_or_default();
        let ok = if z % 2 == 1 {
            partial >= truth
        } else {
            partial <= truth
        };
        if !ok {
            return SuiteOutcome::fail(
                NAME,
                z as u64,
                format!("partial sum through z={z} is {partial}, total {truth}"),
            );
        }
    }
    SuiteOutcome::pass(NAME, max_z as u64)
}

/// Merged classes, raw signatures and the placement DP give the same total.
pub fn sieve_routes(n: BoardSize) -> SuiteOutcome {
    const NAME: &str = "sieve_routes";
    let (table, _, _) = build_signature_table(n, &EngineOptions::default());
    let merged = sieve_total(n, &table);
    let raw = sieve_total_raw(n, &table);
    let dp = sieve_total_by_placement(n, &table);
    if merged == raw && raw == dp {
        SuiteOutcome::pass(NAME, 3).note(format!("sieve = {merged}"))
    } else {
        SuiteOutcome::fail(
            NAME,
            3,
            format!("merged {merged}, raw {raw}, placement dp {dp}"),
        )
    }
}

/// Brute-force census against the sieve.
pub fn brute_agreement(n: BoardSize) -> SuiteOutcome {
    const NAME: &str = "brute_agreement";
    if n.get() > PRACTICAL_BRUTE_N {
        return SuiteOutcome::skipped(NAME, "brute force beyond n = 8 takes hours");
    }
    let (table, _, _) = build_signature_table(
        n,
        &EngineOptions {
            parallel: true,
            ..Default::default()
        },
    );
    let sieve = sieve_total(n, &table);
    let brute = brute_force_count(n).expect("size checked").unreachable;
    if sieve == brute {
        SuiteOutcome::pass(NAME, 1).note(format!("brute = sieve = {sieve}"))
    } else {
        SuiteOutcome::fail(NAME, 1, format!("brute {brute}, sieve {sieve}"))
    }
}

/// Draws random diagrams until `wanted` unreachable ones are found.
fn sample_unreachable(n: BoardSize, wanted: u64, rng: &mut impl Rng) -> Vec<Diagram> {
    let mut out = Vec::new();
    let mut attempts = 0u64;
    while (out.len() as u64) < wanted && attempts < wanted.saturating_mul(1000) {
        attempts += 1;
        let d = random_diagram(n, rng);
        if !reference_is_reachable(&d) {
            out.push(d);
        }
    }
    out
}

/// Reflection preserves unreachability; moving every pawn one rank down
/// keeps an unreachable diagram unreachable.
pub fn reflection_and_shift(n: BoardSize, samples: u64, rng: &mut impl Rng) -> SuiteOutcome {
    const NAME: &str = "reflection_and_shift";
    let diagrams = sample_unreachable(n, samples, rng);
    let broken = |d: &Diagram| {
        !reference_is_reachable(d)
            && (reference_is_reachable(&d.mirrored())
                || d.shifted_down().is_some_and(|s| reference_is_reachable(&s)))
    };
    for (i, d) in diagrams.iter().enumerate() {
        if broken(d) {
            return SuiteOutcome::fail(NAME, i as u64 + 1, format!("{:?}", shrink(d, broken)));
        }
    }
    SuiteOutcome::pass(NAME, diagrams.len() as u64)
}

/// Report-only: how often a one-file sideways shift of an unreachable diagram
/// stays unreachable. This is a tendency, not an invariant.
pub fn displacement_observation(n: BoardSize, samples: u64, rng: &mut impl Rng) -> SuiteOutcome {
    const NAME: &str = "displacement_observation";
    let diagrams = sample_unreachable(n, samples, rng);
    let (mut shifted, mut kept) = (0u64, 0u64);
    for d in &diagrams {
        for delta in [-1, 1] {
            if let Some(s) = d.shifted_files(delta) {
                shifted += 1;
                kept += u64::from(!reference_is_reachable(&s));
            }
        }
    }
    let share = if shifted == 0 {
        0.0
    } else {
        100.0 * kept as f64 / shifted as f64
    };
    SuiteOutcome::pass(NAME, shifted).note(format!(
        "{kept} of {shifted} sideways shifts stay unreachable ({share:.2}%)"
    ))
}
