//! End-to-end sieve count: edge pass, non-edge pass, signature table, sum.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::board::{total_diagrams, BigCount, BoardSize, Geometry};
use crate::family::{
    enumerate_families, enumerate_families_parallel, EnumerationOptions, EnumerationStats,
    FamilyClass, FamilyEvent, UnsatCoreSet,
};
use crate::percent::Percent;
use crate::sieve::{sieve_total, SignatureTable};

#[derive(Clone, Debug, Default)]
pub struct EngineOptions {
    pub enumeration: EnumerationOptions,
    /// Split each pass by first interval across the rayon pool.
    pub parallel: bool,
    /// Cores from an earlier run of the same board size.
    pub seed_cores: Option<UnsatCoreSet>,
    /// Cap on stored cores; `None` uses [`default_core_limit`].
    pub core_limit: Option<usize>,
}

/// Roughly half a gigabyte of keys.
pub const DEFAULT_CORE_LIMIT: usize = 6_000_000;

/// From n = 10 on, suffix lookups cost more than the families they prune
/// (n = 10 takes about 4x longer with cores recorded), so none are recorded.
pub fn default_core_limit(n: BoardSize) -> usize {
    if n.get() >= 10 {
        0
    } else {
        DEFAULT_CORE_LIMIT
    }
}

#[derive(Clone, Debug)]
pub struct PassSummary {
    pub class: FamilyClass,
    pub families: u64,
    pub stats: EnumerationStats,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct SieveRun {
    pub n: BoardSize,
    pub unreachable: BigCount,
    pub total: BigCount,
    pub percent: Percent,
    pub table: SignatureTable,
    pub passes: [PassSummary; 2],
    /// Every core known at the end of the run, including seeded ones.
    pub cores: UnsatCoreSet,
    pub elapsed: Duration,
}

/// Builds the signature table for board `n` from both enumeration passes.
pub fn build_signature_table(
    n: BoardSize,
    options: &EngineOptions,
) -> (SignatureTable, [PassSummary; 2], UnsatCoreSet) {
    let geom = Geometry::new(n);
    let mut table = SignatureTable::new();
    let mut cores = options.seed_cores.clone().unwrap_or_default();
    cores.set_limit(Some(
        options.core_limit.unwrap_or_else(|| default_core_limit(n)),
    ));
    let mut passes = Vec::with_capacity(2);
    for class in [FamilyClass::Edge, FamilyClass::NonEdge] {
        let start = Instant::now();
        let (pass_table, families, out) = run_pass(class, cores, &geom, options);
        table.merge(&pass_table);
        cores = out.cores;
        passes.push(PassSummary {
            class,
            families,
            stats: out.stats,
            elapsed: start.elapsed(),
        });
    }
    let passes: [PassSummary; 2] = passes.try_into().expect("two passes");
    (table, passes, cores)
}

fn run_pass(
    class: FamilyClass,
    cores: UnsatCoreSet,
    geom: &Geometry,
    options: &EngineOptions,
) -> (SignatureTable, u64, crate::family::PassOutput) {
    if options.parallel {
        let shared = Mutex::new((SignatureTable::new(), 0u64));
        let out = enumerate_families_parallel(class, cores, geom, options.enumeration, |e| {
            if let FamilyEvent::Satisfiable { family, counts, .. } = e {
                let mut guard = shared.lock().expect("table lock");
                guard
                    .0
                    .add_family(class, family.width(), family.intervals.len(), counts);
                guard.1 += 1;
            }
        });
        let (table, families) = shared.into_inner().expect("table lock");
        (table, families, out)
    } else {
        let mut table = SignatureTable::new();
        let mut families = 0u64;
        let out = enumerate_families(class, cores, geom, options.enumeration, |e| {
            if let FamilyEvent::Satisfiable { family, counts, .. } = e {
                table.add_family(class, family.width(), family.intervals.len(), counts);
                families += 1;
            }
        });
        (table, families, out)
    }
}

/// Exact unreachable count for board `n` by the sieve.
pub fn sieve_count(n: BoardSize, options: &EngineOptions) -> SieveRun {
    let start = Instant::now();
    let (table, passes, cores) = build_signature_table(n, options);
    let unreachable = sieve_total(n, &table);
    let total = total_diagrams(n);
    SieveRun {
        n,
        percent: Percent::from_ratio(&unreachable, &total),
        unreachable,
        total,
        table,
        passes,
        cores,
        elapsed: start.elapsed(),
    }
}
