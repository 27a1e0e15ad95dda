use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pawn_census::board::file_char;
use pawn_census::census::brute_force_count;
use pawn_census::engine::{sieve_count, EngineOptions, SieveRun};
use pawn_census::family::UnsatCoreSet;
use pawn_census::fen::parse_fen;
use pawn_census::reach::{edf_assignment, BipartiteModel};
use pawn_census::report::{CountReport, Method, PawnStart, ReachReport, TableRow, CSV_HEADER};
use pawn_census::sieve::contribution_ledger;
use pawn_census::verify::{run_all, VerifyConfig, VerifyReport};
use pawn_census::{BoardSize, Error as CensusError};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "pawncount",
    version,
    about = "Count unreachable pawn diagrams on an n x n board"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
    /// Unsat-core cache: a file, or a directory holding one file per board size.
    #[arg(long, global = true, env = "CENSUS_CACHE_DIR")]
    cores: Option<PathBuf>,
    /// Print pass statistics and the signed contribution ledger.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count unreachable diagrams for one board size.
    Count {
        #[arg(long, value_parser = board_size)]
        n: BoardSize,
        #[arg(long, value_enum, default_value_t = MethodArg::Sieve)]
        method: MethodArg,
    },
    /// Results table for n = 3..=max-n, by the sieve.
    Table {
        #[arg(long, value_parser = board_size, default_value = "8")]
        max_n: BoardSize,
    },
    /// Check one diagram given as FEN rows (last row is rank 1).
    Reachable {
        #[arg(long, value_parser = board_size)]
        n: BoardSize,
        fen: String,
    },
    /// Run the property suites.
    Verify {
        #[arg(long, value_parser = board_size)]
        n: BoardSize,
        /// Random diagrams per sampled suite; 0 runs deterministic suites only.
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Sieve,
    Brute,
    Both,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Sieve => Method::Sieve,
            MethodArg::Brute => Method::Brute,
            MethodArg::Both => Method::Both,
        }
    }
}

fn board_size(s: &str) -> Result<BoardSize, String> {
    let n: usize = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    BoardSize::new(n).map_err(|e| e.to_string())
}

/// Failure with a chosen exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(Exit(code, _)) = err.downcast_ref::<Exit>() {
        return *code;
    }
    match err.downcast_ref::<CensusError>() {
        Some(CensusError::Ordering { .. }) => EXIT_INTERNAL,
        Some(_) => EXIT_USAGE,
        None => EXIT_INTERNAL,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t as usize)
            .build_global()
            .context("thread pool")?;
    }
    let out = io::stdout();
    let mut out = out.lock();
    match cli.command {
        Command::Count { n, method } => cmd_count(&cli.global, n, method.into(), &mut out),
        Command::Table { max_n } => cmd_table(&cli.global, max_n, &mut out),
        Command::Reachable { n, fen } => cmd_reachable(&cli.global, n, &fen, &mut out),
        Command::Verify { n, samples, seed } => cmd_verify(&cli.global, n, samples, seed, &mut out),
    }
}

fn cache_file(global: &Global, n: BoardSize) -> Option<PathBuf> {
    let path = global.cores.as_ref()?;
    if path.is_dir() || path.as_os_str().to_string_lossy().ends_with('/') {
        Some(path.join(format!("cores-n{n}.txt")))
    } else {
        Some(path.clone())
    }
}

fn load_cores(path: &Path, n: BoardSize) -> Option<UnsatCoreSet> {
    let file = fs::File::open(path).ok()?;
    match UnsatCoreSet::load(n, BufReader::new(file)) {
        Ok(cores) => Some(cores),
        Err(e) => {
            eprintln!("warning: ignoring {}: {e}", path.display());
            None
        }
    }
}

fn save_cores(path: &Path, n: BoardSize, cores: &UnsatCoreSet) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let tmp = path.with_extension("tmp");
    let file = fs::File::create(&tmp).with_context(|| format!("writing {}", tmp.display()))?;
    cores.save(n, io::BufWriter::new(file))?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn run_sieve(global: &Global, n: BoardSize) -> Result<SieveRun> {
    let cache = cache_file(global, n);
    let options = EngineOptions {
        parallel: rayon::current_num_threads() > 1,
        seed_cores: cache.as_deref().and_then(|p| load_cores(p, n)),
        ..Default::default()
    };
    let run = sieve_count(n, &options);
    if let Some(path) = &cache {
        save_cores(path, n, &run.cores)?;
    }
    Ok(run)
}

fn write_sieve_details(run: &SieveRun, out: &mut impl Write) -> Result<()> {
    for pass in &run.passes {
        let s = &pass.stats;
        writeln!(
            out,
            "{} pass: {} satisfiable families, {} unsatisfiable by counting, {} by core, widest ledger {}, {} ms",
            pass.class,
            pass.families,
            s.unsat_counted,
            s.unsat_by_core,
            s.max_ledger,
            pass.elapsed.as_millis()
        )?;
    }
    writeln!(out, "signatures: {}", run.table.len())?;
    let mut ledger = contribution_ledger(run.n, &run.table);
    ledger.sort_by_key(|c| c.members.len());
    let mut size = 0;
    for c in &ledger {
        if c.members.len() != size {
            size = c.members.len();
            writeln!(out, "combinations of {size}:")?;
        }
        writeln!(out, "  {c}")?;
    }
    Ok(())
}

fn emit_json(value: &impl Serialize, out: &mut impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn text_row(label: &str, row: &TableRow, out: &mut impl Write) -> Result<()> {
    writeln!(
        out,
        "{label}: n={} unreachable={} total={} percent={} elapsed_ms={}",
        row.n, row.unreachable, row.total, row.percent_unreachable, row.elapsed_ms
    )?;
    Ok(())
}

fn cmd_count(global: &Global, n: BoardSize, method: Method, out: &mut impl Write) -> Result<()> {
    let mut sieve = None;
    let mut sieve_run = None;
    if method != Method::Brute {
        let run = run_sieve(global, n)?;
        sieve = Some(TableRow::new(
            n,
            run.unreachable.clone(),
            run.total.clone(),
            run.elapsed,
        ));
        sieve_run = Some(run);
    }
    let brute = if method != Method::Sieve {
        let start = Instant::now();
        let census = brute_force_count(n)?;
        Some(TableRow::new(
            n,
            census.unreachable,
            census.total,
            start.elapsed(),
        ))
    } else {
        None
    };
    let agree = match (&sieve, &brute) {
        (Some(s), Some(b)) => Some(s.unreachable == b.unreachable),
        _ => None,
    };
    let report = CountReport {
        n,
        method,
        sieve,
        brute,
        agree,
    };
    match global.format {
        Format::Json => emit_json(&report, out)?,
        Format::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for row in report.rows() {
                writeln!(out, "{}", row.to_csv())?;
            }
        }
        Format::Text => {
            if let Some(row) = &report.sieve {
                text_row("sieve", row, out)?;
            }
            if let Some(row) = &report.brute {
                text_row("brute", row, out)?;
            }
            if let Some(agree) = report.agree {
                writeln!(out, "agree: {}", if agree { "yes" } else { "NO" })?;
            }
            if global.verbose {
                if let Some(run) = &sieve_run {
                    write_sieve_details(run, out)?;
                }
            }
        }
    }
    if report.agree == Some(false) {
        return Err(Exit(EXIT_VERIFY, "sieve and brute force disagree".into()).into());
    }
    Ok(())
}

fn cmd_table(global: &Global, max_n: BoardSize, out: &mut impl Write) -> Result<()> {
    let mut rows = Vec::new();
    if global.format == Format::Csv {
        writeln!(out, "{CSV_HEADER}")?;
    }
    if global.format == Format::Text {
        writeln!(
            out,
            "{:>3} {:>16} {:>12} {:>10}",
            "n", "unreachable", "%unreachable", "ms"
        )?;
    }
    for n in 3..=max_n.get() {
        let n = BoardSize::new(n)?;
        let run = run_sieve(global, n)?;
        let row = TableRow::new(n, run.unreachable.clone(), run.total.clone(), run.elapsed);
        // Rows stream out as they finish; large boards take a while.
        match global.format {
            Format::Csv => writeln!(out, "{}", row.to_csv())?,
            Format::Text => writeln!(
                out,
                "{:>3} {:>16} {:>12} {:>10}",
                row.n, row.unreachable, row.percent_unreachable, row.elapsed_ms
            )?,
            Format::Json => {}
        }
        out.flush()?;
        rows.push(row);
    }
    if global.format == Format::Json {
        emit_json(&rows, out)?;
    }
    Ok(())
}

fn cmd_reachable(global: &Global, n: BoardSize, fen: &str, out: &mut impl Write) -> Result<()> {
    let d = parse_fen(fen, n)?;
    let model = BipartiteModel::new(&d);
    let assignment = edf_assignment(&model);
    let report = ReachReport {
        n,
        fen: fen.trim().to_string(),
        pawns: d.pawn_count(),
        reachable: assignment.is_some(),
        assignment: assignment
            .map(|a| {
                model
                    .pawns
                    .iter()
                    .zip(&a.files)
                    .map(|((s, _), f)| PawnStart {
                        square: s.to_string(),
                        start_file: file_char(f.expect("perfect assignment")).to_string(),
                    })
                    .collect()
            })
            .unwrap_or_default(),
    };
    match global.format {
        Format::Json => emit_json(&report, out)?,
        Format::Csv => {
            writeln!(out, "square,start_file")?;
            for p in &report.assignment {
                writeln!(out, "{},{}", p.square, p.start_file)?;
            }
        }
        Format::Text => {
            writeln!(
                out,
                "{}",
                if report.reachable {
                    "reachable"
                } else {
                    "unreachable"
                }
            )?;
            for p in &report.assignment {
                writeln!(out, "  {} <- {}", p.square, p.start_file)?;
            }
        }
    }
    Ok(())
}

fn cmd_verify(
    global: &Global,
    n: BoardSize,
    samples: u64,
    seed: u64,
    out: &mut impl Write,
) -> Result<()> {
    let report: VerifyReport = run_all(VerifyConfig { n, samples, seed });
    match global.format {
        Format::Json => emit_json(&report, out)?,
        Format::Csv => {
            writeln!(out, "suite,passed,checked,detail")?;
            for s in &report.suites {
                let detail = s.detail.as_deref().unwrap_or("").replace('"', "\"\"");
                writeln!(out, "{},{},{},\"{}\"", s.name, s.passed, s.checked, detail)?;
            }
        }
        Format::Text => {
            writeln!(
                out,
                "verify n={} samples={} seed={}",
                report.n, report.samples, report.seed
            )?;
            for s in &report.suites {
                let status = if s.passed { "PASS" } else { "FAIL" };
                write!(out, "{status} {} ({} checked)", s.name, s.checked)?;
                if let Some(d) = &s.detail {
                    write!(out, ": {d}")?;
                }
                writeln!(out)?;
            }
        }
    }
    if !report.passed() {
        return Err(Exit(EXIT_VERIFY, "verification failed".into()).into());
    }
    Ok(())
}
