//! Serializable run reports and their CSV form.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::board::{BigCount, BoardSize};
use crate::error::{Error, Result};
use crate::percent::Percent;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sieve,
    Brute,
    Both,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sieve => "sieve",
            Method::Brute => "brute",
            Method::Both => "both",
        })
    }
}

/// One results-table row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: BoardSize,
    #[serde(with = "crate::board::big_count_serde")]
    pub unreachable: BigCount,
    #[serde(with = "crate::board::big_count_serde")]
    pub total: BigCount,
    pub percent_unreachable: Percent,
    pub elapsed_ms: u64,
}

pub const CSV_HEADER: &str = "n,unreachable,total,percent_unreachable,elapsed_ms";

impl TableRow {
    pub fn new(n: BoardSize, unreachable: BigCount, total: BigCount, elapsed: Duration) -> Self {
        TableRow {
            n,
            percent_unreachable: Percent::from_ratio(&unreachable, &total),
            unreachable,
            total,
            elapsed_ms: elapsed.as_millis() as u64,
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n, self.unreachable, self.total, self.percent_unreachable, self.elapsed_ms
        )
    }
}

impl FromStr for TableRow {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad CSV row {line:?}"));
        let fields: Vec<&str> = line.trim().split(',').collect();
        let [n, unreachable, total, percent, elapsed] = fields[..] else {
            return Err(bad());
        };
        let n = BoardSize::new(n.parse().map_err(|_| bad())?)?;
        let (whole, frac) = percent.split_once('.').ok_or_else(bad)?;
        if frac.len() != 2 {
            return Err(bad());
        }
        let hundredths = whole.parse::<u64>().map_err(|_| bad())? * 100
            + frac.parse::<u64>().map_err(|_| bad())?;
        Ok(TableRow {
            n,
            unreachable: unreachable.parse().map_err(|_| bad())?,
            total: total.parse().map_err(|_| bad())?,
            percent_unreachable: Percent::from_hundredths(hundredths),
            elapsed_ms: elapsed.parse().map_err(|_| bad())?,
        })
    }
}

/// Result of `count`: one row per method run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    pub n: BoardSize,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sieve: Option<TableRow>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub brute: Option<TableRow>,
    /// Set when both methods ran.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub agree: Option<bool>,
}

impl CountReport {
    pub fn rows(&self) -> impl Iterator<Item = &TableRow> {
        self.sieve.iter().chain(self.brute.iter())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PawnStart {
    pub square: String,
    pub start_file: String,
}

/// Result of `reachable`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachReport {
    pub n: BoardSize,
    pub fen: String,
    pub pawns: usize,
    pub reachable: bool,
    /// A pawn-to-start-file assignment when reachable.
    #[serde(default)]
    pub assignment: Vec<PawnStart>,
}
