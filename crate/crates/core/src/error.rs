use thiserror::Error;

use crate::board::MAX_N;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("board size {0} is out of range (supported: 3..={MAX_N})")]
    BoardSize(usize),
    #[error("square (file {file}, rank {rank}) is outside the pawn grid of a {n}x{n} board")]
    SquareOutOfBounds { file: usize, rank: usize, n: usize },
    #[error("[{l}, {r}] is not a file interval on a {n}x{n} board")]
    IntervalOutOfBounds { l: usize, r: usize, n: usize },
    #[error("diagram has {pawns} pawns but a single side has at most {n}")]
    TooManyPawns { pawns: usize, n: usize },
    #[error("interval {next} does not follow {prev} in lexicographic order")]
    Ordering { prev: String, next: String },
    #[error("cannot parse diagram: {0}")]
    Parse(String),
    #[error("brute force census supports n <= {max}, got {n}")]
    CensusTooLarge { n: usize, max: usize },
    #[error("core cache: {0}")]
    CoreCache(String),
}
