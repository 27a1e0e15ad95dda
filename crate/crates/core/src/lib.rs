//! Counting unreachable pawn diagrams.
//!
//! A diagram places at most `n` pawns of one side on ranks `2..=n-1` of an
//! `n × n` board. Pawns step one rank forward at a time, straight or
//! diagonally, without limit, and a diagram is reachable when every pawn can
//! be traced back to a distinct starting file. This crate counts unreachable
//! diagrams exactly, both by brute force over all diagrams and by an
//! inclusion-exclusion sieve over satisfiable families of file intervals.

pub mod board;
pub mod census;
pub mod engine;
pub mod error;
pub mod family;
pub mod fen;
pub mod partition;
pub mod percent;
pub mod reach;
pub mod report;
pub mod sieve;
pub mod solution;
pub mod verify;

pub use board::{BigCount, BoardSize, Diagram, FileInterval, Geometry, Square, SquareSet, MAX_N};
pub use census::{brute_force_count, reflection_pruned_count, CensusResult};
pub use engine::{sieve_count, EngineOptions, SieveRun};
pub use error::{Error, Result};
pub use percent::Percent;
pub use reach::is_reachable;
