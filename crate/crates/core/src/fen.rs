//! The piece-placement part of FEN, restricted to white pawns.
//!
//! Rows run from the top of the board down and are separated by `/`; `P` is a
//! pawn and a digit run counts empty files. The last row is always rank 1,
//! so a short string such as `8/P7/PP6/8` describes the bottom four ranks and
//! leaves the ranks above empty. Rows may be wider than the board as long as
//! the extra files are empty, which lets the usual 8-wide figures be read on
//! smaller boards.

use crate::board::{BoardSize, Diagram, Square};
use crate::error::{Error, Result};

pub fn parse_fen(text: &str, n: BoardSize) -> Result<Diagram> {
    let text = text.trim();
    let placement = text.split_whitespace().next().unwrap_or("");
    if placement.is_empty() {
        return Err(Error::Parse("empty placement".into()));
    }
    let rows: Vec<&str> = placement.split('/').collect();
    if rows.len() > n.get() {
        return Err(Error::Parse(format!(
            "{} rows on a board with {} ranks",
            rows.len(),
            n
        )));
    }
    let mut squares = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let rank = rows.len() - i;
        let mut file = 1usize;
        let mut chars = row.chars().peekable();
        if row.is_empty() {
            return Err(Error::Parse(format!("empty row for rank {rank}")));
        }
        while let Some(c) = chars.next() {
            match c {
                'P' => {
                    if rank == 1 || rank == n.get() {
                        return Err(Error::Parse(format!("pawn on rank {rank}")));
                    }
                    if file > n.get() {
                        return Err(Error::SquareOutOfBounds {
                            file,
                            rank,
                            n: n.get(),
                        });
                    }
                    squares.push(Square::new(file, rank, n)?);
                    file += 1;
                }
                '0'..='9' => {
                    let mut run = c.to_digit(10).expect("digit") as usize;
                    while let Some(d) = chars.peek().and_then(|d| d.to_digit(10)) {
                        run = run * 10 + d as usize;
                        chars.next();
                    }
                    if run == 0 {
                        return Err(Error::Parse(format!("zero-length gap in row {row:?}")));
                    }
                    file += run;
                }
                other => return Err(Error::Parse(format!("unexpected {other:?} in row {row:?}"))),
            }
        }
    }
    Diagram::from_squares(n, squares)
}

/// All `n` ranks, top first.
pub fn to_fen(d: &Diagram) -> String {
    let n = d.board().get();
    let mut rows = Vec::with_capacity(n);
    for rank in (1..=n).rev() {
        let mut row = String::new();
        let mut gap = 0;
        for file in 1..=n {
            let occupied = (2..n).contains(&rank)
                && d.occupied().contains(
                    Square::new(file, rank, d.board())
                        .expect("on grid")
                        .index(d.board()),
                );
            if occupied {
                if gap > 0 {
                    row.push_str(&gap.to_string());
                    gap = 0;
                }
                row.push('P');
            } else {
                gap += 1;
            }
        }
        if gap > 0 {
            row.push_str(&gap.to_string());
        }
        rows.push(row);
    }
    rows.join("/")
}
