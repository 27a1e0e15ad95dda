//! Board model and pawn-square geometry.
//!
//! Pawns of a single side live on ranks `2..=n-1` of an `n x n` board, so the
//! pawn grid has `n * (n - 2)` cells. A pawn on file `f`, rank `k + 2` may have
//! started on any file in `[f - k, f + k]` clamped to the board; the set of
//! squares whose origin files all lie inside an interval `u` is the triangle
//! `v_u`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported board width. The pawn grid (`n * (n - 2)` cells) must fit
/// a [`SquareSet`] and family member sets must fit 128 bits.
pub const MAX_N: usize = 14;

/// Exact, arbitrary-precision count.
pub type BigCount = BigUint;

/// Serde adapter for [`BigCount`]: a JSON number when it fits in `u64`,
/// otherwise a decimal string. Both forms are accepted on input.
pub mod big_count_serde {
    use super::BigCount;
    use num_traits::ToPrimitive;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigCount, s: S) -> Result<S::Ok, S::Error> {
        match x.to_u64() {
            Some(v) => s.serialize_u64(v),
            None => s.serialize_str(&x.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Small(u64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigCount, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Small(v) => Ok(BigCount::from(v)),
            Repr::Text(t) => t.parse().map_err(de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct BoardSize(u8);

impl BoardSize {
    pub fn new(n: usize) -> Result<Self> {
        if (3..=MAX_N).contains(&n) {
            Ok(BoardSize(n as u8))
        } else {
            Err(Error::BoardSize(n))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Number of pawn ranks (`n - 2`).
    #[inline]
    pub fn pawn_ranks(self) -> usize {
        self.get() - 2
    }

    /// Number of cells in the pawn grid.
    #[inline]
    pub fn cells(self) -> usize {
        self.get() * self.pawn_ranks()
    }
}

impl TryFrom<usize> for BoardSize {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        BoardSize::new(n)
    }
}

impl From<BoardSize> for usize {
    fn from(n: BoardSize) -> usize {
        n.get()
    }
}

impl fmt::Display for BoardSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn file_char(file: usize) -> char {
    (b'a' + (file as u8 - 1)) as char
}

/// A pawn-grid cell. Files are `1..=n`, ranks `2..=n-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square {
    file: u8,
    rank: u8,
}

impl Square {
    pub fn new(file: usize, rank: usize, n: BoardSize) -> Result<Self> {
        if file < 1 || file > n.get() || rank < 2 || rank > n.get() - 1 {
            return Err(Error::SquareOutOfBounds {
                file,
                rank,
                n: n.get(),
            });
        }
        Ok(Square {
            file: file as u8,
            rank: rank as u8,
        })
    }

    #[inline]
    pub fn file(self) -> usize {
        self.file as usize
    }

    #[inline]
    pub fn rank(self) -> usize {
        self.rank as usize
    }

    /// Flat grid index `(rank - 2) * n + (file - 1)`.
    #[inline]
    pub fn index(self, n: BoardSize) -> usize {
        (self.rank() - 2) * n.get() + self.file() - 1
    }

    #[inline]
    pub fn from_index(index: usize, n: BoardSize) -> Self {
        debug_assert!(index < n.cells());
        Square {
            file: (index % n.get() + 1) as u8,
            rank: (index / n.get() + 2) as u8,
        }
    }

    /// Reflection across the vertical center axis.
    #[inline]
    pub fn mirrored(self, n: BoardSize) -> Self {
        Square {
            file: (n.get() + 1 - self.file()) as u8,
            rank: self.rank,
        }
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", file_char(self.file()), self.rank)
    }
}

const WORDS: usize = 4;

/// Fixed-width bitset over flat grid indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareSet([u64; WORDS]);

impl SquareSet {
    pub const EMPTY: SquareSet = SquareSet([0; WORDS]);

    #[inline]
    pub fn insert(&mut self, index: usize) {
        self.0[index / 64] |= 1 << (index % 64);
    }

    #[inline]
    pub fn remove(&mut self, index: usize) {
        self.0[index / 64] &= !(1 << (index % 64));
    }

    #[inline]
    pub fn contains(&self, index: usize) -> bool {
        self.0[index / 64] >> (index % 64) & 1 == 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn union(&self, other: &SquareSet) -> SquareSet {
        SquareSet(std::array::from_fn(|i| self.0[i] | other.0[i]))
    }

    #[inline]
    pub fn intersection(&self, other: &SquareSet) -> SquareSet {
        SquareSet(std::array::from_fn(|i| self.0[i] & other.0[i]))
    }

    #[inline]
    pub fn difference(&self, other: &SquareSet) -> SquareSet {
        SquareSet(std::array::from_fn(|i| self.0[i] & !other.0[i]))
    }

    #[inline]
    pub fn is_disjoint(&self, other: &SquareSet) -> bool {
        self.intersection(other).is_empty()
    }

    #[inline]
    pub fn is_subset(&self, other: &SquareSet) -> bool {
        self.difference(other).is_empty()
    }

    /// Set indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + tz)
            })
        })
    }
}

impl FromIterator<usize> for SquareSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = SquareSet::EMPTY;
        for i in iter {
            set.insert(i);
        }
        set
    }
}

impl fmt::Debug for SquareSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// The occupied squares of a single-side pawn diagram.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Diagram {
    n: BoardSize,
    occupied: SquareSet,
}

impl Diagram {
    pub fn empty(n: BoardSize) -> Self {
        Diagram {
            n,
            occupied: SquareSet::EMPTY,
        }
    }

    pub fn from_squares<I: IntoIterator<Item = Square>>(n: BoardSize, squares: I) -> Result<Self> {
        let mut occupied = SquareSet::EMPTY;
        for s in squares {
            // Re-validate: squares may have been built for another board size.
            let s = Square::new(s.file(), s.rank(), n)?;
            occupied.insert(s.index(n));
        }
        Diagram::from_set(n, occupied)
    }

    pub fn from_set(n: BoardSize, occupied: SquareSet) -> Result<Self> {
        if occupied.iter().any(|i| i >= n.cells()) {
            let i = occupied.iter().find(|&i| i >= n.cells()).unwrap();
            return Err(Error::SquareOutOfBounds {
                file: i % n.get() + 1,
                rank: i / n.get() + 2,
                n: n.get(),
            });
        }
        let pawns = occupied.len();
        if pawns > n.get() {
            return Err(Error::TooManyPawns { pawns, n: n.get() });
        }
        Ok(Diagram { n, occupied })
    }

    /// Parses squares written like `a2 b2 a3`.
    pub fn parse_squares(n: BoardSize, text: &str) -> Result<Self> {
        let squares = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| parse_square(t, n))
            .collect::<Result<Vec<_>>>()?;
        Diagram::from_squares(n, squares)
    }

    #[inline]
    pub fn board(&self) -> BoardSize {
        self.n
    }

    #[inline]
    pub fn occupied(&self) -> &SquareSet {
        &self.occupied
    }

    #[inline]
    pub fn pawn_count(&self) -> usize {
        self.occupied.len()
    }

    pub fn squares(&self) -> impl Iterator<Item = Square> + '_ {
        self.occupied.iter().map(|i| Square::from_index(i, self.n))
    }

    pub fn mirrored(&self) -> Diagram {
        let n = self.n;
        let occupied = self.squares().map(|s| s.mirrored(n).index(n)).collect();
        Diagram { n, occupied }
    }

    /// Every pawn one rank closer to the starting rank, or `None` if a pawn
    /// already stands on rank 2.
    pub fn shifted_down(&self) -> Option<Diagram> {
        let n = self.n;
        if self.squares().any(|s| s.rank() == 2) {
            return None;
        }
        let occupied = self.occupied.iter().map(|i| i - n.get()).collect();
        Some(Diagram { n, occupied })
    }

    /// Every pawn moved `delta` files sideways, or `None` if one would leave
    /// the board.
    pub fn shifted_files(&self, delta: isize) -> Option<Diagram> {
        let n = self.n;
        let mut occupied = SquareSet::EMPTY;
        for s in self.squares() {
            let f = s.file() as isize + delta;
            if f < 1 || f > n.get() as isize {
                return None;
            }
            occupied.insert(
                Square {
                    file: f as u8,
                    rank: s.rank,
                }
                .index(n),
            );
        }
        Some(Diagram { n, occupied })
    }
}

impl fmt::Debug for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let squares: Vec<String> = self.squares().map(|s| s.to_string()).collect();
        write!(f, "Diagram(n={}, {{{}}})", self.n, squares.join(", "))
    }
}

pub(crate) fn parse_square(token: &str, n: BoardSize) -> Result<Square> {
    let mut chars = token.chars();
    let file = chars
        .next()
        .filter(|c| c.is_ascii_lowercase())
        .ok_or_else(|| Error::Parse(format!("bad square {token:?}")))?;
    let rank: usize = chars
        .as_str()
        .parse()
        .map_err(|_| Error::Parse(format!("bad square {token:?}")))?;
    Square::new((file as u8 - b'a' + 1) as usize, rank, n)
}

/// A closed range of files `[l, r]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FileInterval {
    l: u8,
    r: u8,
}

impl FileInterval {
    pub fn new(l: usize, r: usize, n: BoardSize) -> Result<Self> {
        if l < 1 || l > r || r > n.get() {
            return Err(Error::IntervalOutOfBounds { l, r, n: n.get() });
        }
        Ok(FileInterval {
            l: l as u8,
            r: r as u8,
        })
    }

    /// Unchecked constructor for internal hot paths.
    #[inline]
    pub(crate) const fn raw(l: usize, r: usize) -> Self {
        FileInterval {
            l: l as u8,
            r: r as u8,
        }
    }

    #[inline]
    pub fn l(self) -> usize {
        self.l as usize
    }

    #[inline]
    pub fn r(self) -> usize {
        self.r as usize
    }

    #[inline]
    pub fn width(self) -> usize {
        self.r() - self.l() + 1
    }

    #[inline]
    pub fn contains_file(self, file: usize) -> bool {
        self.l() <= file && file <= self.r()
    }

    #[inline]
    pub fn is_subset(self, other: FileInterval) -> bool {
        other.l <= self.l && self.r <= other.r
    }

    #[inline]
    pub fn intersect(self, other: FileInterval) -> Option<FileInterval> {
        let l = self.l.max(other.l);
        let r = self.r.min(other.r);
        (l <= r).then_some(FileInterval { l, r })
    }

    #[inline]
    pub fn mirrored(self, n: BoardSize) -> FileInterval {
        let n = n.get();
        FileInterval::raw(n + 1 - self.r(), n + 1 - self.l())
    }

    #[inline]
    pub fn shifted(self, delta: isize) -> FileInterval {
        FileInterval::raw(
            (self.l() as isize + delta) as usize,
            (self.r() as isize + delta) as usize,
        )
    }
}

impl fmt::Display for FileInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", file_char(self.l()), file_char(self.r()))
    }
}

/// Files a pawn on `s` could have started from.
pub fn origin_files(s: Square, n: BoardSize) -> Result<FileInterval> {
    let s = Square::new(s.file(), s.rank(), n)?;
    Ok(origin_unchecked(s, n))
}

#[inline]
pub(crate) fn origin_unchecked(s: Square, n: BoardSize) -> FileInterval {
    let reach = s.rank() - 2;
    FileInterval::raw(
        s.file().saturating_sub(reach).max(1),
        (s.file() + reach).min(n.get()),
    )
}

/// The maximal set of pawn squares whose origin files lie in `interval`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PawnTriangle {
    pub interval: FileInterval,
    pub squares: SquareSet,
    pub size: usize,
}

/// Builds `v_u` by direct scan of the grid.
pub fn triangle(u: FileInterval, n: BoardSize) -> Result<PawnTriangle> {
    let u = FileInterval::new(u.l(), u.r(), n)?;
    let squares: SquareSet = (0..n.cells())
        .filter(|&i| origin_unchecked(Square::from_index(i, n), n).is_subset(u))
        .collect();
    Ok(PawnTriangle {
        interval: u,
        size: squares.len(),
        squares,
    })
}

/// Closed-form `|v_[l, r]|`: per rank offset `k`, the admissible files run
/// from `l + k` (or 1 when clamped at the left edge) to `r - k` (or `n`).
pub fn triangle_size(l: usize, r: usize, n: BoardSize) -> usize {
    if l > r {
        return 0;
    }
    let n = n.get();
    (0..=n - 3)
        .map(|k| {
            let lo = if l == 1 { 1 } else { l + k };
            let hi = if r == n {
                n as isize
            } else {
                r as isize - k as isize
            };
            (hi - lo as isize + 1).max(0) as usize
        })
        .sum()
}

/// Per-board cache of triangle sizes and square sets.
#[derive(Clone, Debug)]
pub struct Geometry {
    n: BoardSize,
    sizes: Vec<u32>,
    sets: Vec<SquareSet>,
}

impl Geometry {
    pub fn new(n: BoardSize) -> Self {
        let w = n.get() + 1;
        let mut sizes = vec![0; w * w];
        let mut sets = vec![SquareSet::EMPTY; w * w];
        for l in 1..=n.get() {
            for r in l..=n.get() {
                let t = triangle(FileInterval::raw(l, r), n).expect("in bounds");
                debug_assert_eq!(t.size, triangle_size(l, r, n));
                sizes[l * w + r] = t.size as u32;
                sets[l * w + r] = t.squares;
            }
        }
        Geometry { n, sizes, sets }
    }

    #[inline]
    pub fn board(&self) -> BoardSize {
        self.n
    }

    /// `|v_[l, r]|`, zero for an empty range.
    #[inline]
    pub fn size(&self, l: usize, r: usize) -> u32 {
        if l > r {
            0
        } else {
            self.sizes[l * (self.n.get() + 1) + r]
        }
    }

    #[inline]
    pub fn set(&self, l: usize, r: usize) -> SquareSet {
        if l > r {
            SquareSet::EMPTY
        } else {
            self.sets[l * (self.n.get() + 1) + r]
        }
    }

    #[inline]
    pub fn interval_size(&self, u: FileInterval) -> u32 {
        self.size(u.l(), u.r())
    }

    pub fn triangle(&self, u: FileInterval) -> PawnTriangle {
        PawnTriangle {
            interval: u,
            squares: self.set(u.l(), u.r()),
            size: self.interval_size(u) as usize,
        }
    }
}

/// Exact `C(a, b)`; zero when `b < 0` or `b > a`.
pub fn binomial(a: u64, b: i64) -> BigCount {
    if b < 0 || b as u64 > a {
        return BigCount::zero();
    }
    let b = (b as u64).min(a - b as u64);
    let mut acc = BigCount::one();
    for i in 0..b {
        // acc * (a - i) is divisible by (i + 1): acc is C(a, i) at this point.
        acc *= a - i;
        acc /= i + 1;
    }
    acc
}

/// `C(a, b)` for the small arguments of the counting hot paths.
#[inline]
pub fn binomial_u128(a: u32, b: u32) -> u128 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b) as u128;
    let a = a as u128;
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc.checked_mul(a - i).expect("binomial overflow") / (i + 1);
    }
    acc
}

/// Pascal table of `C(a, b)` for `a <= max_a`, `b <= max_b`, in `u128`.
#[derive(Clone, Debug)]
pub struct BinomialTable {
    max_b: usize,
    rows: Vec<u128>,
}

impl BinomialTable {
    pub fn new(max_a: usize, max_b: usize) -> Self {
        let stride = max_b + 1;
        let mut rows = vec![0u128; (max_a + 1) * stride];
        for a in 0..=max_a {
            rows[a * stride] = 1;
            for b in 1..=max_b.min(a) {
                let above = rows[(a - 1) * stride + b - 1];
                let left = if b < a { rows[(a - 1) * stride + b] } else { 0 };
                rows[a * stride + b] = above.checked_add(left).expect("binomial overflow");
            }
        }
        BinomialTable { max_b, rows }
    }

    #[inline]
    pub fn get(&self, a: u32, b: u32) -> u128 {
        debug_assert!(b as usize <= self.max_b);
        self.rows[a as usize * (self.max_b + 1) + b as usize]
    }
}

/// Number of diagrams with at most `n` pawns on the pawn grid.
pub fn total_diagrams(n: BoardSize) -> BigCount {
    (0..=n.get() as i64)
        .map(|i| binomial(n.cells() as u64, i))
        .sum()
}
