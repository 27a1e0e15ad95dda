//! Incremental partition of the union of a family's triangles into parts whose
//! squares all lie in the same subset of triangles.
//!
//! Triangles are added in lexicographic interval order. Every part is kept in
//! the closed form
//!
//! ```text
//! squares(ρ) = v_[a, b] \ v_[a, c] \ v_[s, b]
//! ```
//!
//! with an optional prefix cut `c < b` and an optional suffix cut `s > a`.
//! Live parts never carry a suffix cut. A part is retired once no later
//! triangle can reach it; retired parts still count towards coverage and pawn
//! totals but are skipped by later refinements.

use crate::board::{FileInterval, Geometry, SquareSet};
use crate::error::{Error, Result};

/// Bit `i` set when the part lies inside the triangle of the `i`-th interval.
pub type MemberSet = u128;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Part {
    pub base: FileInterval,
    /// Right file of the excluded prefix triangle `v_[base.l, cut]`.
    pub prefix_cut: Option<u8>,
    /// Left file of the excluded suffix triangle `v_[cut, base.r]`.
    pub suffix_cut: Option<u8>,
    pub members: MemberSet,
    pub size: u32,
    pub retired: bool,
    squares: Option<SquareSet>,
}

impl Part {
    fn new(
        base: FileInterval,
        prefix_cut: Option<usize>,
        suffix_cut: Option<usize>,
        members: MemberSet,
        geom: &Geometry,
    ) -> Part {
        let prefix_cut = prefix_cut.filter(|&c| c >= base.l()).map(|c| c as u8);
        let suffix_cut = suffix_cut.filter(|&s| s <= base.r()).map(|s| s as u8);
        let mut part = Part {
            base,
            prefix_cut,
            suffix_cut,
            members,
            size: 0,
            retired: false,
            squares: None,
        };
        part.size = part_size(&part, geom);
        part
    }

    /// Square set tracked independently of the closed form (explicit mode only).
    pub fn explicit_squares(&self) -> Option<&SquareSet> {
        self.squares.as_ref()
    }
}

/// `|ρ|` from triangle sizes by inclusion-exclusion over the two cuts.
pub fn part_size(part: &Part, geom: &Geometry) -> u32 {
    let (a, b) = (part.base.l(), part.base.r());
    let c = part.prefix_cut.map_or(a - 1, |c| c as usize);
    let s = part.suffix_cut.map_or(b + 1, |s| s as usize);
    geom.size(a, b) + geom.size(s, c) - geom.size(a, c) - geom.size(s, b)
}

/// Squares of a part derived from its closed form.
pub fn part_squares(part: &Part, geom: &Geometry) -> SquareSet {
    let (a, b) = (part.base.l(), part.base.r());
    let c = part.prefix_cut.map_or(a - 1, |c| c as usize);
    let s = part.suffix_cut.map_or(b + 1, |s| s as usize);
    geom.set(a, b)
        .difference(&geom.set(a, c))
        .difference(&geom.set(s, b))
}

/// What became of one live part when a triangle was added. Indices refer to
/// the refined state's live parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartFate {
    /// Entirely out of reach of this and every later triangle.
    Retired { size: u32 },
    Split {
        /// `ρ ∩ v`.
        inside: Option<(usize, u32)>,
        /// The piece of `ρ \ v` later triangles can still reach.
        outside: Option<(usize, u32)>,
        /// The rest of `ρ \ v`, retired.
        remainder: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMap {
    pub interval: FileInterval,
    /// One entry per live part of the state before refinement.
    pub fates: Vec<PartFate>,
    /// `v` minus every earlier triangle.
    pub orphan: Option<(usize, u32)>,
    pub live_count: usize,
}

impl SplitMap {
    /// Pawns the new triangle must hold for the family to stay unreachable.
    pub fn demand(&self) -> u32 {
        self.interval.width() as u32 + 1
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartitionState {
    live: Vec<Part>,
    retired: Vec<Part>,
    covered: u32,
    max_r: u8,
    last: Option<FileInterval>,
    depth: usize,
    explicit: bool,
}

impl PartitionState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Also tracks every part's squares by direct set arithmetic.
    pub fn with_explicit_sets() -> Self {
        PartitionState {
            explicit: true,
            ..Self::default()
        }
    }

    pub fn live_parts(&self) -> &[Part] {
        &self.live
    }

    pub fn retired_parts(&self) -> &[Part] {
        &self.retired
    }

    pub fn all_parts(&self) -> impl Iterator<Item = &Part> {
        self.live.iter().chain(&self.retired)
    }

    /// `|⋃V|` over the triangles added so far.
    pub fn covered(&self) -> u32 {
        self.covered
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn last_interval(&self) -> Option<FileInterval> {
        self.last
    }

    /// Adds `v_u`; `u` must follow every earlier interval lexicographically.
    pub fn refine(&self, u: FileInterval, geom: &Geometry) -> Result<(PartitionState, SplitMap)> {
        if let Some(prev) = self.last {
            if u <= prev {
                return Err(Error::Ordering {
                    prev: prev.to_string(),
                    next: u.to_string(),
                });
            }
        }
        if self.depth >= MemberSet::BITS as usize {
            return Err(Error::Ordering {
                prev: format!("{} intervals", self.depth),
                next: u.to_string(),
            });
        }
        let (l, r) = (u.l(), u.r());
        let bit: MemberSet = 1 << self.depth;
        let tri = geom.set(l, r);
        // Squares whose origin starts at file l or later: the only ones any
        // later triangle can reach.
        let reachable_later = geom.set(l, geom.board().get());

        let mut live = Vec::with_capacity(self.live.len() + 2);
        let mut retired = self.retired.clone();
        let mut fates = Vec::with_capacity(self.live.len());

        for part in &self.live {
            let (a, b) = (part.base.l(), part.base.r());
            if b < l {
                let mut gone = part.clone();
                gone.retired = true;
                fates.push(PartFate::Retired { size: gone.size });
                retired.push(gone);
                continue;
            }
            let c = part.prefix_cut.map_or(a - 1, |c| c as usize);
            let m = b.min(r);
            let members = part.members;

            let inside = (c < m)
                .then(|| Part::new(FileInterval::raw(l, m), Some(c), None, members | bit, geom));
            let outside = (m < b)
                .then(|| Part::new(FileInterval::raw(l, b), Some(c.max(m)), None, members, geom));
            let mut remainder =
                (a < l).then(|| Part::new(part.base, Some(c), Some(l), members, geom));
            if let Some(rem) = remainder.as_mut() {
                rem.retired = true;
            }

            let sizes = [&inside, &outside, &remainder].map(|p| p.as_ref().map_or(0, |p| p.size));
            assert_eq!(
                sizes.iter().sum::<u32>(),
                part.size,
                "split of {part:?} by {u}"
            );

            let mut place = |p: Option<Part>, explicit: Option<SquareSet>| {
                p.filter(|p| p.size > 0).map(|mut p| {
                    p.squares = explicit;
                    live.push(p);
                    (live.len() - 1, live[live.len() - 1].size)
                })
            };
            let (ex_in, ex_out, ex_rem) = match part.squares {
                Some(s) if self.explicit => {
                    let out = s.difference(&tri);
                    (
                        Some(s.intersection(&tri)),
                        Some(out.intersection(&reachable_later)),
                        Some(out.difference(&reachable_later)),
                    )
                }
                _ => (None, None, None),
            };
            let inside = place(inside, ex_in);
            let outside = place(outside, ex_out);
            let remainder = match remainder.filter(|p| p.size > 0) {
                Some(mut p) => {
                    p.squares = ex_rem;
                    let size = p.size;
                    retired.push(p);
                    size
                }
                None => 0,
            };
            fates.push(PartFate::Split {
                inside,
                outside,
                remainder,
            });
        }

        let prev_cut = if self.max_r as usize >= l {
            r.min(self.max_r as usize)
        } else {
            l - 1
        };
        let orphan = (prev_cut < r).then(|| {
            let mut p = Part::new(u, Some(prev_cut), None, bit, geom);
            if self.explicit {
                let earlier = self.all_parts().fold(SquareSet::EMPTY, |acc, q| {
                    acc.union(q.squares.as_ref().expect("explicit state"))
                });
                p.squares = Some(tri.difference(&earlier));
            }
            live.push(p);
            (live.len() - 1, live[live.len() - 1].size)
        });

        let live_count = live.len();
        let next = PartitionState {
            live,
            retired,
            covered: self.covered + orphan.map_or(0, |(_, s)| s),
            max_r: self.max_r.max(r as u8),
            last: Some(u),
            depth: self.depth + 1,
            explicit: self.explicit,
        };
        Ok((
            next,
            SplitMap {
                interval: u,
                fates,
                orphan,
                live_count,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::{BoardSize, Square};

    fn geom(n: usize) -> Geometry {
        Geometry::new(BoardSize::new(n).unwrap())
    }

    fn names(set: &SquareSet, n: usize) -> Vec<String> {
        let b = BoardSize::new(n).unwrap();
        let mut v: Vec<String> = set
            .iter()
            .map(|i| Square::from_index(i, b).to_string())
            .collect();
        v.sort();
        v
    }

    fn build(n: usize, intervals: &[(usize, usize)]) -> (Geometry, PartitionState, SplitMap) {
        let g = geom(n);
        let mut state = PartitionState::with_explicit_sets();
        let mut last = None;
        for &(l, r) in intervals {
            let (s, m) = state.refine(FileInterval::raw(l, r), &g).unwrap();
            state = s;
            last = Some(m);
        }
        (g, state, last.unwrap())
    }

    #[test]
    fn first_triangle_is_one_orphan() {
        let (g, state, split) = build(7, &[(2, 6)]);
        assert!(split.fates.is_empty());
        assert_eq!(split.orphan, Some((0, 9)));
        assert_eq!(state.live_parts().len(), 1);
        assert_eq!(part_squares(&state.live_parts()[0], &g), g.set(2, 6));
    }

    #[test]
    fn nested_edge_triangles_on_n4() {
        let (g, state, split) = build(4, &[(1, 2), (1, 3)]);
        assert_eq!(
            split.fates,
            vec![PartFate::Split {
                inside: Some((0, 3)),
                outside: None,
                remainder: 0
            }]
        );
        assert_eq!(split.orphan, Some((1, 2)));
        let orphan = &state.live_parts()[1];
        assert_eq!(names(&part_squares(orphan, &g), 4), ["b3", "c2"]);
        assert_eq!(state.covered(), 5);
    }

    #[test]
    fn covered_by_later_right_end_is_retired() {
        // v_[a,e] then v_[b,e]: the squares outside v_[b,e] cannot be reached later.
        let (g, state, split) = build(7, &[(1, 5), (2, 5)]);
        let PartFate::Split {
            inside,
            outside,
            remainder,
        } = split.fates[0]
        else {
            panic!("expected a split");
        };
        assert_eq!(outside, None);
        let inside = &state.live_parts()[inside.unwrap().0];
        assert_eq!(
            names(&part_squares(inside, &g), 7),
            ["b2", "c2", "c3", "d2", "d3", "e2"]
        );
        assert_eq!(remainder, 15 - 6);
        assert_eq!(split.orphan, None);
        let retired = &state.retired_parts()[0];
        assert_eq!(
            part_squares(retired, &g),
            g.set(1, 5).difference(&g.set(2, 5))
        );
    }

    #[test]
    fn part_size_examples() {
        let g = geom(7);
        let p = Part::new(FileInterval::raw(2, 6), None, None, 1, &g);
        assert_eq!(part_size(&p, &g), 9);
        let p = Part::new(FileInterval::raw(1, 4), None, None, 1, &g);
        assert_eq!(part_size(&p, &g), 10);
        let g = geom(4);
        let p = Part::new(FileInterval::raw(1, 3), Some(2), None, 1, &g);
        assert_eq!(part_size(&p, &g), 2);
    }

    #[test]
    fn out_of_order_is_rejected() {
        let g = geom(6);
        let (s, _) = PartitionState::new()
            .refine(FileInterval::raw(1, 3), &g)
            .unwrap();
        assert!(s.refine(FileInterval::raw(1, 2), &g).is_err());
        assert!(s.refine(FileInterval::raw(1, 3), &g).is_err());
        assert!(s.refine(FileInterval::raw(1, 4), &g).is_ok());
    }

    #[test]
    fn closed_forms_match_explicit_sets() {
        // Every ordered family of up to three intervals on n=7.
        let n = 7;
        let g = geom(n);
        let all: Vec<FileInterval> = (1..=n)
            .flat_map(|l| (l..=n).map(move |r| FileInterval::raw(l, r)))
            .collect();
        for (i, &u1) in all.iter().enumerate() {
            for (j, &u2) in all.iter().enumerate().skip(i + 1) {
                for &u3 in &all[j + 1..] {
                    let mut state = PartitionState::with_explicit_sets();
                    let mut union = SquareSet::EMPTY;
                    for u in [u1, u2, u3] {
                        for p in state.retired_parts() {
                            assert!(p
                                .explicit_squares()
                                .unwrap()
                                .is_disjoint(&g.set(u.l(), u.r())));
                        }
                        state = state.refine(u, &g).unwrap().0;
                        union = union.union(&g.set(u.l(), u.r()));
                        let mut seen = SquareSet::EMPTY;
                        for p in state.all_parts() {
                            let ex = *p.explicit_squares().unwrap();
                            assert_eq!(part_squares(p, &g), ex, "{u1} {u2} {u3}: {p:?}");
                            assert_eq!(ex.len() as u32, p.size);
                            assert!(ex.is_disjoint(&seen));
                            seen = seen.union(&ex);
                        }
                        assert_eq!(seen, union);
                        assert_eq!(state.covered() as usize, union.len());
                    }
                }
            }
        }
    }
}
