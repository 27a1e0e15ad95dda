//! Reachability of a diagram: every pawn must be matched to a distinct
//! starting file inside its origin interval.

use crate::board::{origin_unchecked, BoardSize, Diagram, FileInterval, Square};

/// Pawns of a diagram paired with their origin intervals, ordered by
/// `(rank, file)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteModel {
    pub n: BoardSize,
    pub pawns: Vec<(Square, FileInterval)>,
}

impl BipartiteModel {
    pub fn new(d: &Diagram) -> Self {
        let n = d.board();
        let mut pawns: Vec<_> = d.squares().map(|s| (s, origin_unchecked(s, n))).collect();
        pawns.sort_by_key(|(s, _)| (s.rank(), s.file()));
        BipartiteModel { n, pawns }
    }
}

/// Pawn index (into [`BipartiteModel::pawns`]) to starting file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub files: Vec<Option<usize>>,
}

impl Assignment {
    pub fn is_perfect(&self) -> bool {
        self.files.iter().all(Option::is_some)
    }

    /// Checks that assigned files are distinct and inside each pawn's interval.
    pub fn is_valid_for(&self, model: &BipartiteModel) -> bool {
        let mut used = 0u32;
        self.files.len() == model.pawns.len()
            && self
                .files
                .iter()
                .zip(&model.pawns)
                .all(|(f, (_, u))| match *f {
                    None => true,
                    Some(f) => {
                        let fresh = used & (1 << f) == 0;
                        used |= 1 << f;
                        fresh && u.contains_file(f)
                    }
                })
    }
}

/// Earliest-deadline-first assignment: pawns by (right end, left end), each
/// takes the lowest free file at or after its left end.
pub fn edf_assignment(model: &BipartiteModel) -> Option<Assignment> {
    let mut order: Vec<usize> = (0..model.pawns.len()).collect();
    order.sort_by_key(|&i| {
        let u = model.pawns[i].1;
        (u.r(), u.l())
    });
    let mut free: u32 = (1u32 << model.n.get()) - 1;
    let mut files = vec![None; model.pawns.len()];
    for i in order {
        let u = model.pawns[i].1;
        let f = next_free(free, u.l())?;
        if f > u.r() {
            return None;
        }
        free &= !(1 << (f - 1));
        files[i] = Some(f);
    }
    Some(Assignment { files })
}

/// Smallest free file `>= from` in a free-file mask (bit `f - 1` is file `f`).
#[inline]
fn next_free(free: u32, from: usize) -> Option<usize> {
    let candidates = free & (u32::MAX << (from - 1));
    (candidates != 0).then(|| candidates.trailing_zeros() as usize + 1)
}

pub fn is_reachable(d: &Diagram) -> bool {
    edf_assignment(&BipartiteModel::new(d)).is_some()
}

/// Maximum matching by augmenting paths.
pub fn maximum_matching(model: &BipartiteModel) -> Assignment {
    let n = model.n.get();
    let mut owner: Vec<Option<usize>> = vec![None; n + 1];
    for pawn in 0..model.pawns.len() {
        let mut seen = vec![false; n + 1];
        augment(model, pawn, &mut seen, &mut owner);
    }
    let mut files = vec![None; model.pawns.len()];
    for (f, p) in owner.iter().enumerate() {
        if let Some(p) = *p {
            files[p] = Some(f);
        }
    }
    Assignment { files }
}

fn augment(
    model: &BipartiteModel,
    pawn: usize,
    seen: &mut [bool],
    owner: &mut [Option<usize>],
) -> bool {
    let u = model.pawns[pawn].1;
    for f in u.l()..=u.r() {
        if seen[f] {
            continue;
        }
        seen[f] = true;
        if owner[f].is_none() || augment(model, owner[f].unwrap(), seen, owner) {
            owner[f] = Some(pawn);
            return true;
        }
    }
    false
}

/// Reachability via [`maximum_matching`]; independent of the greedy path.
pub fn reference_is_reachable(d: &Diagram) -> bool {
    maximum_matching(&BipartiteModel::new(d)).is_perfect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::SquareSet;
    use proptest::prelude::*;

    fn d(n: usize, text: &str) -> Diagram {
        Diagram::parse_squares(BoardSize::new(n).unwrap(), text).unwrap()
    }

    #[test]
    fn examples() {
        assert!(!is_reachable(&d(8, "a2 b2 a3")));
        assert!(is_reachable(&d(8, "a2 b2 c2")));
        assert!(!is_reachable(&d(8, "a2 a3 b2 b3")));
        assert!(is_reachable(&Diagram::empty(BoardSize::new(8).unwrap())));
        assert!(!reference_is_reachable(&d(8, "a2 b2 a3")));
        assert!(!reference_is_reachable(&d(8, "a2 a3 b2 b3")));
    }

    #[test]
    fn single_pawn_always_reachable() {
        for n in 3..=10 {
            let b = BoardSize::new(n).unwrap();
            for i in 0..b.cells() {
                let one = Diagram::from_squares(b, [Square::from_index(i, b)]).unwrap();
                assert!(is_reachable(&one));
                assert!(reference_is_reachable(&one));
            }
        }
    }

    #[test]
    fn greedy_assignment_is_valid() {
        let m = BipartiteModel::new(&d(8, "a2 b3 c4 h7 g2"));
        let a = edf_assignment(&m).unwrap();
        assert!(a.is_perfect() && a.is_valid_for(&m));
        let r = maximum_matching(&m);
        assert!(r.is_perfect() && r.is_valid_for(&m));
    }

    #[test]
    fn edge_clamped_pawns() {
        // a3 may come from a or b; b3 from a, b or c.
        assert!(is_reachable(&d(8, "b2 a3")));
        assert!(is_reachable(&d(8, "a3 b3")));
        assert!(!is_reachable(&d(8, "a3 b3 b2 c2")));
        assert!(!reference_is_reachable(&d(8, "a3 b3 b2 c2")));
    }

    fn diagram_strategy(n: usize) -> impl Strategy<Value = Diagram> {
        let b = BoardSize::new(n).unwrap();
        proptest::collection::btree_set(0..b.cells(), 0..=n).prop_map(move |idx| {
            Diagram::from_set(b, idx.into_iter().collect::<SquareSet>()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn greedy_matches_reference(dia in (3usize..=9).prop_flat_map(diagram_strategy)) {
            prop_assert_eq!(is_reachable(&dia), reference_is_reachable(&dia));
        }

        #[test]
        fn removing_a_pawn_keeps_reachable(dia in diagram_strategy(8)) {
            if is_reachable(&dia) {
                for i in dia.occupied().iter() {
                    let mut s = *dia.occupied();
                    s.remove(i);
                    prop_assert!(is_reachable(&Diagram::from_set(dia.board(), s).unwrap()));
                }
            }
        }

        #[test]
        fn mirror_preserves_reachability(dia in diagram_strategy(8)) {
            prop_assert_eq!(is_reachable(&dia), is_reachable(&dia.mirrored()));
        }

        #[test]
        fn shifting_down_keeps_unreachable(dia in diagram_strategy(7)) {
            if !is_reachable(&dia) {
                if let Some(down) = dia.shifted_down() {
                    prop_assert!(!is_reachable(&down));
                }
            }
        }
    }
}
