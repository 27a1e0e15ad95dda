use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pawn_census::board::{origin_files, Geometry};
use pawn_census::engine::{sieve_count, EngineOptions};
use pawn_census::partition::{part_squares, PartitionState};
use pawn_census::reach::{edf_assignment, reference_is_reachable, BipartiteModel};
use pawn_census::solution::count_for_family;
use pawn_census::verify::{brute_family_count, random_diagram};
use pawn_census::{
    brute_force_count, is_reachable, reflection_pruned_count, BoardSize, Diagram, FileInterval,
    SquareSet,
};

fn board(n: usize) -> BoardSize {
    BoardSize::new(n).unwrap()
}

fn diagram() -> impl Strategy<Value = Diagram> {
    (3usize..=10, any::<u64>())
        .prop_map(|(n, seed)| random_diagram(board(n), &mut ChaCha8Rng::seed_from_u64(seed)))
}

/// A continuous, left-to-right family of up to three intervals on a board.
fn family() -> impl Strategy<Value = (BoardSize, Vec<FileInterval>)> {
    (
        3usize..=6,
        proptest::collection::vec((0usize..6, 0usize..6), 1..=3),
    )
        .prop_map(|(n, raw)| {
            let n_ = board(n);
            let mut out: Vec<FileInterval> = Vec::new();
            let mut reach = 0;
            for (step, width) in raw {
                let l = match out.last() {
                    None => 1 + step % n,
                    Some(u) => (u.l() + 1 + step % n).min(reach + 1).min(n),
                };
                let r = (l + width % n).min(n);
                if out.last().is_some_and(|u| u.l() >= l) {
                    break;
                }
                reach = reach.max(r);
                out.push(FileInterval::new(l, r, n_).unwrap());
            }
            (n_, out)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn greedy_matches_augmenting_paths(d in diagram()) {
        prop_assert_eq!(is_reachable(&d), reference_is_reachable(&d), "{:?}", d);
    }

    #[test]
    fn assignment_is_a_valid_matching(d in diagram()) {
        let model = BipartiteModel::new(&d);
        if let Some(a) = edf_assignment(&model) {
            prop_assert!(a.is_perfect());
            prop_assert!(a.is_valid_for(&model));
            for (s, start) in d.squares().zip(a.files.iter()) {
                let start = start.unwrap();
                prop_assert!(origin_files(s, d.board()).unwrap().contains_file(start));
            }
        } else {
            prop_assert!(!reference_is_reachable(&d));
        }
    }

    #[test]
    fn mirror_preserves_reachability(d in diagram()) {
        prop_assert_eq!(is_reachable(&d), is_reachable(&d.mirrored()));
        prop_assert_eq!(d.mirrored().mirrored(), d);
    }

    #[test]
    fn reachability_survives_moving_up_or_removing_pawns(d in diagram()) {
        if let Some(down) = d.shifted_down() {
            prop_assert!(!is_reachable(&down) || is_reachable(&d));
        }
        if is_reachable(&d) {
            for i in d.occupied().iter() {
                let mut fewer = *d.occupied();
                fewer.remove(i);
                prop_assert!(is_reachable(&Diagram::from_set(d.board(), fewer).unwrap()));
            }
        }
    }

    #[test]
    fn family_counts_match_direct_enumeration((n, family) in family()) {
        let geom = Geometry::new(n);
        let brute = brute_family_count(&family, &geom);
        match count_for_family(&family, &geom).unwrap() {
            Some(count) => {
                let mut got = count.by_pawns.clone();
                got.resize(brute.len().max(got.len()), 0);
                let mut want = brute.clone();
                want.resize(got.len(), 0);
                prop_assert_eq!(got, want);
            }
            None => prop_assert!(brute.iter().all(|&c| c == 0), "{:?} {:?}", family, brute),
        }
    }

    #[test]
    fn refinement_keeps_a_disjoint_cover((n, family) in family()) {
        let geom = Geometry::new(n);
        let mut state = PartitionState::with_explicit_sets();
        let mut union = SquareSet::EMPTY;
        for &u in &family {
            let (next, _) = state.refine(u, &geom).unwrap();
            state = next;
            union = union.union(&geom.set(u.l(), u.r()));
            let mut seen = SquareSet::EMPTY;
            for part in state.all_parts() {
                let squares = part_squares(part, &geom);
                prop_assert!(seen.is_disjoint(&squares));
                if let Some(explicit) = part.explicit_squares() {
                    prop_assert_eq!(explicit, &squares);
                }
                seen = seen.union(&squares);
            }
            prop_assert_eq!(&seen, &union);
            prop_assert_eq!(state.covered() as usize, union.len());
        }
    }
}

#[test]
fn sieve_matches_brute_force_through_n7() {
    for n in 3..=7 {
        let n = board(n);
        let sieve = sieve_count(n, &EngineOptions::default());
        assert_eq!(
            sieve.unreachable,
            brute_force_count(n).unwrap().unreachable,
            "n={n}"
        );
        assert_eq!(
            sieve.unreachable,
            reflection_pruned_count(n).unwrap().unreachable,
            "n={n}"
        );
    }
}

#[test]
fn every_n4_diagram_has_a_consistent_verdict() {
    let n = board(4);
    let mut unreachable = 0;
    for mask in 0u64..1 << n.cells() {
        if mask.count_ones() > 4 {
            continue;
        }
        let set: SquareSet = (0..n.cells()).filter(|&i| mask >> i & 1 == 1).collect();
        let d = Diagram::from_set(n, set).unwrap();
        assert_eq!(is_reachable(&d), reference_is_reachable(&d));
        unreachable += u32::from(!is_reachable(&d));
    }
    assert_eq!(unreachable, 18);
}
