use itertools::Itertools;
use proptest::prelude::*;

use concgt::disjunct::{
    algorithm1_decode, build_disjunct, build_disjunct_with_cap, candidate_pairs, find_violation, is_disjunct,
    negative_count, t_star, DisjunctCertificate,
};
use concgt::{seed, BitMatrix, Error, Instance, ItemSet, Session};

/// Definition checked on explicit column lists.
fn naive(rows: &[Vec<bool>], n: usize, u: usize, v: usize) -> bool {
    (0..n).combinations(u + v).all(|cols| {
        cols.iter().copied().combinations(u).all(|designated| {
            rows.iter()
                .any(|row| cols.iter().all(|c| row[*c] == designated.contains(c)))
        })
    })
}

fn matrix_from(rows: &[Vec<bool>], n: usize) -> BitMatrix {
    let pools = rows.iter().map(|r| (1..=n).filter(|&j| r[j - 1]).collect()).collect();
    BitMatrix::new(n, pools).unwrap()
}

proptest! {
    #[test]
    fn checker_matches_definition(
        n in 3usize..=7,
        u in 1usize..=2,
        v in 0usize..=2,
        rows in prop::collection::vec(prop::collection::vec(any::<bool>(), 7), 1..25),
    ) {
        prop_assume!(u + v <= n);
        let rows: Vec<Vec<bool>> = rows.into_iter().map(|r| r[..n].to_vec()).collect();
        let matrix = matrix_from(&rows, n);
        let expected = naive(&rows, n, u, v);
        prop_assert_eq!(is_disjunct(&matrix, u, v), expected);
        prop_assert_eq!(find_violation(&matrix, u, v).is_none(), expected);
    }
}

#[test]
fn violation_witness_is_real() {
    let matrix = BitMatrix::from_supports(4, &[&[1, 2], &[3, 4], &[1, 3]]).unwrap();
    let w = find_violation(&matrix, 2, 1).expect("not disjunct");
    assert_eq!(w.designated.len(), 2);
    assert_eq!(w.others.len(), 1);
    for row in matrix.rows() {
        let separates = w.designated.iter().all(|&c| row.contains(c)) && w.others.iter().all(|&c| !row.contains(c));
        assert!(!separates);
    }
}

#[test]
fn t_star_values() {
    assert_eq!(t_star(100, 2), 289);
    assert_eq!(t_star(10, 2), 161);
    let ts: Vec<usize> = [10, 100, 1000].iter().map(|&n| t_star(n, 3)).collect();
    assert!(ts.windows(2).all(|w| w[0] <= w[1]));
    assert!(t_star(5, 5) > 0);
}

#[test]
fn zero_negatives_exactly_on_defective_pairs() {
    let cert = build_disjunct(9, 2, 2, 17, true).unwrap();
    let mut rng = seed::rng(5);
    for _ in 0..200 {
        let inst = Instance::sample_at_most(9, &[2, 2], &mut rng).unwrap();
        let outcomes: Vec<bool> = cert
            .matrix
            .rows()
            .iter()
            .map(|row| concgt::evaluate_test(&inst, row).unwrap())
            .collect();
        let pairs = candidate_pairs(&cert.matrix, &outcomes);
        assert!(pairs.len() <= inst.sizes().iter().product::<usize>());
        for x1 in 1..=9 {
            for x2 in x1 + 1..=9 {
                let (o1, o2) = (inst.owner(x1), inst.owner(x2));
                let defective = o1.is_some() && o2.is_some() && o1 != o2;
                assert_eq!(negative_count(&cert.matrix, &outcomes, x1, x2) == 0, defective);
                assert_eq!(pairs.contains(&(x1, x2)), defective);
            }
        }
    }
}

#[test]
fn decoder_on_every_small_instance() {
    // every labeling of 8 items into {none, S1, S2} with both sets of size <= 2
    let cert = build_disjunct(8, 2, 2, 3, true).unwrap();
    let mut count = 0;
    for code in 0..3usize.pow(8) {
        let mut sets = vec![ItemSet::new(), ItemSet::new()];
        let mut c = code;
        for item in 1..=8 {
            if c % 3 > 0 {
                sets[c % 3 - 1].insert(item);
            }
            c /= 3;
        }
        if sets.iter().any(|s| s.is_empty() || s.len() > 2) {
            continue;
        }
        let inst = Instance::new(8, sets).unwrap();
        let mut session = Session::new(&inst);
        let r = algorithm1_decode(&mut session, &cert).unwrap();
        assert!(r.succeeded);
        assert_eq!(r.stages_used, 1);
        count += 1;
    }
    assert!(count > 0);
}

#[test]
fn cap_and_file_round_trip() {
    assert!(matches!(
        build_disjunct_with_cap(30, 2, 3, 0, true, 1000),
        Err(Error::VerificationTooLarge { .. })
    ));
    let cert = build_disjunct(30, 2, 3, 0, false).unwrap();
    assert!(!cert.verified);
    assert_eq!(cert.matrix.t(), t_star(30, 3));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    let cert = build_disjunct(7, 2, 1, 9, true).unwrap();
    cert.matrix.write(&path).unwrap();
    let back = BitMatrix::read(&path).unwrap();
    assert_eq!(back, cert.matrix);
    assert!(DisjunctCertificate::check(back, 2, 1).unwrap().verified);
}
