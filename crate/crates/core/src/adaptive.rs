//! Deterministic adaptive designs.
//!
//! Both designs first locate one item of every hidden set by repeatedly
//! shrinking a positive pool, then recover each set with a two-stage
//! standard group testing run whose background is the located items of the
//! other sets. The per-set runs share their two stages.

use crate::error::{Error, Result};
use crate::instance::ItemSet;
use crate::pool::Pool;
use crate::seed;
use crate::session::{RecoveryResult, Session};
use crate::standard_gt::{finish_batch, run_batched, run_two_stage_batch, TwoStageConfig, TwoStageDecoder};

/// Output of the halving search for two hidden sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSearch {
    /// A positive pool with 2 to 4 items. With exactly 2 it is the defective
    /// pair.
    pub candidates: Vec<usize>,
    /// Positive pool chosen after each stage.
    pub history: Vec<Vec<usize>>,
}

/// Splits `items` into a first part of `ceil(len/2)` items and the rest.
fn halves(items: &[usize]) -> (&[usize], &[usize]) {
    items.split_at(items.len().div_ceil(2))
}

/// The six pools of one halving stage: both halves of `A`, then the four
/// unions of one quarter from each half.
fn halving_pools(active: &[usize]) -> Vec<Vec<usize>> {
    let (first, second) = halves(active);
    let (q11, q12) = halves(first);
    let (q21, q22) = halves(second);
    let union = |a: &[usize], b: &[usize]| [a, b].concat();
    vec![
        first.to_vec(),
        second.to_vec(),
        union(q11, q21),
        union(q11, q22),
        union(q12, q21),
        union(q12, q22),
    ]
}

fn to_pools(groups: &[Vec<usize>], n: usize) -> Vec<Pool> {
    groups
        .iter()
        .map(|g| {
            let mut pool = Pool::with_universe(n);
            pool.extend(g.iter().copied());
            pool
        })
        .collect()
}

fn first_positive(outcomes: &[bool]) -> Result<usize> {
    outcomes
        .iter()
        .position(|&o| o)
        .ok_or_else(|| Error::Invariant("no positive pool in a splitting stage".into()))
}

/// Halving stages until the chosen positive pool has at most 4 items (or is
/// a pair). Uses at most `ceil(log2 n) - 2` stages for `n >= 4`.
pub fn narrow_pair(session: &mut Session<'_>) -> Result<PairSearch> {
    let n = session.n();
    if n < 2 {
        return Err(Error::Invariant(format!("two hidden sets need n >= 2, got {n}")));
    }
    let mut active: Vec<usize> = (1..=n).collect();
    let mut history = Vec::new();
    while active.len() > 4 {
        let groups = halving_pools(&active);
        let outcomes = session.run_stage(to_pools(&groups, n))?;
        active = groups[first_positive(&outcomes)?].clone();
        history.push(active.clone());
        if active.len() == 2 {
            break;
        }
    }
    Ok(PairSearch {
        candidates: active,
        history,
    })
}

/// Algorithm for two hidden sets, step 1: returns `(a1, a2)` with `a1` and
/// `a2` in different hidden sets.
pub fn find_defective_pair(session: &mut Session<'_>) -> Result<(usize, usize)> {
    let search = narrow_pair(session)?;
    resolve_pair(session, &search.candidates)
}

fn resolve_pair(session: &mut Session<'_>, candidates: &[usize]) -> Result<(usize, usize)> {
    if let [a, b] = candidates {
        return Ok((*a, *b));
    }
    let groups = halving_pools(candidates);
    let outcomes = session.run_stage(to_pools(&groups, session.n()))?;
    pair_from(&groups[first_positive(&outcomes)?])
}

fn pair_from(group: &[usize]) -> Result<(usize, usize)> {
    match group {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::Invariant(format!("expected a pair, got {} items", group.len()))),
    }
}

/// Recovers two hidden sets with `|S_i| <= s_i` exactly, in at most
/// `ceil(log2 n)` stages.
///
/// When the halving search ends on 3 or 4 candidates, the stage that picks
/// the pair among them also carries the first recovery stage for every
/// candidate as background (over the items outside the candidates); the
/// leftover candidates are confirmed individually in the last stage.
pub fn adaptive_m2(session: &mut Session<'_>, s1: usize, s2: usize, seed: u64) -> Result<RecoveryResult> {
    adaptive_m2_with(session, s1, s2, &TwoStageConfig::default(), seed)
}

pub fn adaptive_m2_with(
    session: &mut Session<'_>,
    s1: usize,
    s2: usize,
    config: &TwoStageConfig,
    seed: u64,
) -> Result<RecoveryResult> {
    let n = session.n();
    // The set holding a1 is unknown, so both runs get the larger bound.
    let bound = s1.max(s2).saturating_sub(1);
    let search = narrow_pair(session)?;
    let candidates = search.candidates;

    let ((a1, a2), outcomes) = if let [a1, a2] = candidates[..] {
        let domain: ItemSet = (1..=n).filter(|&j| j != a1 && j != a2).collect();
        let decoders = [
            TwoStageDecoder::new(n, &domain, bound, &Pool::from_items([a2]), config, seed::split(seed, 0))?,
            TwoStageDecoder::new(n, &domain, bound, &Pool::from_items([a1]), config, seed::split(seed, 1))?,
        ];
        ((a1, a2), run_two_stage_batch(session, &decoders)?)
    } else {
        let domain: ItemSet = (1..=n).filter(|j| !candidates.contains(j)).collect();
        let decoders = candidates
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                TwoStageDecoder::new(
                    n,
                    &domain,
                    bound,
                    &Pool::from_items([x]),
                    config,
                    seed::split(seed, k as u64),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let groups = halving_pools(&candidates);
        let mut stage: Vec<Vec<Pool>> = vec![to_pools(&groups, n)];
        stage.extend(decoders.iter().map(TwoStageDecoder::stage_one_pools));
        let outcomes = run_batched(session, stage)?;
        let (a1, a2) = pair_from(&groups[first_positive(&outcomes[0])?])?;

        let index = |x: usize| candidates.iter().position(|&c| c == x).expect("candidate");
        let leftovers: Vec<usize> = candidates.iter().copied().filter(|&c| c != a1 && c != a2).collect();
        // background {a2} reveals the set holding a1, and vice versa
        let chosen = [decoders[index(a2)].clone(), decoders[index(a1)].clone()];
        let mut lists = Vec::with_capacity(2);
        for decoder_at in [index(a2), index(a1)] {
            let mut list = decoders[decoder_at].survivors(&outcomes[decoder_at + 1])?;
            list.extend(&leftovers);
            lists.push(list);
        }
        ((a1, a2), finish_batch(session, &chosen, &lists)?)
    };

    let over_budget = outcomes.iter().any(|o| o.over_budget);
    let mut first = outcomes[0].items.clone();
    first.insert(a1);
    let mut second = outcomes[1].items.clone();
    second.insert(a2);
    let mut result = session.finish(vec![first, second]);
    result.over_budget = over_budget;
    Ok(result)
}

/// Output of the leave-one-out search for `m` hidden sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSearch {
    /// One item of every hidden set.
    pub tuple: Vec<usize>,
    pub history: Vec<Vec<usize>>,
}

/// Contiguous parts with sizes differing by at most one, larger parts first.
fn partition(items: &[usize], parts: usize) -> Vec<&[usize]> {
    let base = items.len() / parts;
    let extra = items.len() % parts;
    let mut out = Vec::with_capacity(parts);
    let mut rest = items;
    for k in 0..parts {
        let (head, tail) = rest.split_at(base + usize::from(k < extra));
        out.push(head);
        rest = tail;
    }
    out
}

/// Splits the positive pool into `m + 1` parts and tests the `m + 1` unions
/// that leave one part out, until the positive pool has exactly `m` items.
pub fn find_defective_tuple(session: &mut Session<'_>, m: usize) -> Result<TupleSearch> {
    let n = session.n();
    if m < 2 || m > n {
        return Err(Error::Domain(format!("need 2 <= m <= n, got m={m}, n={n}")));
    }
    let mut active: Vec<usize> = (1..=n).collect();
    let mut history = Vec::new();
    while active.len() > m {
        let parts = partition(&active, m + 1);
        let groups: Vec<Vec<usize>> = (0..=m)
            .map(|skip| {
                parts
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .flat_map(|(_, p)| p.iter().copied())
                    .collect()
            })
            .collect();
        let outcomes = session.run_stage(to_pools(&groups, n))?;
        active = groups[first_positive(&outcomes)?].clone();
        history.push(active.clone());
    }
    Ok(TupleSearch { tuple: active, history })
}

/// Recovers `m = bounds.len()` hidden sets exactly.
pub fn adaptive_general(session: &mut Session<'_>, bounds: &[usize], seed: u64) -> Result<RecoveryResult> {
    adaptive_general_with(session, bounds, &TwoStageConfig::default(), seed)
}

pub fn adaptive_general_with(
    session: &mut Session<'_>,
    bounds: &[usize],
    config: &TwoStageConfig,
    seed: u64,
) -> Result<RecoveryResult> {
    let n = session.n();
    let m = bounds.len();
    let bound = bounds.iter().copied().max().unwrap_or(1).saturating_sub(1);
    let tuple = find_defective_tuple(session, m)?.tuple;
    let domain: ItemSet = (1..=n).filter(|j| !tuple.contains(j)).collect();
    let decoders = tuple
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let background: Pool = tuple.iter().copied().filter(|&x| x != d).collect();
            TwoStageDecoder::new(n, &domain, bound, &background, config, seed::split(seed, i as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let outcomes = run_two_stage_batch(session, &decoders)?;
    let over_budget = outcomes.iter().any(|o| o.over_budget);
    let recovered = tuple
        .iter()
        .zip(outcomes)
        .map(|(&d, o)| {
            let mut set = o.items;
            set.insert(d);
            set
        })
        .collect();
    let mut result = session.finish(recovered);
    result.over_budget = over_budget;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{evaluate_test, Instance};

    fn set(items: &[usize]) -> ItemSet {
        items.iter().copied().collect()
    }

    /// Worst-case number of halving stages before the pool has at most 4
    /// items, when every stage picks the largest pool.
    fn worst_narrowing(n: usize) -> usize {
        let mut size = n;
        let mut stages = 0;
        while size > 4 {
            let items: Vec<usize> = (1..=size).collect();
            size = halving_pools(&items).iter().map(Vec::len).max().unwrap();
            stages += 1;
        }
        stages
    }

    #[test]
    fn narrowing_stage_bound() {
        for n in 4..=3000usize {
            let bound = (n as f64).log2().ceil() as usize - 2;
            assert!(worst_narrowing(n) <= bound, "n = {n}");
        }
    }

    #[test]
    fn halving_pool_shapes() {
        let groups = halving_pools(&[1, 2, 3]);
        assert_eq!(
            groups,
            vec![vec![1, 2], vec![3], vec![1, 3], vec![1], vec![2, 3], vec![2]]
        );
    }

    #[test]
    fn pair_small() {
        let inst = Instance::from_vecs(4, &[&[1], &[3]]).unwrap();
        let mut session = Session::new(&inst);
        let (a, b) = find_defective_pair(&mut session).unwrap();
        assert_eq!(set(&[a, b]), set(&[1, 3]));
        assert_eq!(session.stages_used(), 1);
    }

    #[test]
    fn pair_on_three_items_every_placement() {
        // every way to place two disjoint nonempty sets in {1,2,3}
        for labels in itertools::iproduct!(0..3usize, 0..3usize, 0..3usize) {
            let labels = [labels.0, labels.1, labels.2];
            let mut sets = vec![ItemSet::new(), ItemSet::new()];
            for (i, &l) in labels.iter().enumerate() {
                if l > 0 {
                    sets[l - 1].insert(i + 1);
                }
            }
            let Ok(inst) = Instance::new(3, sets) else { continue };
            let mut session = Session::new(&inst);
            let (a, b) = find_defective_pair(&mut session).unwrap();
            assert_ne!(inst.owner(a), inst.owner(b));
            assert!(inst.owner(a).is_some() && inst.owner(b).is_some());
        }
    }

    #[test]
    fn narrowing_on_64_items() {
        let mut rng = seed::rng(3);
        for _ in 0..200 {
            let inst = Instance::sample_at_most(64, &[3, 3], &mut rng).unwrap();
            let mut session = Session::new(&inst);
            let search = narrow_pair(&mut session).unwrap();
            assert!(session.stages_used() <= 4);
            let mut last = 64;
            for active in &search.history {
                assert!(active.len() < last);
                last = active.len();
                assert!(evaluate_test(&inst, &Pool::from_items(active.iter().copied())).unwrap());
            }
            let (a, b) = resolve_pair(&mut session, &search.candidates).unwrap();
            assert!(evaluate_test(&inst, &Pool::from_items([a, b])).unwrap());
            assert!(session.stages_used() <= 5);
            assert!(session.tests_used() <= 6 * session.stages_used());
        }
    }

    #[test]
    fn m2_examples() {
        let inst = Instance::from_vecs(16, &[&[1, 2], &[9]]).unwrap();
        let mut session = Session::new(&inst);
        let r = adaptive_m2(&mut session, 2, 1, 4).unwrap();
        assert!(r.succeeded);
        assert!(r.stages_used <= 4);

        let inst = Instance::from_vecs(16, &[&[5], &[12]]).unwrap();
        let mut session = Session::new(&inst);
        let r = adaptive_m2(&mut session, 1, 1, 4).unwrap();
        assert!(r.succeeded);
        assert_eq!(r.recovered.iter().map(ItemSet::len).sum::<usize>(), 2);
    }

    #[test]
    fn m2_tiny_populations() {
        for n in 2..=5 {
            let mut rng = seed::rng(n as u64);
            for _ in 0..30 {
                let inst = Instance::sample_at_most(n, &[1, n - 1], &mut rng).unwrap();
                let mut session = Session::new(&inst);
                let r = adaptive_m2(&mut session, 1, n - 1, 7).unwrap();
                assert!(r.succeeded, "{inst:?}");
                let cap = ((n as f64).log2().ceil() as usize).max(1);
                assert!(r.stages_used <= cap, "n={n} stages={}", r.stages_used);
            }
        }
    }

    #[test]
    fn m2_random_64() {
        let mut rng = seed::rng(11);
        for trial in 0..300u64 {
            let inst = Instance::sample_at_most(64, &[3, 3], &mut rng).unwrap();
            let mut session = Session::new(&inst);
            let r = adaptive_m2(&mut session, 3, 3, trial).unwrap();
            assert!(r.succeeded);
            assert!(r.stages_used <= 6);
        }
    }

    #[test]
    fn tuple_examples() {
        let inst = Instance::from_vecs(9, &[&[1], &[5]]).unwrap();
        let mut session = Session::new(&inst);
        let t = find_defective_tuple(&mut session, 2).unwrap();
        assert_eq!(set(&t.tuple), set(&[1, 5]));

        let inst = Instance::from_vecs(4, &[&[1], &[2], &[4]]).unwrap();
        let mut session = Session::new(&inst);
        let t = find_defective_tuple(&mut session, 3).unwrap();
        assert_eq!(set(&t.tuple), set(&[1, 2, 4]));
        assert_eq!(session.stages_used(), 1);
    }

    #[test]
    fn tuple_has_one_item_per_set() {
        let mut rng = seed::rng(5);
        for _ in 0..200 {
            let inst = Instance::sample_exact(60, &[2, 2, 1], &mut rng).unwrap();
            let mut session = Session::new(&inst);
            let t = find_defective_tuple(&mut session, 3).unwrap();
            let mut owners: Vec<_> = t.tuple.iter().map(|&x| inst.owner(x).unwrap()).collect();
            owners.sort();
            assert_eq!(owners, vec![0, 1, 2]);
            for active in &t.history {
                assert!(evaluate_test(&inst, &Pool::from_items(active.iter().copied())).unwrap());
            }
        }
    }

    #[test]
    fn general_singletons() {
        let inst = Instance::from_vecs(81, &[&[1], &[2], &[3]]).unwrap();
        let mut session = Session::new(&inst);
        let r = adaptive_general(&mut session, &[1, 1, 1], 0).unwrap();
        assert!(r.succeeded);
    }

    #[test]
    fn general_random() {
        let mut rng = seed::rng(8);
        for trial in 0..200u64 {
            let inst = Instance::sample_exact(60, &[2, 2, 1], &mut rng).unwrap();
            let mut session = Session::new(&inst);
            let r = adaptive_general(&mut session, &[2, 2, 1], trial).unwrap();
            assert!(r.succeeded);
        }
    }

    #[test]
    fn partition_sizes() {
        let items: Vec<usize> = (1..=10).collect();
        let parts = partition(&items, 4);
        assert_eq!(parts.iter().map(|p| p.len()).collect::<Vec<_>>(), vec![3, 3, 2, 2]);
    }
}
