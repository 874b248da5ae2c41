use crate::error::{Error, Result};
use crate::instance::ItemSet;
use crate::matrix::BitMatrix;
use crate::pool::Pool;
use crate::seed;
use crate::session::{RecoveryResult, Session};
use crate::standard_gt::{
    background_pools, build_oneshot_design, decode_oneshot, run_two_stage_batch, TwoStageConfig, TwoStageDecoder,
};

use super::nonadaptive::{cross_pools, sample_pair};
use super::{check_params, label, EpsilonBudget, SchemeConfig};

/// Lowest `(i, j)`, `i` first, with `A_i` negative, `B_j` negative and
/// `A_i ∪ B_j` positive. `cross` is `i`-major.
pub fn find_separating_pair(y_a: &[bool], y_b: &[bool], cross: &[bool]) -> Option<(usize, usize)> {
    let tb = y_b.len();
    (0..y_a.len())
        .filter(|&i| !y_a[i])
        .find_map(|i| (0..tb).find(|&j| !y_b[j] && cross[i * tb + j]).map(|j| (i, j)))
}

/// One stage with every row of `A`, every row of `B` and every cross union.
fn separation_stage(session: &mut Session<'_>, a: &BitMatrix, b: &BitMatrix) -> Result<Option<(usize, usize)>> {
    let mut pools: Vec<Pool> = a.rows().to_vec();
    pools.extend(b.rows().iter().cloned());
    pools.extend(cross_pools(a, b));
    let outcomes = session.run_stage(pools)?;
    let (y_a, rest) = outcomes.split_at(a.t());
    let (y_b, cross) = rest.split_at(b.t());
    Ok(find_separating_pair(y_a, y_b, cross))
}

pub fn two_stage_run(
    session: &mut Session<'_>,
    s1: usize,
    s2: usize,
    epsilon: f64,
    seed: u64,
) -> Result<RecoveryResult> {
    two_stage_run_with(session, s1, s2, epsilon, &SchemeConfig::default(), seed)
}

/// Stage 1 finds a separating row pair; stage 2 runs one-shot designs with
/// each row as background. Ends after stage 1 with failure when no pair
/// qualifies.
pub fn two_stage_run_with(
    session: &mut Session<'_>,
    s1: usize,
    s2: usize,
    epsilon: f64,
    config: &SchemeConfig,
    seed: u64,
) -> Result<RecoveryResult> {
    let n = session.n();
    check_params(n, s1, s2, epsilon)?;
    let budget = EpsilonBudget::quarter(epsilon);
    let (a, b) = sample_pair(n, s1, s2, &budget, config, seed::split(seed, 0), seed::split(seed, 1))?;
    let Some((i, j)) = separation_stage(session, &a, &b)? else {
        return Ok(session.finish(Vec::new()));
    };
    let s_max = s1.max(s2);
    let m = build_oneshot_design(n, s_max, budget.epsilon0, config.c0, seed::split(seed, 2))?;
    let mut pools = background_pools(&m, a.row(i));
    pools.extend(background_pools(&m, b.row(j)));
    let outcomes = session.run_stage(pools)?;
    let (f_a, f_b) = outcomes.split_at(m.t());
    let first = decode_oneshot(f_a, &m, s_max)?;
    let second = decode_oneshot(f_b, &m, s_max)?;
    let over_budget = first.exceeds_bound || second.exceeds_bound;
    let mut result = session.finish(label(first.items, second.items, s1, s2));
    result.over_budget = over_budget;
    Ok(result)
}

pub fn three_stage_run(
    session: &mut Session<'_>,
    s1: usize,
    s2: usize,
    epsilon: f64,
    seed: u64,
) -> Result<RecoveryResult> {
    three_stage_run_with(session, s1, s2, epsilon, &SchemeConfig::default(), seed)
}

/// Stage 1 as in [`two_stage_run`]; stages 2 and 3 are zero-error two-stage
/// recoveries with backgrounds `A_i` and `B_j`.
pub fn three_stage_run_with(
    session: &mut Session<'_>,
    s1: usize,
    s2: usize,
    epsilon: f64,
    config: &SchemeConfig,
    seed: u64,
) -> Result<RecoveryResult> {
    let n = session.n();
    check_params(n, s1, s2, epsilon)?;
    let budget = EpsilonBudget::halves(epsilon);
    let (a, b) = sample_pair(n, s1, s2, &budget, config, seed::split(seed, 0), seed::split(seed, 1))?;
    let Some((i, j)) = separation_stage(session, &a, &b)? else {
        return Ok(session.finish(Vec::new()));
    };
    recover_separated(session, a.row(i), b.row(j), s1, s2, config, seed)
}

fn recover_separated(
    session: &mut Session<'_>,
    row_a: &Pool,
    row_b: &Pool,
    s1: usize,
    s2: usize,
    config: &SchemeConfig,
    seed: u64,
) -> Result<RecoveryResult> {
    let n = session.n();
    let s_max = s1.max(s2);
    let two_stage = TwoStageConfig {
        c0: config.c0,
        ..TwoStageConfig::default()
    };
    let outside = |row: &Pool| -> ItemSet { (1..=n).filter(|&x| !row.contains(x)).collect() };
    let decoders = [
        TwoStageDecoder::new(n, &outside(row_a), s_max, row_a, &two_stage, seed::split(seed, 3))?,
        TwoStageDecoder::new(n, &outside(row_b), s_max, row_b, &two_stage, seed::split(seed, 4))?,
    ];
    let mut outcomes = run_two_stage_batch(session, &decoders)?;
    let second = outcomes.pop().expect("two decoders");
    let first = outcomes.pop().expect("two decoders");
    let over_budget = first.over_budget || second.over_budget;
    let mut result = session.finish(label(first.items, second.items, s1, s2));
    result.over_budget = over_budget;
    Ok(result)
}

pub fn las_vegas_run(session: &mut Session<'_>, s1: usize, s2: usize, alpha: f64, seed: u64) -> Result<RecoveryResult> {
    las_vegas_run_with(session, s1, s2, alpha, &SchemeConfig::default(), seed)
}

/// Repeats stage 1 with fresh rows until a separating pair shows up, then
/// finishes as [`three_stage_run`]. `alpha` bounds the failure probability
/// of one attempt. Errors after `config.max_attempts` failed attempts.
pub fn las_vegas_run_with(
    session: &mut Session<'_>,
    s1: usize,
    s2: usize,
    alpha: f64,
    config: &SchemeConfig,
    seed: u64,
) -> Result<RecoveryResult> {
    let n = session.n();
    check_params(n, s1, s2, alpha)?;
    let budget = EpsilonBudget::halves(alpha);
    let (seed_a, seed_b) = (seed::split(seed, 0), seed::split(seed, 1));
    for attempt in 1..=config.max_attempts {
        let k = attempt as u64;
        let (a, b) = sample_pair(
            n,
            s1,
            s2,
            &budget,
            config,
            seed::split(seed_a, k),
            seed::split(seed_b, k),
        )?;
        if let Some((i, j)) = separation_stage(session, &a, &b)? {
            let mut result = recover_separated(session, a.row(i), b.row(j), s1, s2, config, seed)?;
            result.attempts = attempt;
            return Ok(result);
        }
    }
    Err(Error::AttemptCapExceeded {
        cap: config.max_attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;

    #[test]
    fn separating_pair_scan_order() {
        let y_a = [true, false, false];
        let y_b = [false, true];
        // i-major; row 0 ignored, row 1 has no hit, row 2 hits at j=0
        let cross = [true, true, false, true, true, true];
        assert_eq!(find_separating_pair(&y_a, &y_b, &cross), Some((2, 0)));
        assert_eq!(find_separating_pair(&[true], &y_b, &cross[..2]), None);
    }

    #[test]
    fn stage_counts() {
        let mut rng = seed::rng(6);
        for trial in 0..40u64 {
            let inst = Instance::sample_exact(400, &[2, 4], &mut rng).unwrap();
            let mut session = Session::new(&inst);
            let r = two_stage_run(&mut session, 2, 4, 0.05, trial).unwrap();
            assert_eq!(r.stages_used, if r.recovered.is_empty() { 1 } else { 2 });

            let mut session = Session::new(&inst);
            let r = three_stage_run(&mut session, 2, 4, 0.05, trial).unwrap();
            if !r.recovered.is_empty() {
                assert!(r.succeeded);
                assert_eq!(r.stages_used, 3);
                assert_eq!(r.recovered[0].len(), 2);
            }
        }
    }

    #[test]
    fn las_vegas_always_succeeds() {
        let mut rng = seed::rng(7);
        for trial in 0..50u64 {
            let inst = Instance::sample_exact(100, &[3, 3], &mut rng).unwrap();
            let mut session = Session::new(&inst);
            let r = las_vegas_run(&mut session, 3, 3, 0.5, trial).unwrap();
            assert!(r.succeeded);
            assert_eq!(r.stages_used, r.attempts + 2);
        }
    }

    #[test]
    fn las_vegas_cap() {
        let inst = Instance::from_vecs(4, &[&[1, 2], &[3, 4]]).unwrap();
        let mut session = Session::new(&inst);
        // rows of size 1 never hit both sets, but a cap of 0 attempts fails fast
        let config = SchemeConfig {
            max_attempts: 0,
            ..SchemeConfig::default()
        };
        let err = las_vegas_run_with(&mut session, 2, 2, 0.1, &config, 1).unwrap_err();
        assert!(matches!(err, Error::AttemptCapExceeded { cap: 0 }));
    }
}
