use crate::error::Result;
use crate::instance::ItemSet;
use crate::matrix::BitMatrix;
use crate::pool::Pool;
use crate::seed;
use crate::session::{RecoveryResult, Session};
use crate::standard_gt::{background_pools, build_oneshot_design, decode_oneshot};

use super::sampler::sample_matrix;
use super::{check_params, label, plausible, EpsilonBudget, SamplerConfig, SchemeConfig};

/// The three matrices of the one-stage design.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDesign {
    pub a: BitMatrix,
    pub b: BitMatrix,
    pub m: BitMatrix,
    pub budget: EpsilonBudget,
    pub s1: usize,
    pub s2: usize,
}

impl EncodedDesign {
    pub fn total_tests(&self) -> usize {
        let (ta, tb, tm) = (self.a.t(), self.b.t(), self.m.t());
        ta + tb + ta * tb + ta * tm + tb * tm
    }
}

pub(crate) fn sample_pair(
    n: usize,
    s1: usize,
    s2: usize,
    budget: &EpsilonBudget,
    config: &SchemeConfig,
    seed_a: u64,
    seed_b: u64,
) -> Result<(BitMatrix, BitMatrix)> {
    let sampler = |epsilon: f64| {
        if config.replacement {
            SamplerConfig::with_replacement(n, s1 + s2, epsilon, config.c_factor)
        } else {
            SamplerConfig::new(n, s1 + s2, epsilon)
        }
    };
    let a_cfg = sampler(budget.epsilon1)?;
    let b_cfg = sampler(budget.epsilon2)?;
    let a = sample_matrix(&a_cfg, a_cfg.rows_for(s1), seed_a)?;
    let b = sample_matrix(&b_cfg, b_cfg.rows_for(s2), seed_b)?;
    Ok((a, b))
}

/// Pools `A_i ∪ B_j`, `i`-major.
pub(crate) fn cross_pools(a: &BitMatrix, b: &BitMatrix) -> Vec<Pool> {
    a.rows()
        .iter()
        .flat_map(|ra| b.rows().iter().map(move |rb| ra.union(rb)))
        .collect()
}

pub fn encode_nonadaptive(
    n: usize,
    s1: usize,
    s2: usize,
    epsilon: f64,
    seed: u64,
) -> Result<(EncodedDesign, Vec<Pool>)> {
    encode_nonadaptive_with(n, s1, s2, epsilon, &SchemeConfig::default(), seed)
}

/// Builds the design and its single stage of tests, in this order: rows of
/// `A`, rows of `B`, all `A_i ∪ B_j` (`i`-major), `test(M, A_i)` for each
/// `i`, `test(M, B_j)` for each `j`.
pub fn encode_nonadaptive_with(
    n: usize,
    s1: usize,
    s2: usize,
    epsilon: f64,
    config: &SchemeConfig,
    seed: u64,
) -> Result<(EncodedDesign, Vec<Pool>)> {
    check_params(n, s1, s2, epsilon)?;
    let budget = EpsilonBudget::quarter(epsilon);
    let (a, b) = sample_pair(n, s1, s2, &budget, config, seed::split(seed, 0), seed::split(seed, 1))?;
    let m = build_oneshot_design(n, s1.max(s2), budget.epsilon0, config.c0, seed::split(seed, 2))?;
    let mut pools = Vec::new();
    pools.extend(a.rows().iter().cloned());
    pools.extend(b.rows().iter().cloned());
    pools.extend(cross_pools(&a, &b));
    for row in a.rows().iter().chain(b.rows()) {
        pools.extend(background_pools(&m, row));
    }
    Ok((
        EncodedDesign {
            a,
            b,
            m,
            budget,
            s1,
            s2,
        },
        pools,
    ))
}

/// Recovers both sets from the outcomes of the plan, or `None` when no row
/// pair passes. Scans `i`, then `j`, ascending; a candidate pair whose
/// decodes are not two disjoint nonempty sets of sizes `{s1, s2}` is skipped.
pub fn decode_nonadaptive(outcomes: &[bool], design: &EncodedDesign) -> Result<Option<Vec<ItemSet>>> {
    let (ta, tb, tm) = (design.a.t(), design.b.t(), design.m.t());
    if outcomes.len() != design.total_tests() {
        return Err(crate::Error::Domain(format!(
            "{} outcomes for a plan of {} tests",
            outcomes.len(),
            design.total_tests()
        )));
    }
    let (y_a, rest) = outcomes.split_at(ta);
    let (y_b, rest) = rest.split_at(tb);
    let (cross, rest) = rest.split_at(ta * tb);
    let (f_a, f_b) = rest.split_at(ta * tm);
    let s_max = design.s1.max(design.s2);

    for i in (0..ta).filter(|&i| !y_a[i]) {
        let r = &cross[i * tb..(i + 1) * tb];
        if r == y_b {
            continue;
        }
        let first = decode_oneshot(&f_a[i * tm..(i + 1) * tm], &design.m, s_max)?.items;
        for j in (0..tb).filter(|&j| !y_b[j] && r[j]) {
            let second = decode_oneshot(&f_b[j * tm..(j + 1) * tm], &design.m, s_max)?.items;
            if plausible(&first, &second, design.s1, design.s2) {
                return Ok(Some(label(first, second, design.s1, design.s2)));
            }
        }
    }
    Ok(None)
}

pub fn nonadaptive_run(
    session: &mut Session<'_>,
    s1: usize,
    s2: usize,
    epsilon: f64,
    seed: u64,
) -> Result<RecoveryResult> {
    nonadaptive_run_with(session, s1, s2, epsilon, &SchemeConfig::default(), seed)
}

pub fn nonadaptive_run_with(
    session: &mut Session<'_>,
    s1: usize,
    s2: usize,
    epsilon: f64,
    config: &SchemeConfig,
    seed: u64,
) -> Result<RecoveryResult> {
    let (design, pools) = encode_nonadaptive_with(session.n(), s1, s2, epsilon, config, seed)?;
    let outcomes = session.run_stage(pools)?;
    let recovered = decode_nonadaptive(&outcomes, &design)?.unwrap_or_default();
    Ok(session.finish(recovered))
}
