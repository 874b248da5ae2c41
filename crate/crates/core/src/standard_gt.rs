//! Standard group testing subroutines used as black boxes by the
//! concomitant schemes.
//!
//! Adding a background set `A` to every row of a design turns a concomitant
//! test into a standard one: if `A` meets every hidden set except `S_k`, row
//! `i` is positive iff the row meets `S_k`. The one-shot decoder here is a
//! Bernoulli design with COMP decoding; the two-stage decoder follows COMP
//! with individual confirmation of the survivors and is zero-error.

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::ItemSet;
use crate::matrix::BitMatrix;
use crate::pool::Pool;
use crate::seed;
use crate::session::Session;

pub const DEFAULT_C0: f64 = 3.0;
/// Target error of the stage-1 design inside [`two_stage_decode`]. Only the
/// stage-2 cost depends on it.
pub const DEFAULT_TWO_STAGE_EPSILON0: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStageConfig {
    pub c0: f64,
    pub epsilon0: f64,
}

impl Default for TwoStageConfig {
    fn default() -> Self {
        Self {
            c0: DEFAULT_C0,
            epsilon0: DEFAULT_TWO_STAGE_EPSILON0,
        }
    }
}

/// Indicator vector `x` of a standard group testing problem, kept as its
/// support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectVector {
    support: Pool,
}

impl DefectVector {
    pub fn new<I: IntoIterator<Item = usize>>(items: I) -> Self {
        Self {
            support: Pool::from_items(items),
        }
    }

    pub fn support(&self) -> &Pool {
        &self.support
    }
}

impl From<&ItemSet> for DefectVector {
    fn from(set: &ItemSet) -> Self {
        Self::new(set.iter().copied())
    }
}

/// Each row of `design` with `background` added.
pub fn background_pools(design: &BitMatrix, background: &Pool) -> Vec<Pool> {
    design.rows().iter().map(|row| row.union(background)).collect()
}

/// `test(M, A)`: one stage of `t` tests, row `i` unioned with the background.
pub fn test_with_background(session: &mut Session<'_>, design: &BitMatrix, background: &Pool) -> Result<Vec<bool>> {
    session.run_stage(background_pools(design, background))
}

/// `M ⊙ x`: entry `i` is set iff row `i` meets the support of `x`.
pub fn boolean_or_product(design: &BitMatrix, x: &DefectVector) -> Vec<bool> {
    design.rows().iter().map(|row| !row.is_disjoint(&x.support)).collect()
}

/// Rows of a one-shot design: `ceil(c0 * s * (ln n + ln(1/eps0)))`.
pub fn oneshot_row_count(n: usize, s_bound: usize, epsilon0: f64, c0: f64) -> usize {
    let t = c0 * s_bound as f64 * ((n as f64).ln() + (1.0 / epsilon0).ln());
    (t.ceil() as usize).max(1)
}

/// Random design for recovering up to `s_bound` defectives among `n` with
/// error at most about `epsilon0` under COMP decoding. Entries are i.i.d.
/// Bernoulli with mean `1/(s_bound + 1)`.
pub fn build_oneshot_design(n: usize, s_bound: usize, epsilon0: f64, c0: f64, seed: u64) -> Result<BitMatrix> {
    if n == 0 || s_bound == 0 || s_bound > n {
        return Err(Error::Domain(format!(
            "need 1 <= s_bound <= n, got s_bound={s_bound}, n={n}"
        )));
    }
    if !(epsilon0 > 0.0 && epsilon0 < 1.0) {
        return Err(Error::Domain(format!("epsilon0 must lie in (0,1), got {epsilon0}")));
    }
    if c0.is_nan() || c0 <= 0.0 {
        return Err(Error::Domain(format!("c0 must be positive, got {c0}")));
    }
    let t = oneshot_row_count(n, s_bound, epsilon0, c0);
    let p = 1.0 / (s_bound as f64 + 1.0);
    let mut rng = seed::rng(seed);
    let rows = (0..t)
        .map(|_| {
            let mut row = Pool::with_universe(n);
            for j in 1..=n {
                if rng.gen_bool(p) {
                    row.insert(j);
                }
            }
            row
        })
        .collect();
    BitMatrix::new(n, rows)
}

/// COMP estimate of the defective set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompEstimate {
    pub items: ItemSet,
    /// The estimate has more than `s_bound` items, so it cannot be exact for
    /// an input within the bound.
    pub exceeds_bound: bool,
}

/// Every column that appears in no negative row. A superset of the true
/// support whenever `outcomes` is `M ⊙ x`.
pub fn decode_oneshot(outcomes: &[bool], design: &BitMatrix, s_bound: usize) -> Result<CompEstimate> {
    let items = comp_survivors(outcomes, design)?.into_iter().collect::<ItemSet>();
    Ok(CompEstimate {
        exceeds_bound: items.len() > s_bound,
        items,
    })
}

fn comp_survivors(outcomes: &[bool], design: &BitMatrix) -> Result<Vec<usize>> {
    if outcomes.len() != design.t() {
        return Err(Error::Domain(format!(
            "{} outcomes for a design with {} rows",
            outcomes.len(),
            design.t()
        )));
    }
    let mut eliminated = Pool::with_universe(design.n());
    for (row, &positive) in design.rows().iter().zip(outcomes) {
        if !positive {
            eliminated.union_with(row);
        }
    }
    Ok((1..=design.n()).filter(|&j| !eliminated.contains(j)).collect())
}

/// Result of a two-stage recovery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoStageOutcome {
    pub items: ItemSet,
    /// More items were found than the bound the caller declared.
    pub over_budget: bool,
}

/// Zero-error two-stage recovery of the one hidden set the background
/// misses, restricted to a candidate domain.
///
/// Stage 1 runs a one-shot design over the design columns with the
/// background in every test; stage 2 tests each COMP survivor individually
/// together with the background. Driven step by step so several decoders can
/// share stages.
#[derive(Debug, Clone)]
pub struct TwoStageDecoder {
    n: usize,
    columns: Vec<usize>,
    design: Option<BitMatrix>,
    background: Pool,
    s_bound: usize,
}

impl TwoStageDecoder {
    /// The target must be the only hidden set that `background` misses, and
    /// `domain` must not meet `background`.
    pub fn new(
        n: usize,
        domain: &ItemSet,
        s_bound: usize,
        background: &Pool,
        config: &TwoStageConfig,
        seed: u64,
    ) -> Result<Self> {
        if let Some(&item) = domain.iter().find(|&&j| j == 0 || j > n) {
            return Err(Error::InvalidPool { item, n });
        }
        if let Some(item) = background.out_of_range(n) {
            return Err(Error::InvalidPool { item, n });
        }
        if let Some(&item) = domain.iter().find(|&&j| background.contains(j)) {
            return Err(Error::Domain(format!("domain item {item} is also in the background")));
        }
        let columns: Vec<usize> = domain.iter().copied().collect();
        let design = if columns.is_empty() {
            None
        } else {
            let s = s_bound.clamp(1, columns.len());
            Some(build_oneshot_design(
                columns.len(),
                s,
                config.epsilon0,
                config.c0,
                seed,
            )?)
        };
        Ok(Self {
            n,
            columns,
            design,
            background: background.clone(),
            s_bound,
        })
    }

    pub fn background(&self) -> &Pool {
        &self.background
    }

    pub fn stage_one_pools(&self) -> Vec<Pool> {
        match &self.design {
            Some(design) => design
                .relabel(&self.columns)
                .into_iter()
                .map(|mut p| {
                    p.union_with(&self.background);
                    p
                })
                .collect(),
            None => Vec::new(),
        }
    }

    /// Domain items that appear in no negative stage-1 test.
    pub fn survivors(&self, outcomes: &[bool]) -> Result<Vec<usize>> {
        match &self.design {
            Some(design) => Ok(comp_survivors(outcomes, design)?
                .into_iter()
                .map(|j| self.columns[j - 1])
                .collect()),
            None => Ok(Vec::new()),
        }
    }

    pub fn stage_two_pools(&self, candidates: &[usize]) -> Vec<Pool> {
        candidates
            .iter()
            .map(|&j| {
                let mut pool = Pool::with_universe(self.n);
                pool.union_with(&self.background);
                pool.insert(j);
                pool
            })
            .collect()
    }

    pub fn resolve(&self, candidates: &[usize], outcomes: &[bool]) -> TwoStageOutcome {
        debug_assert_eq!(candidates.len(), outcomes.len());
        let items: ItemSet = candidates
            .iter()
            .zip(outcomes)
            .filter(|(_, &positive)| positive)
            .map(|(&j, _)| j)
            .collect();
        TwoStageOutcome {
            over_budget: items.len() > self.s_bound,
            items,
        }
    }
}

/// `Adaptive(<= s_bound, domain, background)`: recovers the part inside
/// `domain` of the one hidden set the background misses. Two stages; a stage
/// with nothing to test is skipped.
pub fn two_stage_decode(
    session: &mut Session<'_>,
    domain: &ItemSet,
    s_bound: usize,
    background: &Pool,
    seed: u64,
) -> Result<TwoStageOutcome> {
    let decoder = TwoStageDecoder::new(
        session.n(),
        domain,
        s_bound,
        background,
        &TwoStageConfig::default(),
        seed,
    )?;
    Ok(run_two_stage_batch(session, std::slice::from_ref(&decoder))?.remove(0))
}

/// Runs several two-stage decoders side by side: all stage-1 tests share one
/// stage and all stage-2 tests share the next.
pub fn run_two_stage_batch(session: &mut Session<'_>, decoders: &[TwoStageDecoder]) -> Result<Vec<TwoStageOutcome>> {
    let first: Vec<Vec<Pool>> = decoders.iter().map(TwoStageDecoder::stage_one_pools).collect();
    let outcomes = run_batched(session, first)?;
    let candidates = decoders
        .iter()
        .zip(&outcomes)
        .map(|(d, o)| d.survivors(o))
        .collect::<Result<Vec<_>>>()?;
    finish_batch(session, decoders, &candidates)
}

/// Stage 2 for decoders whose candidates are already known.
pub(crate) fn finish_batch(
    session: &mut Session<'_>,
    decoders: &[TwoStageDecoder],
    candidates: &[Vec<usize>],
) -> Result<Vec<TwoStageOutcome>> {
    let second: Vec<Vec<Pool>> = decoders
        .iter()
        .zip(candidates)
        .map(|(d, c)| d.stage_two_pools(c))
        .collect();
    let outcomes = run_batched(session, second)?;
    Ok(decoders
        .iter()
        .zip(candidates)
        .zip(&outcomes)
        .map(|((d, c), o)| d.resolve(c, o))
        .collect())
}

/// Concatenates the groups into one stage and splits the outcomes back. No
/// stage is spent when every group is empty.
pub(crate) fn run_batched(session: &mut Session<'_>, groups: Vec<Vec<Pool>>) -> Result<Vec<Vec<bool>>> {
    let lengths: Vec<usize> = groups.iter().map(Vec::len).collect();
    let pools: Vec<Pool> = groups.into_iter().flatten().collect();
    let outcomes = if pools.is_empty() {
        Vec::new()
    } else {
        session.run_stage(pools)?
    };
    let mut rest = outcomes.as_slice();
    Ok(lengths
        .into_iter()
        .map(|len| {
            let (head, tail) = rest.split_at(len);
            rest = tail;
            head.to_vec()
        })
        .collect())
}
