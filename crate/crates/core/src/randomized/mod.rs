//! Randomized designs for two hidden sets.
//!
//! All four schemes look for a pair of rows `A_i`, `B_j` that each meet
//! exactly one hidden set, different ones. Either row then works as a
//! background that turns the concomitant problem into standard group
//! testing for the other set.

mod nonadaptive;
mod sampler;
mod staged;

pub use nonadaptive::{
    decode_nonadaptive, encode_nonadaptive, encode_nonadaptive_with, nonadaptive_run, nonadaptive_run_with,
    EncodedDesign,
};
pub use sampler::{sample_matrix, sample_row, SamplerConfig};
pub use staged::{
    find_separating_pair, las_vegas_run, las_vegas_run_with, three_stage_run, three_stage_run_with, two_stage_run,
    two_stage_run_with,
};

use crate::error::{Error, Result};
use crate::instance::ItemSet;
use crate::standard_gt::DEFAULT_C0;

/// `e^5 / (4 pi^2)`, the inverse of the single-hit probability bound.
pub const LEMMA_CONSTANT: f64 = 3.759_349_237_092_914;

/// Default cap on Las Vegas separation attempts.
pub const DEFAULT_MAX_ATTEMPTS: usize = 1000;

/// Rows needed so that, with probability at least `1 - epsilon_i`, some row
/// meets `S_i` in exactly one item and misses the other set.
pub fn trial_count(epsilon_i: f64, s: usize, s_i: usize) -> usize {
    let t = LEMMA_CONSTANT * (1.0 / epsilon_i).ln() * s as f64 / s_i as f64;
    // guard against ceil(34.0000000001) style noise
    let rounded = t.round();
    let t = if (t - rounded).abs() < 1e-9 { rounded } else { t.ceil() };
    (t as usize).max(1)
}

/// Error split `(eps0, eps1, eps2)`: `eps0` for each one-shot decode, `eps1`
/// and `eps2` for the row samplers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonBudget {
    pub epsilon0: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
}

impl EpsilonBudget {
    /// `eps/4` each, so that `2 eps0 + eps1 + eps2 <= eps`.
    pub fn quarter(epsilon: f64) -> Self {
        let e = epsilon / 4.0;
        Self {
            epsilon0: e,
            epsilon1: e,
            epsilon2: e,
        }
    }

    /// `eps/2` for each sampler; the later stages are zero-error.
    pub fn halves(epsilon: f64) -> Self {
        let e = epsilon / 2.0;
        Self {
            epsilon0: e,
            epsilon1: e,
            epsilon2: e,
        }
    }
}

/// Knobs shared by the randomized schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub c0: f64,
    /// Sample rows with replacement (known-up-to-a-constant sizes).
    pub replacement: bool,
    pub c_factor: f64,
    pub max_attempts: usize,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            c0: DEFAULT_C0,
            replacement: false,
            c_factor: 1.0,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

pub(crate) fn check_params(n: usize, s1: usize, s2: usize, epsilon: f64) -> Result<()> {
    if s1 == 0 || s2 == 0 || s1 + s2 > n {
        return Err(Error::InvalidSizes(format!(
            "need s1, s2 >= 1 and s1 + s2 <= n, got ({s1},{s2}) with n={n}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!(
            "error probability must lie in (0,1), got {epsilon}"
        )));
    }
    Ok(())
}

/// Orders two recovered sets: the one of size `s1` first when the sizes
/// differ, otherwise by smallest item.
pub(crate) fn label(first: ItemSet, second: ItemSet, s1: usize, s2: usize) -> Vec<ItemSet> {
    let swap = if s1 != s2 {
        first.len() != s1 && second.len() == s1
    } else {
        first.first() > second.first()
    };
    if swap {
        vec![second, first]
    } else {
        vec![first, second]
    }
}

/// Both sets nonempty and disjoint, with sizes `{s1, s2}` as a multiset.
pub(crate) fn plausible(first: &ItemSet, second: &ItemSet, s1: usize, s2: usize) -> bool {
    let mut got = [first.len(), second.len()];
    let mut want = [s1, s2];
    got.sort_unstable();
    want.sort_unstable();
    got == want && !first.is_empty() && first.is_disjoint(second)
}
