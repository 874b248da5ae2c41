//! Counting bounds and hypergeometric quantities, all in bits where a log
//! appears.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` for which [`lower_bound`] multiplies exact binomials.
pub const EXACT_LIMIT: usize = 2000;

pub fn binomial_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// `log2(x)` for `x > 0`.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.log2() + shift as f64
}

fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let scaled = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    scaled.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-shift as i32)
}

/// `log2 C(n, k)` from log-gamma.
pub fn log2_binomial_lgamma(n: usize, k: usize) -> f64 {
    let ln = libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0);
    ln / std::f64::consts::LN_2
}

fn check_sizes(n: usize, sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidSizes(format!(
            "sizes must be nonempty and positive, got {sizes:?}"
        )));
    }
    let total: usize = sizes.iter().sum();
    if total > n {
        return Err(Error::InvalidSizes(format!("sizes sum to {total} > n = {n}")));
    }
    Ok(())
}

/// `log2` of the number of ordered families of disjoint sets with the given
/// sizes: `prod_i C(n - sum_{v<i} s_v, s_i)`.
pub fn lower_bound(n: usize, sizes: &[usize]) -> Result<f64> {
    check_sizes(n, sizes)?;
    if n <= EXACT_LIMIT {
        Ok(lower_bound_exact(n, sizes))
    } else {
        Ok(lower_bound_lgamma(n, sizes))
    }
}

fn lower_bound_exact(n: usize, sizes: &[usize]) -> f64 {
    let mut remaining = n;
    let mut product = BigUint::one();
    for &s in sizes {
        product *= binomial_big(remaining, s);
        remaining -= s;
    }
    log2_big(&product)
}

pub(crate) fn lower_bound_lgamma(n: usize, sizes: &[usize]) -> f64 {
    let mut remaining = n;
    let mut bits = 0.0;
    for &s in sizes {
        bits += log2_binomial_lgamma(remaining, s);
        remaining -= s;
    }
    bits
}

/// `sum_i s_i log2(n / s_i)`, the order of the lower bound when
/// `sum_i s_i <= n/2`.
pub fn simplified_bound(n: usize, sizes: &[usize]) -> f64 {
    sizes.iter().map(|&s| s as f64 * (n as f64 / s as f64).log2()).sum()
}

/// `t(s, m) = (s + m) / log2 C(s + m, m) * C(s + m, m)`.
pub fn hypergraph_t(s: usize, m: usize) -> f64 {
    let c = binomial_big(s + m, m).to_f64().unwrap_or(f64::INFINITY);
    (s + m) as f64 / c.log2() * c
}

/// Tests needed when the problem is solved as non-adaptive hypergraph
/// learning with `s1 * s2` edges of size 2: `t(s1 s2, 2) log2 n`.
pub fn hypergraph_baseline(s1: usize, s2: usize, n: usize) -> f64 {
    hypergraph_t(s1 * s2, 2) * (n as f64).log2()
}

/// The baseline is only claimed for `n >= (s1 s2)^2`.
pub fn baseline_applicable(s1: usize, s2: usize, n: usize) -> bool {
    let s = (s1 * s2) as u128;
    n as u128 >= s * s
}

/// Probability that `draw` items sampled without replacement from `n`
/// contain exactly `a` of a fixed `s`-set, computed exactly.
pub fn hypergeom_exact(n: usize, draw: usize, s: usize, a: usize) -> Result<f64> {
    if draw > n || s > n || a > draw.min(s) {
        return Err(Error::Domain(format!(
            "invalid hypergeometric parameters n={n}, draw={draw}, s={s}, a={a}"
        )));
    }
    let num = binomial_big(n - s, draw - a) * binomial_big(s, a);
    Ok(ratio_to_f64(&num, &binomial_big(n, draw)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub sizes: Vec<usize>,
    pub lower_bound_bits: f64,
    pub simplified_bound_bits: f64,
    /// `sum s_i <= n/2`, the regime where the simplified form is of the
    /// same order as the exact bound.
    pub simplified_valid: bool,
    /// Only set for two sets.
    pub baseline_tests: Option<f64>,
    pub baseline_applicable: Option<bool>,
}

impl BoundReport {
    pub fn new(n: usize, sizes: &[usize]) -> Result<Self> {
        let lower_bound_bits = lower_bound(n, sizes)?;
        let total: usize = sizes.iter().sum();
        let (baseline_tests, applicable) = match sizes {
            [s1, s2] => (
                Some(hypergraph_baseline(*s1, *s2, n)),
                Some(baseline_applicable(*s1, *s2, n)),
            ),
            _ => (None, None),
        };
        Ok(Self {
            n,
            sizes: sizes.to_vec(),
            lower_bound_bits,
            simplified_bound_bits: simplified_bound(n, sizes),
            simplified_valid: 2 * total <= n,
            baseline_tests,
            baseline_applicable: applicable,
        })
    }
}
