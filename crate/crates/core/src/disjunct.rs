//! `(n, u, v)`-disjunct designs and the one-stage deterministic decoder for
//! two hidden sets.
//!
//! A design is `(n, u, v)`-disjunct when for every `u + v` columns and every
//! choice of `u` of them, some row has ones on the chosen `u` and zeros on
//! the other `v`. With `u = 2` and `v = s_max`, every pair of items that is
//! not a defective pair shares a negative row, so the defective pairs are
//! exactly the pairs never seen together in a negative test.

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::ItemSet;
use crate::matrix::BitMatrix;
use crate::pool::Pool;
use crate::seed;
use crate::session::{RecoveryResult, Session};

/// Largest `n * C(n, u + v)` for which brute-force verification is attempted.
pub const DEFAULT_VERIFY_CAP: u128 = 20_000_000;
const MAX_RESAMPLES: u64 = 1_000;

/// A column choice that breaks disjunctness: no row covers all of
/// `designated` while avoiding all of `others`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjunctViolation {
    pub designated: Vec<usize>,
    pub others: Vec<usize>,
}

/// Brute force over every `u`-set of designated columns and every `v`-set of
/// other columns. Returns the first violation in lexicographic order.
pub fn find_violation(matrix: &BitMatrix, u: usize, v: usize) -> Option<DisjunctViolation> {
    let n = matrix.n();
    if u + v > n {
        return None;
    }
    let cols = matrix.column_sets();
    let t = matrix.t();
    for designated in (1..=n).combinations(u) {
        let mut covering = FixedBitSet::with_capacity(t);
        covering.insert_range(..);
        for &j in &designated {
            covering.intersect_with(&cols[j]);
        }
        let rest = (1..=n).filter(|j| !designated.contains(j));
        for others in rest.combinations(v) {
            let mut free = covering.clone();
            for &h in &others {
                free.difference_with(&cols[h]);
                if free.is_clear() {
                    break;
                }
            }
            if free.is_clear() {
                return Some(DisjunctViolation { designated, others });
            }
        }
    }
    None
}

pub fn is_disjunct(matrix: &BitMatrix, u: usize, v: usize) -> bool {
    find_violation(matrix, u, v).is_none()
}

/// Row bound for an `(n, 2, s_max)`-disjunct design with natural log.
pub fn t_star(n: usize, s_max: usize) -> usize {
    t_star_with_base(n, s_max, std::f64::consts::E)
}

/// Same bound with the log taken to `base`.
pub fn t_star_with_base(n: usize, s_max: usize, base: f64) -> usize {
    assert!(s_max >= 1 && s_max <= n, "need 1 <= s_max <= n");
    let s = s_max as f64;
    let log = ((n as f64) / (s + 2.0) + 1.0).ln() / base.ln();
    let t = ((s + 2.0) / 2.0).powi(2) * ((s + 2.0) / s).powf(s) * (1.0 + (s + 2.0) * (1.0 + log));
    t.ceil() as usize
}

/// Work estimate `n * C(n, u + v)` used against the verification cap.
pub fn verification_work(n: usize, u: usize, v: usize) -> u128 {
    let k = (u + v).min(n) as u128;
    let n128 = n as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul(n128 - i) / (i + 1);
    }
    n128.saturating_mul(c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjunctCertificate {
    pub matrix: BitMatrix,
    pub u: usize,
    pub v: usize,
    /// The matrix passed [`is_disjunct`] for `(u, v)`.
    pub verified: bool,
}

impl DisjunctCertificate {
    /// Checks a supplied matrix.
    pub fn check(matrix: BitMatrix, u: usize, v: usize) -> Result<Self> {
        check_cap(matrix.n(), u, v, DEFAULT_VERIFY_CAP)?;
        let verified = is_disjunct(&matrix, u, v);
        Ok(Self { matrix, u, v, verified })
    }
}

fn check_cap(n: usize, u: usize, v: usize, cap: u128) -> Result<()> {
    let work = verification_work(n, u, v);
    if work > cap {
        return Err(Error::VerificationTooLarge { work, cap });
    }
    Ok(())
}

/// Random `t_star(n, v)`-row design with entries drawn with probability
/// `u/(u+v)`. With `verify`, resamples until the design is disjunct.
pub fn build_disjunct(n: usize, u: usize, v: usize, seed: u64, verify: bool) -> Result<DisjunctCertificate> {
    build_disjunct_with_cap(n, u, v, seed, verify, DEFAULT_VERIFY_CAP)
}

pub fn build_disjunct_with_cap(
    n: usize,
    u: usize,
    v: usize,
    seed: u64,
    verify: bool,
    cap: u128,
) -> Result<DisjunctCertificate> {
    if u == 0 || v == 0 || u + v > n {
        return Err(Error::Domain(format!(
            "need u, v >= 1 and u + v <= n, got u={u}, v={v}, n={n}"
        )));
    }
    if verify {
        check_cap(n, u, v, cap)?;
    }
    let t = t_star(n, v);
    let p = u as f64 / (u + v) as f64;
    for attempt in 0..MAX_RESAMPLES {
        let mut rng = seed::rng(seed::split(seed, attempt));
        let rows = (0..t)
            .map(|_| (1..=n).filter(|_| rng.gen_bool(p)).collect::<Pool>())
            .collect();
        let matrix = BitMatrix::new(n, rows)?;
        if !verify {
            return Ok(DisjunctCertificate {
                matrix,
                u,
                v,
                verified: false,
            });
        }
        if is_disjunct(&matrix, u, v) {
            return Ok(DisjunctCertificate {
                matrix,
                u,
                v,
                verified: true,
            });
        }
    }
    Err(Error::Invariant(format!(
        "no disjunct design found in {MAX_RESAMPLES} samples"
    )))
}

/// For each column, the negative rows that contain it.
fn negative_columns(matrix: &BitMatrix, outcomes: &[bool]) -> Vec<FixedBitSet> {
    let mut cols = matrix.column_sets();
    let mut positive = FixedBitSet::with_capacity(matrix.t());
    for (i, &o) in outcomes.iter().enumerate() {
        positive.set(i, o);
    }
    for col in &mut cols {
        col.difference_with(&positive);
    }
    cols
}

/// `t_0({x1, x2})`: the number of negative tests containing both items.
pub fn negative_count(matrix: &BitMatrix, outcomes: &[bool], x1: usize, x2: usize) -> usize {
    matrix
        .rows()
        .iter()
        .zip(outcomes)
        .filter(|(row, &o)| !o && row.contains(x1) && row.contains(x2))
        .count()
}

/// All pairs `x1 < x2` with `t_0 = 0`, in lexicographic order.
pub fn candidate_pairs(matrix: &BitMatrix, outcomes: &[bool]) -> Vec<(usize, usize)> {
    let neg = negative_columns(matrix, outcomes);
    let n = matrix.n();
    let mut pairs = Vec::new();
    for x1 in 1..=n {
        for x2 in x1 + 1..=n {
            if neg[x1].is_disjoint(&neg[x2]) {
                pairs.push((x1, x2));
            }
        }
    }
    pairs
}

/// Decodes the two sets from the outcomes of every row of `matrix`.
pub fn decode_pairs(matrix: &BitMatrix, outcomes: &[bool]) -> Result<[ItemSet; 2]> {
    if outcomes.len() != matrix.t() {
        return Err(Error::Domain(format!(
            "{} outcomes for a design with {} rows",
            outcomes.len(),
            matrix.t()
        )));
    }
    let pairs = candidate_pairs(matrix, outcomes);
    let &(x1, x2) = pairs
        .first()
        .ok_or_else(|| Error::MalformedInstance("no pair avoids every negative test".into()))?;
    let mut first = ItemSet::new();
    let mut second = ItemSet::new();
    for &(a, b) in &pairs {
        // (x, x2) in S, with pairs unordered
        if b == x2 {
            first.insert(a);
        } else if a == x2 {
            first.insert(b);
        }
        if a == x1 {
            second.insert(b);
        } else if b == x1 {
            second.insert(a);
        }
    }
    Ok([first, second])
}

/// Runs every row of the certificate as a single stage and decodes.
pub fn algorithm1_decode(session: &mut Session<'_>, cert: &DisjunctCertificate) -> Result<RecoveryResult> {
    if cert.u != 2 {
        return Err(Error::Domain(format!("decoder needs u = 2, got {}", cert.u)));
    }
    if cert.matrix.n() != session.n() {
        return Err(Error::Domain(format!(
            "design has {} columns, instance has {} items",
            cert.matrix.n(),
            session.n()
        )));
    }
    let outcomes = session.run_stage(cert.matrix.rows().to_vec())?;
    let [a, b] = decode_pairs(&cert.matrix, &outcomes)?;
    Ok(session.finish(vec![a, b]))
}
