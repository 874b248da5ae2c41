//! Ground-truth instances and the pooled-test semantics.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::pool::Pool;

/// A set of 1-indexed items.
pub type ItemSet = BTreeSet<usize>;

/// The hidden ground truth: `n` items and `m >= 2` pairwise disjoint,
/// nonempty semi-defective sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    sets: Vec<ItemSet>,
    members: Vec<Vec<usize>>,
}

impl Instance {
    pub fn new(n: usize, sets: Vec<ItemSet>) -> Result<Self> {
        if sets.len() < 2 {
            return Err(Error::InvalidInstance(format!(
                "need at least 2 sets, got {}",
                sets.len()
            )));
        }
        let mut seen = ItemSet::new();
        for (i, set) in sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidInstance(format!("set {} is empty", i + 1)));
            }
            for &item in set {
                if item == 0 || item > n {
                    return Err(Error::InvalidInstance(format!(
                        "item {item} of set {} outside 1..={n}",
                        i + 1
                    )));
                }
                if !seen.insert(item) {
                    return Err(Error::InvalidInstance(format!(
                        "item {item} appears in more than one set"
                    )));
                }
            }
        }
        let members = sets.iter().map(|s| s.iter().copied().collect()).collect();
        Ok(Self { n, sets, members })
    }

    pub fn from_vecs(n: usize, sets: &[&[usize]]) -> Result<Self> {
        Self::new(n, sets.iter().map(|s| s.iter().copied().collect()).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[ItemSet] {
        &self.sets
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(ItemSet::len).collect()
    }

    /// Index of the set containing `item`, if any.
    pub fn owner(&self, item: usize) -> Option<usize> {
        self.sets.iter().position(|s| s.contains(&item))
    }

    /// Outcome of a test on `pool`, without range validation.
    pub(crate) fn outcome(&self, pool: &Pool) -> bool {
        self.members
            .iter()
            .all(|set| set.iter().any(|&item| pool.contains(item)))
    }

    /// Uniform over ordered families of disjoint sets with exactly the given
    /// sizes.
    pub fn sample_exact<R: Rng + ?Sized>(n: usize, sizes: &[usize], rng: &mut R) -> Result<Self> {
        validate_sizes(n, sizes)?;
        let total: usize = sizes.iter().sum();
        let picked = index::sample(rng, n, total).into_vec();
        let mut sets = Vec::with_capacity(sizes.len());
        let mut offset = 0;
        for &size in sizes {
            sets.push(picked[offset..offset + size].iter().map(|&i| i + 1).collect());
            offset += size;
        }
        Self::new(n, sets)
    }

    /// Each `|S_i|` uniform in `1..=bounds[i]`, then placed as in
    /// [`Instance::sample_exact`].
    pub fn sample_at_most<R: Rng + ?Sized>(n: usize, bounds: &[usize], rng: &mut R) -> Result<Self> {
        validate_sizes(n, bounds)?;
        let sizes: Vec<usize> = bounds.iter().map(|&b| rng.gen_range(1..=b)).collect();
        Self::sample_exact(n, &sizes, rng)
    }

    /// Text format: line 1 `n m`, then one line of space-separated items per
    /// set.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line_no, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let header = parse_numbers(header, line_no)?;
        let [n, m] = header[..] else {
            return Err(Error::Parse {
                line: line_no,
                msg: "header must be `n m`".into(),
            });
        };
        let mut sets = Vec::with_capacity(m);
        for (line_no, line) in lines {
            sets.push(parse_numbers(line, line_no)?.into_iter().collect());
        }
        if sets.len() != m {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("header declares {m} sets, found {}", sets.len()),
            });
        }
        Self::new(n, sets)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m());
        for set in &self.sets {
            let items: Vec<String> = set.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}", items.join(" "));
        }
        out
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

pub(crate) fn parse_numbers(line: &str, line_no: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("expected a nonnegative integer, got `{tok}`"),
            })
        })
        .collect()
}

pub(crate) fn validate_sizes(n: usize, sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::InvalidSizes("need at least two sets".into()));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidSizes("every set size must be at least 1".into()));
    }
    let total: usize = sizes.iter().sum();
    if total > n {
        return Err(Error::InvalidSizes(format!("sizes sum to {total} > n = {n}")));
    }
    Ok(())
}

/// Outcome of a test on `pool`: true iff the pool meets every hidden set.
/// The empty pool is always negative.
pub fn evaluate_test(instance: &Instance, pool: &Pool) -> Result<bool> {
    if let Some(item) = pool.out_of_range(instance.n()) {
        return Err(Error::InvalidPool { item, n: instance.n() });
    }
    Ok(instance.outcome(pool))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn evaluate_examples() {
        let inst = Instance::from_vecs(4, &[&[1], &[2]]).unwrap();
        assert!(evaluate_test(&inst, &Pool::from_items([1, 2])).unwrap());
        assert!(!evaluate_test(&inst, &Pool::new()).unwrap());

        let inst = Instance::from_vecs(6, &[&[1, 2], &[5]]).unwrap();
        assert!(!evaluate_test(&inst, &Pool::from_items([2, 3, 4])).unwrap());
    }

    #[test]
    fn out_of_range_pool_rejected() {
        let inst = Instance::from_vecs(4, &[&[1], &[2]]).unwrap();
        assert!(matches!(
            evaluate_test(&inst, &Pool::from_items([1, 5])),
            Err(Error::InvalidPool { item: 5, n: 4 })
        ));
    }

    #[test]
    fn construction_errors() {
        assert!(Instance::from_vecs(4, &[&[1]]).is_err());
        assert!(Instance::from_vecs(4, &[&[1], &[]]).is_err());
        assert!(Instance::from_vecs(4, &[&[1], &[1, 2]]).is_err());
        assert!(Instance::from_vecs(4, &[&[1], &[5]]).is_err());
        assert!(Instance::from_vecs(4, &[&[0], &[2]]).is_err());
    }

    #[test]
    fn text_format() {
        let inst = Instance::parse("6 2\n1 2\n5\n").unwrap();
        assert_eq!(inst.n(), 6);
        assert_eq!(inst.sizes(), vec![2, 1]);
        assert_eq!(inst.to_text(), "6 2\n1 2\n5\n");
        assert_eq!(Instance::parse(&inst.to_text()).unwrap(), inst);

        assert!(matches!(Instance::parse("6 3\n1\n2\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            Instance::parse("6 2\n1 x\n2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn sampling_respects_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let inst = Instance::sample_exact(30, &[3, 5, 2], &mut rng).unwrap();
            assert_eq!(inst.sizes(), vec![3, 5, 2]);
            let inst = Instance::sample_at_most(30, &[3, 5], &mut rng).unwrap();
            assert!(inst.sizes()[0] <= 3 && inst.sizes()[1] <= 5);
        }
        assert!(Instance::sample_exact(4, &[3, 2], &mut rng).is_err());
    }

    fn small_instance() -> impl Strategy<Value = Instance> {
        (4usize..=12).prop_flat_map(|n| {
            (Just(n), proptest::collection::vec(0usize..3, n)).prop_filter_map("need nonempty sets", |(n, labels)| {
                let mut sets = vec![ItemSet::new(), ItemSet::new()];
                for (i, &l) in labels.iter().enumerate() {
                    if l > 0 {
                        sets[l - 1].insert(i + 1);
                    }
                }
                Instance::new(n, sets).ok()
            })
        })
    }

    proptest! {
        #[test]
        fn monotone_in_pool(inst in small_instance(), a in any::<u16>(), b in any::<u16>()) {
            let n = inst.n();
            let small: Pool = (1..=n).filter(|i| a & (1 << (i - 1)) != 0).collect();
            let mut big = small.clone();
            big.extend((1..=n).filter(|i| b & (1 << (i - 1)) != 0));
            if evaluate_test(&inst, &small).unwrap() {
                prop_assert!(evaluate_test(&inst, &big).unwrap());
            }
        }
    }
}
