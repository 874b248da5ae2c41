use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::BitMatrix;
use crate::pool::Pool;
use crate::seed;

use super::trial_count;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub n: usize,
    /// `s1 + s2`.
    pub s: usize,
    pub epsilon_i: f64,
    pub replacement: bool,
    /// Scales the number of draws in the with-replacement variant.
    pub c_factor: f64,
}

impl SamplerConfig {
    pub fn new(n: usize, s: usize, epsilon_i: f64) -> Result<Self> {
        Self {
            n,
            s,
            epsilon_i,
            replacement: false,
            c_factor: 1.0,
        }
        .validated()
    }

    pub fn with_replacement(n: usize, s: usize, epsilon_i: f64, c_factor: f64) -> Result<Self> {
        Self {
            n,
            s,
            epsilon_i,
            replacement: true,
            c_factor,
        }
        .validated()
    }

    fn validated(self) -> Result<Self> {
        if self.s == 0 || self.s > self.n {
            return Err(Error::Domain(format!(
                "need 1 <= s <= n, got s={}, n={}",
                self.s, self.n
            )));
        }
        if !(self.epsilon_i > 0.0 && self.epsilon_i < 1.0) {
            return Err(Error::Domain(format!(
                "epsilon_i must lie in (0,1), got {}",
                self.epsilon_i
            )));
        }
        if self.c_factor.is_nan() || self.c_factor < 1.0 {
            return Err(Error::Domain(format!(
                "c_factor must be at least 1, got {}",
                self.c_factor
            )));
        }
        Ok(self)
    }

    /// Items per row without replacement: `floor(n/s)`.
    pub fn row_size(&self) -> usize {
        self.n / self.s
    }

    /// Draws per row with replacement: `ceil(c_factor * n / s)`.
    pub fn draws(&self) -> usize {
        (self.c_factor * self.n as f64 / self.s as f64).ceil() as usize
    }

    /// Rows that reach error `epsilon_i` for a set of size `s_i`.
    pub fn rows_for(&self, s_i: usize) -> usize {
        trial_count(self.epsilon_i, self.s, s_i)
    }
}

pub fn sample_row<R: Rng + ?Sized>(config: &SamplerConfig, rng: &mut R) -> Pool {
    let mut row = Pool::with_universe(config.n);
    if config.replacement {
        for _ in 0..config.draws() {
            row.insert(rng.gen_range(1..=config.n));
        }
    } else {
        row.extend(
            index::sample(rng, config.n, config.row_size())
                .into_iter()
                .map(|i| i + 1),
        );
    }
    row
}

pub fn sample_matrix(config: &SamplerConfig, rows: usize, seed: u64) -> Result<BitMatrix> {
    let mut rng = seed::rng(seed);
    let rows = (0..rows.max(1)).map(|_| sample_row(config, &mut rng)).collect();
    BitMatrix::new(config.n, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_sizes() {
        let config = SamplerConfig::new(12, 3, 0.1).unwrap();
        let mut rng = seed::rng(1);
        for _ in 0..100 {
            assert_eq!(sample_row(&config, &mut rng).len(), 4);
        }
        let config = SamplerConfig::new(13, 3, 0.1).unwrap();
        assert_eq!(sample_row(&config, &mut rng).len(), 4);
    }

    #[test]
    fn single_hit_frequency() {
        // exact value 252/495
        let config = SamplerConfig::new(12, 3, 0.1).unwrap();
        let mut rng = seed::rng(2);
        let target = Pool::from_items([1, 2, 3]);
        let trials = 200_000;
        let hits = (0..trials)
            .filter(|_| {
                let row = sample_row(&config, &mut rng);
                target.items().filter(|&x| row.contains(x)).count() == 1
            })
            .count();
        let freq = hits as f64 / trials as f64;
        assert!((freq - 252.0 / 495.0).abs() < 0.005, "{freq}");
    }

    #[test]
    fn replacement_rows_stay_in_range() {
        let config = SamplerConfig::with_replacement(50, 5, 0.1, 2.0).unwrap();
        assert_eq!(config.draws(), 20);
        let mut rng = seed::rng(3);
        for _ in 0..100 {
            let row = sample_row(&config, &mut rng);
            assert!(row.len() <= 20 && !row.is_empty());
            assert_eq!(row.out_of_range(50), None);
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(SamplerConfig::new(3, 4, 0.1).is_err());
        assert!(SamplerConfig::new(10, 2, 1.0).is_err());
        assert!(SamplerConfig::with_replacement(10, 2, 0.1, 0.5).is_err());
    }
}
