//! Seeded Monte Carlo campaigns over the recovery schemes.
//!
//! Trial `k` uses the seed `split(seed, k)`. The instance is drawn from
//! stream 0 of that seed and the scheme gets stream 1, so a trial can be
//! replayed on its own from the seed in its record.

mod output;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use output::{emit_results, parse_csv, parse_json, write_csv, write_json, OutputFormat};

use crate::adaptive::{adaptive_general, adaptive_m2};
use crate::analysis::lower_bound;
use crate::disjunct::{algorithm1_decode, build_disjunct, verification_work, DisjunctCertificate, DEFAULT_VERIFY_CAP};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::randomized::{
    las_vegas_run_with, nonadaptive_run_with, three_stage_run_with, two_stage_run_with, SchemeConfig,
};
use crate::seed;
use crate::session::Session;

/// Caps the worker threads of a campaign.
pub const THREADS_ENV: &str = "CONCGT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    DetNonadaptive,
    Adaptive2,
    AdaptiveM,
    Rand1,
    Rand2,
    Rand3,
    LasVegas,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::DetNonadaptive,
        Scheme::Adaptive2,
        Scheme::AdaptiveM,
        Scheme::Rand1,
        Scheme::Rand2,
        Scheme::Rand3,
        Scheme::LasVegas,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::DetNonadaptive => "det-nonadaptive",
            Scheme::Adaptive2 => "adaptive2",
            Scheme::AdaptiveM => "adaptive-m",
            Scheme::Rand1 => "rand1",
            Scheme::Rand2 => "rand2",
            Scheme::Rand3 => "rand3",
            Scheme::LasVegas => "las-vegas",
        }
    }

    /// Randomized schemes assume the set sizes are known exactly.
    pub fn is_randomized(self) -> bool {
        matches!(self, Scheme::Rand1 | Scheme::Rand2 | Scheme::Rand3 | Scheme::LasVegas)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceMode {
    /// Uniform disjoint sets with exactly the given sizes.
    Exact,
    /// Each size uniform in `1..=s_i`, then as `Exact`.
    AtMost,
    /// The same instance in every trial.
    Fixed(Instance),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub scheme: Scheme,
    pub n: usize,
    pub sizes: Vec<usize>,
    /// Error probability for the Monte Carlo schemes, per-attempt failure
    /// bound for Las Vegas. Ignored by the deterministic schemes.
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub instance_mode: InstanceMode,
    /// Measure wall time per trial. Off keeps output byte-reproducible.
    pub timing: bool,
    pub config: SchemeConfig,
}

impl Campaign {
    pub fn new(scheme: Scheme, n: usize, sizes: &[usize], epsilon: f64, trials: usize, seed: u64) -> Self {
        Self {
            scheme,
            n,
            sizes: sizes.to_vec(),
            epsilon,
            trials,
            seed,
            instance_mode: InstanceMode::Exact,
            timing: false,
            config: SchemeConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        crate::instance::validate_sizes(self.n, &self.sizes).map_err(|e| Error::Config(e.to_string()))?;
        if self.scheme != Scheme::AdaptiveM && self.sizes.len() != 2 {
            return Err(Error::Config(format!(
                "{} needs exactly two sizes, got {}",
                self.scheme,
                self.sizes.len()
            )));
        }
        if self.scheme.is_randomized() {
            if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
                return Err(Error::Config(format!(
                    "{} needs an error probability in (0,1)",
                    self.scheme
                )));
            }
            if self.instance_mode == InstanceMode::AtMost {
                return Err(Error::Config(format!("{} assumes exact set sizes", self.scheme)));
            }
        }
        if let InstanceMode::Fixed(instance) = &self.instance_mode {
            if instance.n() != self.n || instance.m() != self.sizes.len() {
                return Err(Error::Config(
                    "instance file does not match n and the number of sizes".into(),
                ));
            }
            let mut have = instance.sizes();
            let mut bound = self.sizes.clone();
            have.sort_unstable();
            bound.sort_unstable();
            let fits = if self.scheme.is_randomized() {
                have == bound
            } else {
                have.iter().zip(&bound).all(|(h, b)| h <= b)
            };
            if !fits {
                return Err(Error::Config(format!(
                    "instance sizes {have:?} do not fit {:?}",
                    self.sizes
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub run_id: usize,
    pub scheme: String,
    pub n: usize,
    #[serde(with = "output::sizes_field")]
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub tests_used: usize,
    pub stages_used: usize,
    pub succeeded: bool,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scheme: String,
    pub n: usize,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub mean_tests: f64,
    pub max_tests: usize,
    pub mean_stages: f64,
    pub max_stages: usize,
    pub mean_attempts: f64,
    /// Standard error of the attempt count.
    pub attempts_stderr: f64,
    pub over_budget_trials: usize,
    pub lower_bound_bits: f64,
    /// Rows of the shared design (det-nonadaptive only).
    pub design_rows: Option<usize>,
    pub design_verified: Option<bool>,
    pub prng: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

/// 95% Wilson score interval.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    wilson_interval_z(successes, trials, 1.959_963_984_540_054)
}

pub fn wilson_interval_z(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

struct Outcome {
    record: TrialRecord,
    attempts: usize,
    over_budget: bool,
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&k: &usize| k > 0)
}

pub fn run_campaign(campaign: &Campaign) -> Result<CampaignOutput> {
    campaign.validate()?;
    let certificate = match campaign.scheme {
        Scheme::DetNonadaptive => Some(campaign_certificate(campaign)?),
        _ => None,
    };
    let run = |k: usize| run_trial(campaign, certificate.as_ref(), k);
    let results: Vec<Result<Outcome>> = match thread_cap() {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            pool.install(|| (0..campaign.trials).into_par_iter().map(run).collect())
        }
        None => (0..campaign.trials).into_par_iter().map(run).collect(),
    };
    let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = summarize(campaign, certificate.as_ref(), &outcomes)?;
    Ok(CampaignOutput {
        records: outcomes.into_iter().map(|o| o.record).collect(),
        summary,
    })
}

/// One design for the whole campaign, verified when that is affordable.
fn campaign_certificate(campaign: &Campaign) -> Result<DisjunctCertificate> {
    let v = campaign.sizes.iter().copied().max().unwrap_or(1);
    let verify = verification_work(campaign.n, 2, v) <= DEFAULT_VERIFY_CAP;
    build_disjunct(campaign.n, 2, v, seed::split(campaign.seed, u64::MAX), verify)
}

fn trial_instance(campaign: &Campaign, rng: &mut impl Rng) -> Result<Instance> {
    match &campaign.instance_mode {
        InstanceMode::Exact => Instance::sample_exact(campaign.n, &campaign.sizes, rng),
        InstanceMode::AtMost => Instance::sample_at_most(campaign.n, &campaign.sizes, rng),
        InstanceMode::Fixed(instance) => Ok(instance.clone()),
    }
}

fn run_trial(campaign: &Campaign, certificate: Option<&DisjunctCertificate>, k: usize) -> Result<Outcome> {
    let trial_seed = seed::split(campaign.seed, k as u64);
    let instance = trial_instance(campaign, &mut seed::rng(seed::split(trial_seed, 0)))?;
    let scheme_seed = seed::split(trial_seed, 1);
    let started = campaign.timing.then(Instant::now);
    let mut session = Session::new(&instance);
    let sizes = &campaign.sizes;
    let (s1, s2) = (sizes[0], sizes.get(1).copied().unwrap_or(0));
    let eps = campaign.epsilon;
    let config = &campaign.config;
    let result = match campaign.scheme {
        Scheme::DetNonadaptive => {
            algorithm1_decode(&mut session, certificate.expect("certificate built for this scheme"))?
        }
        Scheme::Adaptive2 => adaptive_m2(&mut session, s1, s2, scheme_seed)?,
        Scheme::AdaptiveM => adaptive_general(&mut session, sizes, scheme_seed)?,
        Scheme::Rand1 => nonadaptive_run_with(&mut session, s1, s2, eps, config, scheme_seed)?,
        Scheme::Rand2 => two_stage_run_with(&mut session, s1, s2, eps, config, scheme_seed)?,
        Scheme::Rand3 => three_stage_run_with(&mut session, s1, s2, eps, config, scheme_seed)?,
        Scheme::LasVegas => las_vegas_run_with(&mut session, s1, s2, eps, config, scheme_seed)?,
    };
    let wall_time_ms = started.map_or(0, |t| t.elapsed().as_millis() as u64);
    Ok(Outcome {
        record: TrialRecord {
            run_id: k,
            scheme: campaign.scheme.name().to_string(),
            n: campaign.n,
            sizes: sizes.clone(),
            seed: trial_seed,
            tests_used: result.tests_used,
            stages_used: result.stages_used,
            succeeded: result.succeeded,
            wall_time_ms,
        },
        attempts: result.attempts,
        over_budget: result.over_budget,
    })
}

fn summarize(campaign: &Campaign, certificate: Option<&DisjunctCertificate>, outcomes: &[Outcome]) -> Result<Summary> {
    let trials = outcomes.len();
    let t = trials as f64;
    let successes = outcomes.iter().filter(|o| o.record.succeeded).count();
    let (wilson_low, wilson_high) = wilson_interval(successes, trials);
    let mean = |f: &dyn Fn(&Outcome) -> usize| outcomes.iter().map(|o| f(o) as f64).sum::<f64>() / t;
    let mean_attempts = mean(&|o| o.attempts);
    let variance = if trials > 1 {
        outcomes
            .iter()
            .map(|o| (o.attempts as f64 - mean_attempts).powi(2))
            .sum::<f64>()
            / (t - 1.0)
    } else {
        0.0
    };
    Ok(Summary {
        scheme: campaign.scheme.name().to_string(),
        n: campaign.n,
        sizes: campaign.sizes.clone(),
        trials,
        successes,
        success_rate: successes as f64 / t,
        wilson_low,
        wilson_high,
        mean_tests: mean(&|o| o.record.tests_used),
        max_tests: outcomes.iter().map(|o| o.record.tests_used).max().unwrap_or(0),
        mean_stages: mean(&|o| o.record.stages_used),
        max_stages: outcomes.iter().map(|o| o.record.stages_used).max().unwrap_or(0),
        mean_attempts,
        attempts_stderr: (variance / t).sqrt(),
        over_budget_trials: outcomes.iter().filter(|o| o.over_budget).count(),
        lower_bound_bits: lower_bound(campaign.n, &campaign.sizes)?,
        design_rows: certificate.map(|c| c.matrix.t()),
        design_verified: certificate.map(|c| c.verified),
        prng: seed::PRNG_NAME.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for scheme in Scheme::ALL {
            assert_eq!(scheme.name().parse::<Scheme>().unwrap(), scheme);
        }
        assert!("rand4".parse::<Scheme>().is_err());
    }

    #[test]
    fn wilson_values() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        let (lo, hi) = wilson_interval(100, 100);
        assert!(lo > 0.96 && hi == 1.0);
    }

    #[test]
    fn size_mismatch_is_config_error() {
        let c = Campaign::new(Scheme::Adaptive2, 20, &[1, 1, 1], 0.1, 5, 0);
        assert!(matches!(run_campaign(&c), Err(Error::Config(_))));
        let c = Campaign::new(Scheme::Rand2, 20, &[1, 1], 0.1, 0, 0);
        assert!(matches!(run_campaign(&c), Err(Error::Config(_))));
        let mut c = Campaign::new(Scheme::Rand3, 20, &[1, 1], 0.1, 5, 0);
        c.instance_mode = InstanceMode::AtMost;
        assert!(matches!(run_campaign(&c), Err(Error::Config(_))));
    }

    #[test]
    fn deterministic_records() {
        let c = Campaign::new(Scheme::Rand3, 200, &[2, 3], 0.1, 20, 42);
        let a = run_campaign(&c).unwrap();
        let b = run_campaign(&c).unwrap();
        assert_eq!(a.records, b.records);
        assert!(a.records.iter().enumerate().all(|(k, r)| r.run_id == k));
    }

    #[test]
    fn every_scheme_runs() {
        for scheme in Scheme::ALL {
            let sizes: &[usize] = if scheme == Scheme::AdaptiveM {
                &[2, 1, 1]
            } else {
                &[2, 2]
            };
            let c = Campaign::new(scheme, 12, sizes, 0.2, 4, 1);
            let out = run_campaign(&c).unwrap();
            assert_eq!(out.records.len(), 4);
            if !scheme.is_randomized() {
                assert_eq!(out.summary.successes, 4, "{scheme}");
            }
        }
    }

    #[test]
    fn fixed_instance_mode() {
        let instance = Instance::from_vecs(30, &[&[1, 2], &[7]]).unwrap();
        let mut c = Campaign::new(Scheme::Adaptive2, 30, &[2, 2], 0.1, 3, 5);
        c.instance_mode = InstanceMode::Fixed(instance);
        assert_eq!(run_campaign(&c).unwrap().summary.successes, 3);
    }
}
