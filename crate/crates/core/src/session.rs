//! Metered access to the test oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, ItemSet};
use crate::pool::Pool;

/// One test as it was run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    /// 1-based index of the stage the test belonged to.
    pub stage: usize,
    pub pool: Pool,
    pub outcome: bool,
}

/// The only path from a scheme to test outcomes. Counts tests and stages and
/// keeps a replayable ledger.
#[derive(Debug)]
pub struct Session<'a> {
    instance: &'a Instance,
    tests_used: usize,
    stages_used: usize,
    ledger: Vec<LedgerEntry>,
}

impl<'a> Session<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Self {
            instance,
            tests_used: 0,
            stages_used: 0,
            ledger: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.instance.n()
    }

    pub fn tests_used(&self) -> usize {
        self.tests_used
    }

    pub fn stages_used(&self) -> usize {
        self.stages_used
    }

    pub fn ledger(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    /// Runs one stage of tests. Outcomes are returned in pool order. On error
    /// nothing is recorded.
    pub fn run_stage(&mut self, pools: Vec<Pool>) -> Result<Vec<bool>> {
        if pools.is_empty() {
            return Err(Error::EmptyStage);
        }
        let n = self.instance.n();
        if let Some(item) = pools.iter().find_map(|p| p.out_of_range(n)) {
            return Err(Error::InvalidPool { item, n });
        }
        self.stages_used += 1;
        self.tests_used += pools.len();
        let stage = self.stages_used;
        let mut outcomes = Vec::with_capacity(pools.len());
        self.ledger.reserve(pools.len());
        for pool in pools {
            let outcome = self.instance.outcome(&pool);
            outcomes.push(outcome);
            self.ledger.push(LedgerEntry { stage, pool, outcome });
        }
        Ok(outcomes)
    }

    /// Scores a recovered family against the ground truth.
    pub fn finish(&self, recovered: Vec<ItemSet>) -> RecoveryResult {
        let succeeded = compare_up_to_permutation(&recovered, self.instance.sets());
        RecoveryResult {
            recovered,
            tests_used: self.tests_used,
            stages_used: self.stages_used,
            succeeded,
            attempts: 1,
            over_budget: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryResult {
    /// Empty when the decoder gave up.
    pub recovered: Vec<ItemSet>,
    pub tests_used: usize,
    pub stages_used: usize,
    /// True iff `recovered` equals the hidden family up to permutation.
    pub succeeded: bool,
    /// Number of separation attempts (Las Vegas); 1 elsewhere.
    pub attempts: usize,
    /// Some recovered set exceeded the cardinality bound handed to a
    /// subroutine. Recovery is still exact in that case.
    pub over_budget: bool,
}

/// True iff the two families are equal as multisets of sets.
pub fn compare_up_to_permutation(recovered: &[ItemSet], truth: &[ItemSet]) -> bool {
    if recovered.len() != truth.len() {
        return false;
    }
    let mut a: Vec<&ItemSet> = recovered.iter().collect();
    let mut b: Vec<&ItemSet> = truth.iter().collect();
    a.sort();
    b.sort();
    a == b
}
