//! Exhaustive-search upper bound and uniformly random allocation.

use rand::Rng;
use serde::Serialize;

use crate::auction::Allocation;
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::link::LinkEvaluator;

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 100_000;

/// An allocation together with its objective value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationScore {
    pub allocation: Allocation,
    pub total_gain: f64,
    pub operator_gains: Vec<f64>,
    /// Number of candidate allocations whose objective was evaluated.
    pub evaluations: u128,
}

/// Objective of `allocation`: summed per-operator sum-rate gains.
pub fn score_allocation(ev: &LinkEvaluator<'_>, allocation: &Allocation) -> Result<AllocationScore> {
    let operator_gains = ev.operator_gains(&allocation.tunable_sets())?;
    Ok(AllocationScore {
        allocation: allocation.clone(),
        total_gain: operator_gains.iter().sum(),
        operator_gains,
        evaluations: 1,
    })
}

/// `S^L`, or `None` when it overflows.
pub fn enumeration_size(num_operators: usize, num_irs: usize) -> Option<u128> {
    (num_operators as u128).checked_pow(num_irs as u32)
}

/// Best full allocation (every IRS to exactly one operator) by enumeration of
/// all `S^L` candidates in lexicographic order of owners; the first maximizer
/// wins ties.
pub fn exhaustive_search(ev: &LinkEvaluator<'_>, budget: u128) -> Result<AllocationScore> {
    let cfg = ev.config();
    let (s_count, l_count) = (cfg.num_operators, cfg.num_irs);
    let required = enumeration_size(s_count, l_count).unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }

    // Gains only depend on the operator's own tunable set, so tabulate g_s
    // over all 2^L sets once; each candidate is then a sum of S lookups.
    let tables: Vec<Vec<f64>> = (0..s_count).map(|s| ev.gain_table(s)).collect::<Result<_>>()?;

    let mut owners = vec![0usize; l_count];
    let mut best: Option<(Vec<usize>, Vec<f64>, f64)> = None;
    let mut evaluations = 0u128;
    loop {
        let mut masks = vec![0u64; s_count];
        for (l, &s) in owners.iter().enumerate() {
            masks[s] |= 1 << l;
        }
        let gains: Vec<f64> = (0..s_count).map(|s| tables[s][masks[s] as usize]).collect();
        let total: f64 = gains.iter().sum();
        evaluations += 1;
        if best.as_ref().is_none_or(|(_, _, b)| total > *b) {
            best = Some((owners.clone(), gains, total));
        }

        // Odometer with IRS 0 as the most significant digit.
        let mut pos = l_count;
        loop {
            if pos == 0 {
                let (owners, operator_gains, total_gain) = best.expect("at least one candidate");
                let allocation =
                    Allocation::from_owners(owners.into_iter().map(Some).collect(), s_count)?;
                return Ok(AllocationScore {
                    allocation,
                    total_gain,
                    operator_gains,
                    evaluations,
                });
            }
            pos -= 1;
            owners[pos] += 1;
            if owners[pos] < s_count {
                break;
            }
            owners[pos] = 0;
        }
    }
}

/// Each IRS independently and uniformly to one operator.
pub fn random_allocation<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Allocation {
    let owners = (0..config.num_irs)
        .map(|_| Some(rng.random_range(0..config.num_operators)))
        .collect();
    Allocation::from_owners(owners, config.num_operators).expect("owners drawn in range")
}
