//! Simultaneous multi-round auction.
//!
//! Every round each operator computes its profits and their mean over all
//! IRSs, then bids `profit - mean` on every IRS whose profit exceeds the mean.
//! The auction stops once the allocation is unchanged from the previous round.

use super::rules::{allocate, average_profit, profit};
use super::{AuctionOptions, AuctionOutcome, AuctionTrace, Book, Mechanism, ValuationTable};
use crate::error::Result;

/// Relative margin by which a profit must exceed the mean to count as above
/// it; absorbs rounding in the mean of equal profits.
const ABOVE_MEAN_TOL: f64 = 1e-12;

pub fn run_simultaneous_multiround(
    nu: &ValuationTable,
    options: &AuctionOptions,
) -> Result<AuctionOutcome> {
    let (l_count, s_count) = (nu.num_irs(), nu.num_operators());
    let cap = options.simultaneous_round_cap.unwrap_or(100);

    let mut book = Book::new(l_count, s_count, options.price_rule);
    let mut allocation = allocate(&book.bids, &book.prices);
    let mut trace = AuctionTrace {
        mechanism: Mechanism::SimultaneousMultiRound,
        rounds: Vec::new(),
        oracle_calls: nu.oracle_calls(),
        converged: false,
        round_cap: cap,
    };

    for round in 1..=cap {
        let mut submitted = Vec::new();
        for s in 0..s_count {
            let mean = average_profit(nu, &book.prices, s);
            let profits: Vec<f64> = (0..l_count).map(|l| profit(nu, &book.prices, l, s)).collect();
            let scale = profits.iter().cloned().fold(0.0, f64::max);
            for (l, &rho) in profits.iter().enumerate() {
                if rho - mean > ABOVE_MEAN_TOL * scale {
                    submitted.push((l, s, rho - mean));
                }
            }
        }
        book.submit(&submitted);
        let next = allocate(&book.bids, &book.prices);
        trace.rounds.push(book.record(round, &next, submitted));
        let settled = next == allocation;
        allocation = next;
        if settled {
            trace.converged = true;
            break;
        }
    }

    Ok(AuctionOutcome {
        allocation,
        prices: book.prices,
        trace,
    })
}
