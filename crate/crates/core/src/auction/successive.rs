//! Successive advance auction.
//!
//! Every round each operator looks at the IRSs it does not currently hold,
//! keeps those whose advance bid would raise the price by at least the minimum
//! increment, and bids on the one with the largest profit (lowest index on
//! ties). Prices and winners are then updated from the standing bids. The
//! auction ends in the first round in which nobody bids.

use super::rules::{allocate, profit, successive_bid};
use super::{AuctionOptions, AuctionOutcome, AuctionTrace, BidRule, Book, Mechanism, ValuationTable};
use crate::error::Result;

pub fn run_successive_advance(nu: &ValuationTable, options: &AuctionOptions) -> Result<AuctionOutcome> {
    let (l_count, s_count) = (nu.num_irs(), nu.num_operators());
    let kappa = options.kappa_for(s_count)?;
    let min_raise = options.min_increment_rel * nu.max_abs();
    let cap = options.successive_round_cap.unwrap_or(10 * l_count * s_count);

    let mut book = Book::new(l_count, s_count, options.price_rule);
    let mut allocation = allocate(&book.bids, &book.prices);
    let mut trace = AuctionTrace {
        mechanism: Mechanism::SuccessiveAdvance,
        rounds: Vec::new(),
        oracle_calls: nu.oracle_calls(),
        converged: false,
        round_cap: cap,
    };

    for round in 1..=cap {
        let mut submitted = Vec::new();
        for s in 0..s_count {
            let mut best: Option<(usize, f64, f64)> = None;
            for l in 0..l_count {
                if allocation.owner(l) == Some(s) {
                    continue;
                }
                let rho = profit(nu, &book.prices, l, s);
                if rho <= 0.0 {
                    continue;
                }
                let price = book.prices[l];
                let target = match options.bid_rule {
                    BidRule::Profit => rho,
                    BidRule::Valuation => nu.get(l, s),
                };
                let bid = successive_bid(target, price, kappa);
                if bid - price <= min_raise || bid <= 0.0 {
                    continue;
                }
                if best.is_none_or(|(_, r, _)| rho > r) {
                    best = Some((l, rho, bid));
                }
            }
            if let Some((l, _, bid)) = best {
                submitted.push((l, s, bid));
            }
        }

        let quiet = submitted.is_empty();
        book.submit(&submitted);
        allocation = allocate(&book.bids, &book.prices);
        trace.rounds.push(book.record(round, &allocation, submitted));
        if quiet {
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
