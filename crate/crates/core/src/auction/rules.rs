//! Profit, bid and winner rules shared by both mechanisms.

use super::{Allocation, ValuationTable};

/// `max(nu[l][s] - price[l], 0)`.
pub fn profit(nu: &ValuationTable, prices: &[f64], irs: usize, operator: usize) -> f64 {
    (nu.get(irs, operator) - prices[irs]).max(0.0)
}

/// Advance bid `price + kappa * (target - price)`, where `target` is the
/// bidder's profit (or valuation, under [`super::BidRule::Valuation`]).
pub fn successive_bid(target: f64, price: f64, kappa: f64) -> f64 {
    price + kappa * (target - price)
}

/// Mean profit of `operator` over all IRSs.
pub fn average_profit(nu: &ValuationTable, prices: &[f64], operator: usize) -> f64 {
    let total: f64 = (0..nu.num_irs()).map(|l| profit(nu, prices, l, operator)).sum();
    total / nu.num_irs() as f64
}

/// Each IRS goes to the operator whose standing bid equals its price; the
/// lowest operator index wins ties. IRSs without a positive price stay
/// unallocated.
pub fn allocate(bids: &[Vec<f64>], prices: &[f64]) -> Allocation {
    let num_operators = bids.first().map_or(0, Vec::len);
    let mut a = Allocation::empty(bids.len(), num_operators);
    for (l, (row, &price)) in bids.iter().zip(prices).enumerate() {
        if price > 0.0 {
            a.set_owner(l, row.iter().position(|&b| b == price));
        }
    }
    a
}
