//! Ascending-price auctions that hand each IRS to at most one operator.
//!
//! Both mechanisms work on a precomputed [`ValuationTable`]; neither queries
//! the physical layer while bidding.

pub mod rules;
pub mod simultaneous;
pub mod successive;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{LinkEvaluator, TunableSet};

pub use rules::{allocate, average_profit, profit, successive_bid};
pub use simultaneous::run_simultaneous_multiround;
pub use successive::run_successive_advance;

/// `nu[l][s]`: value of IRS `l` to operator `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationTable {
    num_irs: usize,
    num_operators: usize,
    nu: Vec<f64>,
    /// Valuation-oracle calls spent building the table.
    oracle_calls: usize,
}

impl ValuationTable {
    pub fn new(num_irs: usize, num_operators: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if num_irs == 0 || num_operators == 0 {
            return Err(Error::InvalidValuations("table must be at least 1x1".into()));
        }
        if rows.len() != num_irs || rows.iter().any(|r| r.len() != num_operators) {
            return Err(Error::InvalidValuations(format!(
                "expected {num_irs} rows of {num_operators} valuations"
            )));
        }
        let nu: Vec<f64> = rows.into_iter().flatten().collect();
        if nu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValuations("valuations must be finite".into()));
        }
        Ok(Self {
            num_irs,
            num_operators,
            nu,
            oracle_calls: 0,
        })
    }

    /// Builds the table by querying the evaluator once per (IRS, operator) pair.
    pub fn from_evaluator(ev: &LinkEvaluator<'_>) -> Result<Self> {
        let cfg = ev.config();
        let (l_count, s_count) = (cfg.num_irs, cfg.num_operators);
        let mut rows = vec![vec![0.0; s_count]; l_count];
        for (l, row) in rows.iter_mut().enumerate() {
            for (s, v) in row.iter_mut().enumerate() {
                *v = ev.valuation(s, l)?;
            }
        }
        let mut table = Self::new(l_count, s_count, rows)?;
        table.oracle_calls = l_count * s_count;
        Ok(table)
    }

    pub fn num_irs(&self) -> usize {
        self.num_irs
    }

    pub fn num_operators(&self) -> usize {
        self.num_operators
    }

    pub fn get(&self, irs: usize, operator: usize) -> f64 {
        self.nu[irs * self.num_operators + operator]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.nu.chunks(self.num_operators).map(|r| r.to_vec()).collect()
    }

    pub fn oracle_calls(&self) -> usize {
        self.oracle_calls
    }

    pub fn max_abs(&self) -> f64 {
        self.nu.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Same table with every valuation multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            nu: self.nu.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }
}

/// Owner of each IRS; `None` marks an IRS nobody bid on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Allocation {
    num_operators: usize,
    owner: Vec<Option<usize>>,
}

impl Allocation {
    pub fn empty(num_irs: usize, num_operators: usize) -> Self {
        Self {
            num_operators,
            owner: vec![None; num_irs],
        }
    }

    pub fn from_owners(owner: Vec<Option<usize>>, num_operators: usize) -> Result<Self> {
        if let Some(s) = owner.iter().flatten().find(|&&s| s >= num_operators) {
            return Err(Error::Dimension(format!("owner {s} out of range")));
        }
        Ok(Self {
            num_operators,
            owner,
        })
    }

    pub fn num_irs(&self) -> usize {
        self.owner.len()
    }

    pub fn num_operators(&self) -> usize {
        self.num_operators
    }

    pub fn owner(&self, irs: usize) -> Option<usize> {
        self.owner[irs]
    }

    pub fn owners(&self) -> &[Option<usize>] {
        &self.owner
    }

    pub(crate) fn set_owner(&mut self, irs: usize, owner: Option<usize>) {
        self.owner[irs] = owner;
    }

    /// Every IRS has exactly one owner.
    pub fn is_full(&self) -> bool {
        self.owner.iter().all(Option::is_some)
    }

    pub fn unallocated(&self) -> impl Iterator<Item = usize> + '_ {
        self.owner.iter().enumerate().filter(|(_, o)| o.is_none()).map(|(l, _)| l)
    }

    /// `A` as an `L x S` 0/1 matrix.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        self.owner
            .iter()
            .map(|o| (0..self.num_operators).map(|s| u8::from(*o == Some(s))).collect())
            .collect()
    }

    pub fn tunable_set(&self, operator: usize) -> TunableSet {
        TunableSet::from_indices(
            self.owner
                .iter()
                .enumerate()
                .filter(|(_, o)| **o == Some(operator))
                .map(|(l, _)| l),
        )
    }

    pub fn tunable_sets(&self) -> Vec<TunableSet> {
        (0..self.num_operators).map(|s| self.tunable_set(s)).collect()
    }
}

/// How a successive-advance bid is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BidRule {
    /// `price + kappa * (profit - price)`.
    #[default]
    Profit,
    /// `price + kappa * (valuation - price)`.
    Valuation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PriceRule {
    /// Standing bids are each operator's highest bid and the price never falls.
    #[default]
    Monotone,
    /// Standing bids are each operator's latest bid; the price is their maximum
    /// and may fall.
    Latest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuctionOptions {
    /// Bidding coefficient in (0, 1); `None` means `1 / S`.
    pub kappa: Option<f64>,
    pub bid_rule: BidRule,
    pub price_rule: PriceRule,
    /// Smallest price raise worth bidding, relative to the largest |valuation|.
    pub min_increment_rel: f64,
    /// Round caps; `None` uses `10 L S` (successive) and 100 (simultaneous).
    pub successive_round_cap: Option<usize>,
    pub simultaneous_round_cap: Option<usize>,
}

impl Default for AuctionOptions {
    fn default() -> Self {
        Self {
            kappa: None,
            bid_rule: BidRule::Profit,
            price_rule: PriceRule::Monotone,
            min_increment_rel: 1e-4,
            successive_round_cap: None,
            simultaneous_round_cap: None,
        }
    }
}

impl AuctionOptions {
    pub fn with_kappa(kappa: f64) -> Self {
        Self {
            kappa: Some(kappa),
            ..Self::default()
        }
    }

    pub fn kappa_for(&self, num_operators: usize) -> Result<f64> {
        let kappa = self.kappa.unwrap_or(1.0 / num_operators as f64);
        if !(kappa > 0.0 && kappa < 1.0) && !(num_operators == 1 && self.kappa.is_none()) {
            return Err(Error::InvalidConfig(format!("kappa must lie in (0, 1), got {kappa}")));
        }
        Ok(kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    SuccessiveAdvance,
    SimultaneousMultiRound,
}

/// Snapshot taken at the end of a round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// `bids[l][s]`, standing bids after the round.
    pub bids: Vec<Vec<f64>>,
    pub prices: Vec<f64>,
    pub allocation: Vec<Option<usize>>,
    /// Bids submitted in this round as `(irs, operator, bid)`.
    pub submitted: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionTrace {
    pub mechanism: Mechanism,
    pub rounds: Vec<RoundRecord>,
    pub oracle_calls: usize,
    pub converged: bool,
    pub round_cap: usize,
}

impl AuctionTrace {
    pub fn rounds_used(&self) -> usize {
        self.rounds.len()
    }

    /// One JSON object per round.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.rounds {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn prices_non_decreasing(&self) -> bool {
        self.rounds.windows(2).all(|w| {
            w[0].prices.iter().zip(&w[1].prices).all(|(a, b)| b >= a)
        }) && self
            .rounds
            .first()
            .is_none_or(|r| r.prices.iter().all(|&p| p >= 0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuctionOutcome {
    pub allocation: Allocation,
    pub prices: Vec<f64>,
    pub trace: AuctionTrace,
}

impl AuctionOutcome {
    pub fn converged(&self) -> bool {
        self.trace.converged
    }

    pub fn rounds(&self) -> usize {
        self.trace.rounds_used()
    }
}

/// Standing bids and prices shared by both mechanisms.
#[derive(Debug, Clone)]
pub(crate) struct Book {
    pub bids: Vec<Vec<f64>>,
    pub prices: Vec<f64>,
    pub rule: PriceRule,
}

impl Book {
    pub fn new(num_irs: usize, num_operators: usize, rule: PriceRule) -> Self {
        Self {
            bids: vec![vec![0.0; num_operators]; num_irs],
            prices: vec![0.0; num_irs],
            rule,
        }
    }

    pub fn submit(&mut self, submitted: &[(usize, usize, f64)]) {
        for &(l, s, b) in submitted {
            let slot = &mut self.bids[l][s];
            *slot = match self.rule {
                PriceRule::Monotone => slot.max(b),
                PriceRule::Latest => b,
            };
        }
        for (l, price) in self.prices.iter_mut().enumerate() {
            let top = self.bids[l].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            *price = match self.rule {
                PriceRule::Monotone => price.max(top),
                PriceRule::Latest => top,
            };
        }
    }

    pub fn record(&self, round: usize, allocation: &Allocation, submitted: Vec<(usize, usize, f64)>) -> RoundRecord {
        RoundRecord {
            round,
            bids: self.bids.clone(),
            prices: self.prices.clone(),
            allocation: allocation.owners().to_vec(),
            submitted,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_validation() {
        assert!(ValuationTable::new(2, 2, vec![vec![1.0, 2.0]]).is_err());
        assert!(ValuationTable::new(1, 2, vec![vec![1.0, f64::NAN]]).is_err());
        let t = ValuationTable::new(2, 2, vec![vec![1.0, -2.0], vec![3.0, 0.5]]).unwrap();
        assert_eq!(t.get(1, 0), 3.0);
        assert_eq!(t.max_abs(), 3.0);
        assert_eq!(t.scaled(2.0).get(0, 1), -4.0);
    }

    #[test]
    fn allocation_views() {
        let a = Allocation::from_owners(vec![Some(1), None, Some(0), Some(1)], 2).unwrap();
        assert_eq!(a.matrix(), vec![vec![0, 1], vec![0, 0], vec![1, 0], vec![0, 1]]);
        assert_eq!(a.tunable_set(1), TunableSet::from_indices([0, 3]));
        assert_eq!(a.unallocated().collect::<Vec<_>>(), vec![1]);
        assert!(!a.is_full());
        assert!(Allocation::from_owners(vec![Some(2)], 2).is_err());
    }

    #[test]
    fn kappa_defaults_to_inverse_operator_count() {
        assert_eq!(AuctionOptions::default().kappa_for(3).unwrap(), 1.0 / 3.0);
        assert!(AuctionOptions::with_kappa(1.0).kappa_for(2).is_err());
        assert!(AuctionOptions::with_kappa(0.0).kappa_for(2).is_err());
    }
}
