//! Trial runner and CSV persistence.
//!
//! A trial draws a scenario from its derived seed, builds the valuation table
//! once, runs every requested method, and scores each resulting allocation
//! after redesigning phases and precoders for it.

use std::io::{Read, Write};
use std::time::Instant;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use super::spec::{ExperimentSpec, Method};
use crate::auction::{
    run_simultaneous_multiround, run_successive_advance, AuctionOutcome, Mechanism, ValuationTable,
};
use crate::baselines::{exhaustive_search, random_allocation, score_allocation};
use crate::error::{Error, Result};
use crate::rng::{stream, trial_seed, Stream};

pub const CSV_COLUMNS: [&str; 9] = [
    "method",
    "sweep_var",
    "sweep_value",
    "trial",
    "seed",
    "total_gain",
    "rounds",
    "oracle_calls",
    "wall_ms",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub sweep_var: String,
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    /// NaN marks a skipped method.
    pub total_gain: f64,
    pub operator_gains: Vec<f64>,
    pub rounds: usize,
    /// Valuation-oracle calls for auctions, candidate evaluations for
    /// exhaustive search, zero for random allocation.
    pub oracle_calls: u64,
    pub wall_ms: f64,
    pub converged: bool,
    pub unallocated: usize,
}

impl ResultRow {
    pub fn is_skipped(&self) -> bool {
        self.total_gain.is_nan()
    }
}

/// Runs every (sweep value, trial, method) combination. Trials run in
/// parallel; row order is sweep value, then trial, then method as listed.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &value in &spec.sweep.values {
        let per_trial: Vec<Vec<ResultRow>> = (0..spec.trials)
            .into_par_iter()
            .map(|trial| run_trial(spec, value, trial))
            .collect::<Result<_>>()?;
        rows.extend(per_trial.into_iter().flatten());
    }
    Ok(rows)
}

pub fn run_trial(spec: &ExperimentSpec, sweep_value: f64, trial: usize) -> Result<Vec<ResultRow>> {
    let (mut config, auction) = spec.point(sweep_value)?;
    let seed = trial_seed(spec.seed, trial as u64);
    config.seed = seed;
    let scenario = Scenario::generate(&config)?;
    let ev = scenario.evaluator(spec.link)?;

    let row = |method: Method| ResultRow {
        method: method.to_string(),
        sweep_var: spec.sweep.variable.as_str().to_string(),
        sweep_value,
        trial,
        seed,
        total_gain: f64::NAN,
        operator_gains: Vec::new(),
        rounds: 0,
        oracle_calls: 0,
        wall_ms: 0.0,
        converged: true,
        unallocated: 0,
    };

    let mut valuation_ms = 0.0;
    let table = if spec.methods.iter().any(Method::is_auction) {
        let t0 = Instant::now();
        let table = ValuationTable::from_evaluator(&ev)?;
        valuation_ms = t0.elapsed().as_secs_f64() * 1e3;
        Some(table)
    } else {
        None
    };

    let mut rows = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let t0 = Instant::now();
        let mut r = row(method);
        match method {
            Method::Successive | Method::Simultaneous => {
                let table = table.as_ref().expect("valuations computed for auctions");
                let out = if method == Method::Successive {
                    run_successive_advance(table, &auction)?
                } else {
                    run_simultaneous_multiround(table, &auction)?
                };
                let score = score_allocation(&ev, &out.allocation)?;
                r.total_gain = score.total_gain;
                r.operator_gains = score.operator_gains;
                r.rounds = out.rounds();
                r.oracle_calls = out.trace.oracle_calls as u64;
                r.converged = out.converged();
                r.unallocated = out.allocation.unallocated().count();
                r.wall_ms = valuation_ms;
            }
            Method::Exhaustive => match exhaustive_search(&ev, spec.exhaustive_budget as u128) {
                Ok(score) => {
                    r.total_gain = score.total_gain;
                    r.operator_gains = score.operator_gains;
                    r.oracle_calls = score.evaluations as u64;
                }
                Err(Error::BudgetExceeded { required, budget }) => {
                    warn!(
                        "skipping exhaustive search at {}={sweep_value}, trial {trial}: \
                         needs {required} evaluations, budget {budget}",
                        spec.sweep.variable.as_str()
                    );
                }
                Err(e) => return Err(e),
            },
            Method::Random => {
                let alloc = random_allocation(&config, &mut stream(seed, Stream::RandomBaseline));
                let score = score_allocation(&ev, &alloc)?;
                r.total_gain = score.total_gain;
                r.operator_gains = score.operator_gains;
            }
        }
        r.wall_ms += t0.elapsed().as_secs_f64() * 1e3;
        rows.push(r);
    }
    Ok(rows)
}

/// Replays one auction of one trial, keeping its per-round trace.
pub fn trace_trial(
    spec: &ExperimentSpec,
    sweep_value: f64,
    trial: usize,
    mechanism: Mechanism,
) -> Result<AuctionOutcome> {
    let (mut config, auction) = spec.point(sweep_value)?;
    config.seed = trial_seed(spec.seed, trial as u64);
    let scenario = Scenario::generate(&config)?;
    let ev = scenario.evaluator(spec.link)?;
    let table = ValuationTable::from_evaluator(&ev)?;
    match mechanism {
        Mechanism::SuccessiveAdvance => run_successive_advance(&table, &auction),
        Mechanism::SimultaneousMultiRound => run_simultaneous_multiround(&table, &auction),
    }
}

/// Writes rows with the fixed column order of [`CSV_COLUMNS`]. Floats use the
/// shortest representation that parses back to the same bits.
pub fn write_rows_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.sweep_var.clone(),
            r.sweep_value.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.total_gain.to_string(),
            r.rounds.to_string(),
            r.oracle_calls.to_string(),
            format!("{:.3}", r.wall_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_rows_csv`]. Columns outside the CSV layout
/// come back empty or default.
pub fn read_rows_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != CSV_COLUMNS {
        return Err(Error::InvalidSpec(format!(
            "unexpected CSV header {:?}, expected {:?}",
            headers, CSV_COLUMNS
        )));
    }
    let parse_f = |s: &str, col: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::InvalidSpec(format!("bad {col} value '{s}'")))
    };
    let parse_u = |s: &str, col: &str| -> Result<u64> {
        s.parse()
            .map_err(|_| Error::InvalidSpec(format!("bad {col} value '{s}'")))
    };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        rows.push(ResultRow {
            method: rec[0].to_string(),
            sweep_var: rec[1].to_string(),
            sweep_value: parse_f(&rec[2], "sweep_value")?,
            trial: parse_u(&rec[3], "trial")? as usize,
            seed: parse_u(&rec[4], "seed")?,
            total_gain: parse_f(&rec[5], "total_gain")?,
            operator_gains: Vec::new(),
            rounds: parse_u(&rec[6], "rounds")? as usize,
            oracle_calls: parse_u(&rec[7], "oracle_calls")?,
            wall_ms: parse_f(&rec[8], "wall_ms")?,
            converged: true,
            unallocated: 0,
        });
    }
    Ok(rows)
}
