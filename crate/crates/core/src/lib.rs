//! Auction-based allocation of intelligent reflecting surfaces (IRSs) among
//! non-cooperative operators.
//!
//! The crate simulates a multi-operator downlink in which each operator runs
//! its BSs on its own band. An IRS can only be tuned for one band, so IRSs are
//! shared resources: an operator that holds an IRS designs its phases, every
//! other operator sees it as a fixed (identity) reflector.
//!
//! * [`topology`] / [`channel`]: deployment geometry and Rayleigh channels.
//! * [`link`]: combined channels, zero-forcing precoding, SINR, rate gains and
//!   per-IRS valuations.
//! * [`auction`]: successive advance and simultaneous multi-round auctions.
//! * [`baselines`]: exhaustive search and random allocation.
//! * [`harness`]: Monte Carlo experiments, CSV output and summaries.

pub mod auction;
pub mod baselines;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod link;
pub mod rng;
pub mod topology;

pub use auction::{
    run_simultaneous_multiround, run_successive_advance, Allocation, AuctionOptions, AuctionOutcome,
    AuctionTrace, ValuationTable,
};
pub use baselines::{exhaustive_search, random_allocation, AllocationScore};
pub use channel::{generate_channels, ChannelSet};
pub use config::{GeometryParams, NetworkConfig};
pub use error::{Error, Result};
pub use harness::scenario::Scenario;
pub use link::{LinkEvaluator, LinkOptions, TunableSet};
pub use topology::{generate_topology, path_loss_linear, Topology};
