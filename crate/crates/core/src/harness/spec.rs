//! Experiment description, loaded from TOML with `key=value` overrides.
//!
//! ```toml
//! seed = 1
//! trials = 200
//! methods = ["successive", "simultaneous", "exhaustive", "random"]
//!
//! [sweep]
//! variable = "elements_per_irs"
//! values = [8, 16, 32]
//!
//! [network]
//! num_operators = 2
//! # ... every NetworkConfig field, plus an optional [network.geometry] table
//!
//! [auction]   # optional
//! kappa = 0.3
//!
//! [link]      # optional
//! identity_fallback = true
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::auction::AuctionOptions;
use crate::baselines::DEFAULT_ENUMERATION_BUDGET;
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::link::LinkOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Successive,
    Simultaneous,
    Exhaustive,
    Random,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Successive,
        Method::Simultaneous,
        Method::Exhaustive,
        Method::Random,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Successive => "successive",
            Method::Simultaneous => "simultaneous",
            Method::Exhaustive => "exhaustive",
            Method::Random => "random",
        }
    }

    pub fn is_auction(&self) -> bool {
        matches!(self, Method::Successive | Method::Simultaneous)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| Error::InvalidSpec(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    ElementsPerIrs,
    NumIrs,
    Kappa,
}

impl SweepVar {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVar::ElementsPerIrs => "elements_per_irs",
            SweepVar::NumIrs => "num_irs",
            SweepVar::Kappa => "kappa",
        }
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SweepVar::ElementsPerIrs, SweepVar::NumIrs, SweepVar::Kappa]
            .into_iter()
            .find(|v| v.as_str() == s.trim())
            .ok_or_else(|| Error::InvalidSpec(format!("unknown sweep variable '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVar,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Desk,
    Paper,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => Err(Error::InvalidSpec(format!("unknown preset '{other}'"))),
        }
    }
}

fn default_budget() -> u64 {
    DEFAULT_ENUMERATION_BUDGET as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub seed: u64,
    pub trials: usize,
    pub methods: Vec<Method>,
    #[serde(default = "default_budget")]
    pub exhaustive_budget: u64,
    pub sweep: Sweep,
    pub network: NetworkConfig,
    #[serde(default)]
    pub auction: AuctionOptions,
    #[serde(default)]
    pub link: LinkOptions,
}

impl ExperimentSpec {
    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::Desk => Self {
                seed: 1,
                trials: 200,
                methods: Method::ALL.to_vec(),
                exhaustive_budget: default_budget(),
                sweep: Sweep {
                    variable: SweepVar::ElementsPerIrs,
                    values: vec![16.0],
                },
                network: NetworkConfig::desk(),
                auction: AuctionOptions::default(),
                link: LinkOptions::default(),
            },
            Preset::Paper => Self {
                seed: 1,
                trials: 200,
                methods: Method::ALL.to_vec(),
                exhaustive_budget: default_budget(),
                sweep: Sweep {
                    variable: SweepVar::ElementsPerIrs,
                    values: vec![16.0, 32.0, 64.0],
                },
                network: NetworkConfig::paper(),
                auction: AuctionOptions::default(),
                link: LinkOptions::default(),
            },
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Parses `text`, then applies `key.path=value` overrides before validation.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            Error::InvalidSpec(format!("cannot parse spec: {e}"))
        })?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let spec: ExperimentSpec = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    /// Same spec with `key.path=value` overrides applied.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        Self::from_toml_with_overrides(&self.to_toml()?, overrides)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Network and auction settings at sweep point `value`.
    pub fn point(&self, value: f64) -> Result<(NetworkConfig, AuctionOptions)> {
        let mut network = self.network.clone();
        let mut auction = self.auction;
        let as_count = |v: f64| -> Result<usize> {
            if v.fract() == 0.0 && v >= 1.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidSpec(format!(
                    "{} needs positive integer sweep values, got {v}",
                    self.sweep.variable.as_str()
                )))
            }
        };
        match self.sweep.variable {
            SweepVar::ElementsPerIrs => network.elements_per_irs = as_count(value)?,
            SweepVar::NumIrs => network.num_irs = as_count(value)?,
            SweepVar::Kappa => auction.kappa = Some(value),
        }
        network.validate()?;
        auction.kappa_for(network.num_operators)?;
        Ok((network, auction))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidSpec("trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidSpec("at least one method is required".into()));
        }
        let values = &self.sweep.values;
        if values.is_empty() {
            return Err(Error::InvalidSpec("sweep needs at least one value".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidSpec("sweep values must be positive".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec("sweep values must be strictly increasing".into()));
        }
        if !(self.auction.min_increment_rel >= 0.0 && self.auction.min_increment_rel.is_finite()) {
            return Err(Error::InvalidSpec("auction.min_increment_rel must be >= 0".into()));
        }
        for &v in values {
            self.point(v)?;
        }
        Ok(())
    }
}

/// Sets `path` (dot separated) in `table` to `raw`, parsed as a TOML value
/// when possible and as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::InvalidSpec(format!("override '{assignment}' is not key=value")))?;
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let keys: Vec<&str> = path.trim().split('.').collect();
    let (last, parents) = keys.split_last().expect("split yields at least one item");
    let mut cur = table;
    for key in parents {
        cur = cur
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::InvalidSpec(format!("'{key}' in '{path}' is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
