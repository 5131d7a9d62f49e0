//! Python bindings: deployments, valuations, both auctions, baselines and the
//! experiment harness.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyInt};

use irs_auction_core::auction::{BidRule, PriceRule};
use irs_auction_core::baselines::{self, score_allocation, DEFAULT_ENUMERATION_BUDGET};
use irs_auction_core::harness::spec::apply_override;
use irs_auction_core::harness::{self, ExperimentSpec, Preset};
use irs_auction_core::rng::{stream, Stream};
use irs_auction_core::{
    Allocation, AuctionOptions, AuctionOutcome, Error, LinkOptions, TunableSet, ValuationTable,
};

create_exception!(irs_auction, IrsAuctionError, PyException);

fn to_py(e: Error) -> PyErr {
    IrsAuctionError::new_err(format!("{}: {e}", e.kind()))
}

/// Renders a Python scalar as a TOML literal for `apply_override`.
fn toml_literal(value: &Bound<'_, PyAny>) -> PyResult<String> {
    if value.is_instance_of::<PyBool>() {
        Ok(value.extract::<bool>()?.to_string())
    } else if value.is_instance_of::<PyInt>() {
        Ok(value.extract::<i64>()?.to_string())
    } else if value.is_instance_of::<PyFloat>() {
        Ok(format!("{:?}", value.extract::<f64>()?))
    } else {
        Ok(format!("{:?}", value.extract::<String>()?))
    }
}

fn overrides_from(kwargs: Option<&Bound<'_, PyDict>>, prefix: &str) -> PyResult<Vec<String>> {
    let mut out = Vec::new();
    if let Some(kw) = kwargs {
        for (k, v) in kw.iter() {
            out.push(format!("{prefix}{}={}", k.extract::<String>()?, toml_literal(&v)?));
        }
    }
    Ok(out)
}

/// Deployment and radio parameters.
#[pyclass(name = "NetworkConfig", module = "irs_auction", skip_from_py_object)]
#[derive(Clone)]
struct PyNetworkConfig {
    inner: irs_auction_core::NetworkConfig,
}

#[pymethods]
impl PyNetworkConfig {
    /// Starts from the "desk" or "paper" preset and applies keyword overrides,
    /// e.g. `NetworkConfig("desk", num_irs=3, seed=7)`.
    #[new]
    #[pyo3(signature = (preset = "desk", **kwargs))]
    fn new(preset: &str, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let base = match preset {
            "desk" => irs_auction_core::NetworkConfig::desk(),
            "paper" => irs_auction_core::NetworkConfig::paper(),
            other => return Err(IrsAuctionError::new_err(format!("unknown preset '{other}'"))),
        };
        Self { inner: base }.replace(kwargs)
    }

    /// Copy with keyword overrides; nested geometry keys use `geometry.<name>`
    /// via `replace(**{"geometry.bs_ring_radius_m": 80.0})`.
    #[pyo3(signature = (**kwargs))]
    fn replace(&self, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut table = toml::Table::try_from(&self.inner)
            .map_err(|e| to_py(Error::InvalidConfig(e.to_string())))?;
        for ov in overrides_from(kwargs, "")? {
            apply_override(&mut table, &ov).map_err(to_py)?;
        }
        let inner: irs_auction_core::NetworkConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| to_py(Error::InvalidConfig(e.to_string())))?;
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let inner: irs_auction_core::NetworkConfig =
            toml::from_str(text).map_err(|e| to_py(Error::InvalidConfig(e.to_string())))?;
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_toml(&self) -> PyResult<String> {
        toml::to_string(&self.inner).map_err(|e| to_py(Error::InvalidConfig(e.to_string())))
    }

    #[getter]
    fn num_operators(&self) -> usize {
        self.inner.num_operators
    }
    #[getter]
    fn bs_per_operator(&self) -> usize {
        self.inner.bs_per_operator
    }
    #[getter]
    fn users_per_bs(&self) -> usize {
        self.inner.users_per_bs
    }
    #[getter]
    fn num_irs(&self) -> usize {
        self.inner.num_irs
    }
    #[getter]
    fn elements_per_irs(&self) -> usize {
        self.inner.elements_per_irs
    }
    #[getter]
    fn tx_antennas(&self) -> usize {
        self.inner.tx_antennas
    }
    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }
    #[getter]
    fn noise_power_w(&self) -> f64 {
        self.inner.noise_power_w()
    }
    #[getter]
    fn tx_power_w(&self) -> f64 {
        self.inner.tx_power_w()
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "NetworkConfig(S={}, N_s={}, K={}, L={}, M={}, N_t={}, seed={})",
            c.num_operators, c.bs_per_operator, c.users_per_bs, c.num_irs, c.elements_per_irs,
            c.tx_antennas, c.seed
        )
    }
}

fn link_options(identity_fallback: bool) -> LinkOptions {
    LinkOptions { identity_fallback, ..LinkOptions::default() }
}

fn allocation_from(owners: Vec<Option<usize>>, num_operators: usize) -> PyResult<Allocation> {
    Allocation::from_owners(owners, num_operators).map_err(to_py)
}

/// One deployment and fading realization, fixed by `config.seed`.
#[pyclass(name = "Scenario", module = "irs_auction")]
struct PyScenario {
    inner: irs_auction_core::Scenario,
}

#[pymethods]
impl PyScenario {
    #[new]
    fn new(config: &PyNetworkConfig) -> PyResult<Self> {
        let inner = irs_auction_core::Scenario::generate(&config.inner).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn config(&self) -> PyNetworkConfig {
        PyNetworkConfig { inner: self.inner.config.clone() }
    }

    /// `(x, y)` positions of BSs, IRSs and users (`users[bs][k]`).
    fn positions<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = &self.inner.topology;
        let xy = |p: &irs_auction_core::topology::Point| (p.x, p.y);
        let d = PyDict::new(py);
        d.set_item("bs", t.bs_positions.iter().map(xy).collect::<Vec<_>>())?;
        d.set_item("irs", t.irs_positions.iter().map(xy).collect::<Vec<_>>())?;
        d.set_item(
            "users",
            t.user_positions.iter().map(|u| u.iter().map(xy).collect::<Vec<_>>()).collect::<Vec<_>>(),
        )?;
        Ok(d)
    }

    /// Valuation table `nu[l][s]`: operator `s`'s gain from IRS `l` alone.
    #[pyo3(signature = (identity_fallback = true))]
    fn valuations(&self, identity_fallback: bool) -> PyResult<Vec<Vec<f64>>> {
        let ev = self.inner.evaluator(link_options(identity_fallback)).map_err(to_py)?;
        Ok(ValuationTable::from_evaluator(&ev).map_err(to_py)?.rows())
    }

    /// Sum-rate gain of `operator` when it tunes exactly the IRSs in `irs`.
    #[pyo3(signature = (operator, irs, identity_fallback = true))]
    fn sum_rate_gain(&self, operator: usize, irs: Vec<usize>, identity_fallback: bool) -> PyResult<f64> {
        if operator >= self.inner.config.num_operators {
            return Err(to_py(Error::InvalidConfig(format!("no operator {operator}"))));
        }
        if let Some(&bad) = irs.iter().find(|&&l| l >= self.inner.config.num_irs) {
            return Err(to_py(Error::InvalidConfig(format!("no IRS {bad}"))));
        }
        let ev = self.inner.evaluator(link_options(identity_fallback)).map_err(to_py)?;
        ev.sum_rate_gain(operator, TunableSet::from_indices(irs)).map_err(to_py)
    }

    /// Total and per-operator gain of an allocation given as `owner[l]`
    /// (`None` for unallocated).
    #[pyo3(signature = (owners, identity_fallback = true))]
    fn score<'py>(
        &self,
        py: Python<'py>,
        owners: Vec<Option<usize>>,
        identity_fallback: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let ev = self.inner.evaluator(link_options(identity_fallback)).map_err(to_py)?;
        let alloc = allocation_from(owners, self.inner.config.num_operators)?;
        score_dict(py, &score_allocation(&ev, &alloc).map_err(to_py)?)
    }

    /// Best full allocation by enumeration of all `S^L` candidates.
    #[pyo3(signature = (budget = DEFAULT_ENUMERATION_BUDGET as u64, identity_fallback = true))]
    fn exhaustive<'py>(
        &self,
        py: Python<'py>,
        budget: u64,
        identity_fallback: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let ev = self.inner.evaluator(link_options(identity_fallback)).map_err(to_py)?;
        score_dict(py, &baselines::exhaustive_search(&ev, budget as u128).map_err(to_py)?)
    }

    /// Uniformly random full allocation drawn from the baseline stream of `seed`
    /// (defaults to the scenario seed).
    #[pyo3(signature = (seed = None))]
    fn random_allocation(&self, seed: Option<u64>) -> Vec<Option<usize>> {
        let seed = seed.unwrap_or(self.inner.config.seed);
        let mut rng = stream(seed, Stream::RandomBaseline);
        baselines::random_allocation(&self.inner.config, &mut rng).owners().to_vec()
    }
}

fn score_dict<'py>(py: Python<'py>, s: &baselines::AllocationScore) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("owners", s.allocation.owners().to_vec())?;
    d.set_item("total_gain", s.total_gain)?;
    d.set_item("operator_gains", s.operator_gains.clone())?;
    d.set_item("evaluations", s.evaluations as u64)?;
    Ok(d)
}

fn auction_options(
    kappa: Option<f64>,
    bid_rule: &str,
    price_rule: &str,
    round_cap: Option<usize>,
) -> PyResult<AuctionOptions> {
    let bid_rule = match bid_rule {
        "profit" => BidRule::Profit,
        "valuation" => BidRule::Valuation,
        other => return Err(IrsAuctionError::new_err(format!("unknown bid rule '{other}'"))),
    };
    let price_rule = match price_rule {
        "monotone" => PriceRule::Monotone,
        "latest" => PriceRule::Latest,
        other => return Err(IrsAuctionError::new_err(format!("unknown price rule '{other}'"))),
    };
    Ok(AuctionOptions {
        kappa,
        bid_rule,
        price_rule,
        successive_round_cap: round_cap,
        simultaneous_round_cap: round_cap,
        ..AuctionOptions::default()
    })
}

fn table_from(valuations: Vec<Vec<f64>>) -> PyResult<ValuationTable> {
    let l = valuations.len();
    let s = valuations.first().map_or(0, Vec::len);
    ValuationTable::new(l, s, valuations).map_err(to_py)
}

fn outcome_dict<'py>(py: Python<'py>, out: &AuctionOutcome, trace: bool) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("owners", out.allocation.owners().to_vec())?;
    d.set_item("prices", out.prices.clone())?;
    d.set_item("rounds", out.rounds())?;
    d.set_item("converged", out.converged())?;
    if trace {
        let rounds = out
            .trace
            .rounds
            .iter()
            .map(|r| {
                let rd = PyDict::new(py);
                rd.set_item("round", r.round)?;
                rd.set_item("prices", r.prices.clone())?;
                rd.set_item("allocation", r.allocation.clone())?;
                rd.set_item("submitted", r.submitted.clone())?;
                Ok(rd)
            })
            .collect::<PyResult<Vec<_>>>()?;
        d.set_item("trace", rounds)?;
    }
    Ok(d)
}

/// Successive-advance auction on a valuation table `nu[l][s]`.
#[pyfunction]
#[pyo3(signature = (valuations, kappa = None, bid_rule = "profit", price_rule = "monotone", round_cap = None, trace = false))]
fn run_successive<'py>(
    py: Python<'py>,
    valuations: Vec<Vec<f64>>,
    kappa: Option<f64>,
    bid_rule: &str,
    price_rule: &str,
    round_cap: Option<usize>,
    trace: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = auction_options(kappa, bid_rule, price_rule, round_cap)?;
    let out = irs_auction_core::run_successive_advance(&table_from(valuations)?, &opts).map_err(to_py)?;
    outcome_dict(py, &out, trace)
}

/// Simultaneous multi-round auction on a valuation table `nu[l][s]`.
#[pyfunction]
#[pyo3(signature = (valuations, round_cap = None, trace = false))]
fn run_simultaneous<'py>(
    py: Python<'py>,
    valuations: Vec<Vec<f64>>,
    round_cap: Option<usize>,
    trace: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = auction_options(None, "profit", "monotone", round_cap)?;
    let out =
        irs_auction_core::run_simultaneous_multiround(&table_from(valuations)?, &opts).map_err(to_py)?;
    outcome_dict(py, &out, trace)
}

/// Linear path-loss gain at `distance_m` for exponent `alpha`.
#[pyfunction]
#[pyo3(signature = (distance_m, alpha, config = None))]
fn path_loss_linear(distance_m: f64, alpha: f64, config: Option<&PyNetworkConfig>) -> PyResult<f64> {
    let cfg = config.map_or_else(irs_auction_core::NetworkConfig::desk, |c| c.inner.clone());
    irs_auction_core::path_loss_linear(distance_m, alpha, &cfg).map_err(to_py)
}

/// Runs an experiment and returns `{"rows": [...], "summary": [...]}`.
///
/// `spec` is a TOML document; without it the named preset is used. `overrides`
/// are `key.path=value` strings as accepted by the command line `--set`.
#[pyfunction]
#[pyo3(signature = (spec = None, preset = "desk", overrides = Vec::new()))]
fn run_experiment<'py>(
    py: Python<'py>,
    spec: Option<&str>,
    preset: &str,
    overrides: Vec<String>,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = match spec {
        Some(text) => ExperimentSpec::from_toml_with_overrides(text, &overrides),
        None => {
            let p = match preset {
                "desk" => Preset::Desk,
                "paper" => Preset::Paper,
                other => return Err(IrsAuctionError::new_err(format!("unknown preset '{other}'"))),
            };
            ExperimentSpec::preset(p).with_overrides(&overrides)
        }
    }
    .map_err(to_py)?;
    let rows = py.detach(|| harness::run_experiment(&spec)).map_err(to_py)?;
    let summary = harness::summarize(&rows).map_err(to_py)?;

    let row_dicts = rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("method", &r.method)?;
            d.set_item("sweep_var", &r.sweep_var)?;
            d.set_item("sweep_value", r.sweep_value)?;
            d.set_item("trial", r.trial)?;
            d.set_item("seed", r.seed)?;
            d.set_item("total_gain", r.total_gain)?;
            d.set_item("operator_gains", r.operator_gains.clone())?;
            d.set_item("rounds", r.rounds)?;
            d.set_item("oracle_calls", r.oracle_calls)?;
            d.set_item("converged", r.converged)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let summary_dicts = summary
        .iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("method", &s.method)?;
            d.set_item("sweep_var", &s.sweep_var)?;
            d.set_item("sweep_value", s.sweep_value)?;
            d.set_item("trials", s.trials)?;
            d.set_item("mean_gain", s.mean_gain)?;
            d.set_item("stderr_gain", s.stderr_gain)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;

    let out = PyDict::new(py);
    out.set_item("rows", row_dicts)?;
    out.set_item("summary", summary_dicts)?;
    Ok(out)
}

#[pymodule]
fn irs_auction(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("IrsAuctionError", m.py().get_type::<IrsAuctionError>())?;
    m.add_class::<PyNetworkConfig>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(run_successive, m)?)?;
    m.add_function(wrap_pyfunction!(run_simultaneous, m)?)?;
    m.add_function(wrap_pyfunction!(path_loss_linear, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
