use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid valuation table: {0}")]
    InvalidValuations(String),

    #[error("exhaustive search needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("toml parse error: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error("toml write error: {0}")]
    TomlSer(#[from] toml::ser::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable short identifier, used by the CLI's machine-readable error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::Domain(_) => "domain",
            Error::Dimension(_) => "dimension",
            Error::InvalidValuations(_) => "invalid_valuations",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::Empty(_) => "empty_input",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::TomlDe(_) | Error::TomlSer(_) => "toml",
            Error::Json(_) => "json",
        }
    }
}
