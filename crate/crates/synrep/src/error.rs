//! Crate-wide error type with stable machine-parsable codes.

use thiserror::Error;

/// All failure modes surfaced by the library and the CLI.
///
/// Each variant maps to a stable code string (see [`Error::code`]) so callers
/// and scripts can branch on the class of failure without parsing prose.
#[derive(Debug, Error)]
pub enum Error {
    /// A file or record does not match the expected schema (missing column,
    /// nonpositive weight, wrong field count, ...). The message names the
    /// offending column/row.
    #[error("schema error: {0}")]
    Schema(String),

    /// A field could not be parsed as a number.
    #[error("parse error: {0}")]
    Parse(String),

    /// A domain-type invariant would be violated by construction.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// Replicate-file structure is inconsistent (bad (m, r) grouping,
    /// wrong group sizes, indices out of range).
    #[error("structural error: {0}")]
    Structure(String),

    /// An argument combination is invalid (n >= N, R mismatched with the
    /// variant, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// A simulation config file is invalid; names the offending key.
    #[error("config error: {0}")]
    Config(String),

    /// Every Polya urn mass is nonpositive, so no draw can be made.
    #[error("degenerate urn: all masses are nonpositive ({0})")]
    DegenerateUrn(String),

    /// Too many simulation runs failed; carries diagnostics.
    #[error("simulation aborted: {0}")]
    SimulationAborted(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-parsable code for this error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Schema(_) => "E_SCHEMA",
            Error::Parse(_) => "E_PARSE",
            Error::Invariant(_) => "E_INVARIANT",
            Error::Structure(_) => "E_STRUCTURE",
            Error::Argument(_) => "E_ARGUMENT",
            Error::Config(_) => "E_CONFIG",
            Error::DegenerateUrn(_) => "E_DEGENERATE_URN",
            Error::SimulationAborted(_) => "E_SIM_ABORTED",
            Error::Io(_) => "E_IO",
            Error::Json(_) => "E_JSON",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
