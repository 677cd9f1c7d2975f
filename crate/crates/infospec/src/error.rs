use thiserror::Error;

/// Errors produced by the library, grouped by the CLI exit code they map to.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed configuration: unknown channel kind, bad parameters, degenerate grids.
    #[error("config error: {0}")]
    Config(String),

    /// API misuse: mixed blocklengths, unknown state id, mismatched weights.
    #[error("usage error: {0}")]
    Usage(String),

    /// An exact-enumeration request exceeded the configured cap.
    #[error("resource cap exceeded: {what} needs {required} entries, cap is {cap}; {hint}")]
    Resource {
        what: String,
        required: u128,
        cap: u128,
        hint: String,
    },

    /// Density evaluated at a zero-probability point.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operation not available for this channel kind (e.g. no per-symbol sampler).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A guarantee the construction is supposed to provide failed; indicates a bug.
    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),

    /// A computed quantity violated a hard invariant (e.g. NaN).
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
