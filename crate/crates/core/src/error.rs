use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed cell or line in an input file. `row` is 1-based and counts
    /// data rows (the header is row 0); `column` is the header name.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("membership config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("row {row}: class label is missing")]
    MissingClassLabel { row: usize },

    #[error("invalid membership function {region}: {reason}")]
    InvalidMembershipFunction { region: String, reason: String },

    #[error("invalid fuzzy value: {0}")]
    InvalidFuzzyValue(String),

    #[error("no membership functions for attribute {0}")]
    MissingMembership(String),

    #[error("value {value} of attribute {attribute} has zero membership in every region{}",
        object.map(|id| format!(" (object {id})")).unwrap_or_default())]
    AllZeroMembership {
        attribute: String,
        value: f64,
        object: Option<usize>,
    },

    #[error("object {object}: no certain donor for attribute {attribute}")]
    NoCertainDonor { object: usize, attribute: String },

    #[error("object {object}: donor {donor} has no quantitative value for attribute {attribute}")]
    DonorValueUnknown {
        object: usize,
        donor: usize,
        attribute: String,
    },

    #[error("equivalence class {0} has no certain members")]
    EmptyClass(String),

    #[error("beta must lie in [0, 0.5), got {0}")]
    InvalidBeta(f64),

    #[error("rule file line {line}: {message}")]
    RuleParse { line: usize, message: String },

    #[error("unresolved uncertainty: {}", .0.iter().map(|(o, a)| format!("object {o} attribute {a}")).collect::<Vec<_>>().join(", "))]
    UnresolvedUncertainty(Vec<(usize, String)>),

    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
