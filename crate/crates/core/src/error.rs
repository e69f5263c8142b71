use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("empty subsystem selection")]
    EmptySelection,

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("space mismatch in {context}: expected {expected}, found {found}")]
    SpaceMismatch {
        context: String,
        expected: String,
        found: String,
    },

    #[error("invalid labeled space: {0}")]
    InvalidSpace(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("map is not CPTP: {0}")]
    NotCptp(String),

    #[error("ill-conditioned inversion (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("resource limit: {what} needs {requested}, cap is {cap}")]
    ResourceLimit {
        what: String,
        requested: u128,
        cap: u128,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn mismatch(context: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            found,
        }
    }

    pub(crate) fn space_mismatch(context: impl Into<String>, expected: impl ToString, found: impl ToString) -> Self {
        Error::SpaceMismatch {
            context: context.into(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// True for refusals caused by dimension or memory caps.
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DuplicateLabel(_) => "duplicate_label",
            Error::UnknownLabel(_) => "unknown_label",
            Error::EmptySelection => "empty_selection",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::SpaceMismatch { .. } => "space_mismatch",
            Error::InvalidSpace(_) => "invalid_space",
            Error::InvalidState(_) => "invalid_state",
            Error::InvalidChannel(_) => "invalid_channel",
            Error::InvalidEnsemble(_) => "invalid_ensemble",
            Error::NotCptp(_) => "not_cptp",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::ResourceLimit { .. } => "resource_limit",
            Error::Infeasible(_) => "infeasible",
            Error::Config(_) => "config",
            Error::Parse(_) => "parse",
        }
    }

    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::ResourceLimit { .. })
    }
}
