use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// Variant names are part of the tool's user-facing output (see
/// [`Error::name`]), so they are kept stable.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("malformed automaton: {0}")]
    MalformedAutomaton(String),

    #[error("state {state} is reached with pending processes {first:?} and {second:?}")]
    AmbiguousQuiescence {
        state: String,
        first: Vec<u32>,
        second: Vec<u32>,
    },

    #[error("transition {source_state} --{letter}--> {target}: {reason}")]
    IllegalAutomaton {
        source_state: String,
        letter: String,
        target: String,
        reason: String,
    },

    #[error("final state {state} has pending processes {pending:?}")]
    FinalNotQuiescent { state: String, pending: Vec<u32> },

    #[error("run is not legal: {0}")]
    NotLegal(String),

    #[error("run is not quiescent: {0}")]
    NotQuiescent(String),

    #[error("segment {segment} has {length} events, above the bound of {bound}")]
    BoundExceeded {
        segment: usize,
        length: usize,
        bound: usize,
    },

    #[error("a path of {length} events leaves quiescence without returning within the bound of {bound}: {prefix}")]
    SegmentBoundExceeded {
        bound: usize,
        length: usize,
        prefix: String,
    },

    #[error("segment has {length} events, above the subset-width limit of {limit}")]
    SegmentTooLarge { length: usize, limit: usize },

    #[error("run has {length} events, above the enumeration limit of {limit}")]
    TooLarge { length: usize, limit: usize },

    #[error("explored {limit} state pairs without reaching a verdict")]
    ResourceLimit { limit: usize },

    #[error("automaton is not acyclic: {0}")]
    NotAcyclic(String),

    #[error("alphabets differ: {0}")]
    AlphabetMismatch(String),

    #[error("state space exceeds {limit} configurations")]
    CapacityExceeded { limit: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

impl Error {
    /// Stable variant name, used when surfacing errors to users.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "ParseError",
            Error::MalformedAutomaton(_) => "MalformedAutomaton",
            Error::AmbiguousQuiescence { .. } => "AmbiguousQuiescence",
            Error::IllegalAutomaton { .. } => "IllegalAutomaton",
            Error::FinalNotQuiescent { .. } => "FinalNotQuiescent",
            Error::NotLegal(_) => "NotLegal",
            Error::NotQuiescent(_) => "NotQuiescent",
            Error::BoundExceeded { .. } | Error::SegmentBoundExceeded { .. } => "BoundExceeded",
            Error::SegmentTooLarge { .. } => "SegmentTooLarge",
            Error::TooLarge { .. } => "TooLarge",
            Error::ResourceLimit { .. } => "ResourceLimit",
            Error::NotAcyclic(_) => "NotAcyclic",
            Error::AlphabetMismatch(_) => "AlphabetMismatch",
            Error::CapacityExceeded { .. } => "CapacityExceeded",
            Error::InvalidInstance(_) => "InvalidInstance",
        }
    }

    /// True for errors caused by exhausting a bound or a resource limit, as
    /// opposed to malformed input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::BoundExceeded { .. }
                | Error::SegmentBoundExceeded { .. }
                | Error::SegmentTooLarge { .. }
                | Error::TooLarge { .. }
                | Error::ResourceLimit { .. }
                | Error::CapacityExceeded { .. }
        )
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
