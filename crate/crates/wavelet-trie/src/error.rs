//! Crate-wide error type.

/// Errors shared by all structures in this crate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// A position or count argument lies outside the addressable range.
    #[error("position {pos} out of range (length {len})")]
    Range { pos: usize, len: usize },

    /// A requested occurrence does not exist (e.g. `select` past the last
    /// occurrence, or on a string that never occurs). Distinct from
    /// [`Error::Range`]: the arguments were in range but nothing is there.
    #[error("occurrence {idx} not found ({count} present)")]
    NotFound { idx: usize, count: usize },

    /// Insertion of a string that is already stored.
    #[error("string already present")]
    Duplicate,

    /// Deletion (or keyed lookup) of a string that is not stored.
    #[error("string not present")]
    Absent,

    /// The operation would break prefix-freeness: the string is a proper
    /// prefix of a stored string, or extends one.
    #[error("string conflicts with a stored prefix")]
    PrefixConflict,

    /// An argument violates a documented precondition (zero where a positive
    /// value is required, value outside the declared universe, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    /// Serialized data failed validation.
    #[error("corrupt encoding: {0}")]
    Decode(String),

    /// The index variant does not support the requested operation.
    #[error("operation `{op}` not supported by the {variant} variant")]
    VariantMismatch {
        op: &'static str,
        variant: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn decode_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Decode(msg.into()))
}
