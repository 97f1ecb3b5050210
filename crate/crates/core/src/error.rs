//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// An enumeration would exceed the configured element budget.
    #[error("element budget exceeded (cap {cap}) while {context}")]
    CapExceeded { cap: usize, context: String },

    /// Two groups were combined whose labeled domains differ.
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    /// A partition handed in as a congruence is not preserved by the group.
    #[error("not a congruence: {0}")]
    NotACongruence(String),

    /// A permutation does not preserve the block/copy structure of a truncation.
    #[error("not block-respecting: {0}")]
    NotBlockRespecting(String),

    /// A diagonal extension would break the normal core.
    #[error("not normalizing: {0}")]
    NotNormalizing(String),

    /// An expression failed validation.
    #[error("invalid expression: {0}")]
    InvalidExpr(String),

    /// A congruence does not transport across consecutive truncation sizes.
    #[error("site mismatch: {0}")]
    SiteMismatch(String),

    /// An orbit count did not stabilize between truncation sizes t and t+1.
    #[error("orbit count for n = {n} not stable between t = {n} and t = {t1}")]
    Unstable { n: usize, t1: usize },

    /// A structure already declares a relation name a construction needs.
    #[error("signature clash: relation {0} already declared")]
    SignatureClash(String),

    /// A boundedness scan horizon is too small for the requested check.
    #[error("scan horizon too small: {0}")]
    HorizonTooSmall(String),

    /// A malformed label, permutation, or structure was supplied.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// DSL text could not be parsed.
    #[error("parse error at {line}:{col}: found {found}, expected {}", expected.join(" | "))]
    Parse {
        line: usize,
        col: usize,
        expected: Vec<String>,
        found: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
