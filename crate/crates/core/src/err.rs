//! Shared error type for the core library.
//!
//! Every fallible operation reports a typed error; nothing is silently
//! coerced. `Intractable` is reserved for searches that would exceed a
//! configured budget, so callers can distinguish "false" from "gave up".

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("carrier mismatch: {context} (expected {expected}, got {got})")]
    CarrierMismatch {
        context: String,
        expected: String,
        got: String,
    },

    #[error("element `{element}` is not in carrier {carrier}")]
    StrayElement { element: String, carrier: String },

    #[error("duplicate element `{element}` in carrier declaration")]
    DuplicateElement { element: String },

    #[error("map is not total: `{element}` has no image")]
    NotTotal { element: String },

    #[error("invalid term: {0}")]
    Validation(String),

    #[error("functor kind mismatch: {context} (expected {expected}, got {got})")]
    KindMismatch {
        context: String,
        expected: String,
        got: String,
    },

    #[error("arity mismatch: {context} (expected {expected}, got {got})")]
    Arity {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("cap exceeded while {what}: needs {needs}, cap is {cap}")]
    CapExceeded { what: String, needs: u128, cap: u128 },

    #[error("intractable: {0}")]
    Intractable(String),

    #[error("lifting `{lifting}` is not defined for functor kind {kind}")]
    LiftingKind { lifting: String, kind: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("internal verification failed: {0}")]
    InternalVerification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
