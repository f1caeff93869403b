use thiserror::Error;

use crate::code_model::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid code spec: {}", format_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("expected {expected} {what}, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unit address out of range: stage {stage}, unit {unit} (n = {n})")]
    Address { n: usize, stage: usize, unit: usize },

    #[error("{0}")]
    Unsupported(String),

    #[error("non-finite channel LLR at index {0}")]
    NonFinite(usize),

    #[error("dense oracle size guard: N = {0} exceeds limit {1}")]
    TooLarge(usize, usize),

    #[error("parameter out of range: {0}")]
    Range(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
