use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("determinant {0} is not +1 or -1")]
    BadDeterminant(String),

    #[error("word is not reduced: letter {index} cancels its predecessor")]
    NotReduced { index: usize },

    #[error("invalid letter {0:?}; expected one of a, A, b, B")]
    BadLetter(char),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("modulus {0} is out of range (need 2 <= p < 65536)")]
    ModulusRange(u64),

    #[error("graph is disconnected: vertex {0} is unreachable from the base")]
    Disconnected(u32),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("path step {step} is not incident to the current vertex")]
    BadPath { step: usize },

    #[error("slot {0} has no sigma partner")]
    UnpairedSlot(String),

    #[error("generator set is not closed under tau")]
    NotTauClosed,

    #[error("({0}, {1}) is not a primitive vector")]
    NotPrimitive(i64, i64),

    #[error("memory budget exceeded: need {needed} bytes, budget is {budget} bytes")]
    BudgetExceeded { needed: u64, budget: u64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
