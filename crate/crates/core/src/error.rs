use thiserror::Error;

use crate::graph::GraphError;

/// Pipeline outcome other than success.
///
/// `TooWide` is a proven statement about the input (`tw(G) >= k`).
/// `BudgetExceeded` is a resource signal and carries no treewidth claim.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("treewidth is at least {k}")]
    TooWide { k: usize },
    #[error("separator search needs {required} (L, R) pairs, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
