//! Crate error type.
//!
//! Budget-style errors (`ShellBudget`, `QuotientTooLarge`, `PairwiseBudget`,
//! `GeneratingBudget`) are recoverable resource limits; everything else is a
//! domain error. The CLI maps the two groups to distinct exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("matrix does not have full row rank")]
    RankDeficient,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("inconsistent row lengths in matrix construction")]
    RaggedRows,

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("lattice is not integral")]
    NotIntegral,

    #[error("vector is not in the span/scope required: {0}")]
    BadVector(String),

    #[error("not a sublattice")]
    NotSublattice,

    #[error("neighbor: vector already lies in the lattice (not a proper coset)")]
    NeighborInLattice,

    #[error("neighbor: doubled vector is not in the lattice (index would exceed 2)")]
    NeighborIndexTooLarge,

    #[error("neighbor: resulting lattice is not integral")]
    NeighborNotIntegral,

    #[error("quotient group order {order} exceeds bound {bound}")]
    QuotientTooLarge { order: u64, bound: u64 },

    #[error("shell enumeration exceeded vector budget {budget}")]
    ShellBudget { budget: u64 },

    #[error("pairwise inner-product budget exceeded: shell has {n} vectors, budget {budget}")]
    PairwiseBudget { n: u64, budget: u64 },

    #[error("orthogonal decomposition: generating bound exceeded budget {budget}")]
    GeneratingBudget { budget: u64 },

    #[error("shell is empty at norm {0}")]
    EmptyShell(String),

    #[error("projection precondition violated: {0}")]
    Venkov(String),

    #[error("unknown catalog name: {0}")]
    UnknownName(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for resource-limit errors (CLI exit code 2); false for domain
    /// errors (exit code 1).
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::QuotientTooLarge { .. }
                | Error::ShellBudget { .. }
                | Error::PairwiseBudget { .. }
                | Error::GeneratingBudget { .. }
        )
    }
}
