//! Error types shared by all modules of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A probability argument left the closed unit interval.
    #[error("probability {0} outside [0, 1]")]
    ProbabilityRange(f64),

    /// A rate or length that must be strictly positive was not.
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    /// A parameter failed a range or shape constraint.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Ring node counts must be odd and at least 3.
    #[error("node count must be an odd integer >= 3, got {0}")]
    BadNodeCount(usize),

    /// Hop count outside the valid range for the ring.
    #[error("hop count {hop} outside 1..={max} for a {nodes}-node ring")]
    HopOutOfRange { hop: usize, max: usize, nodes: usize },

    /// The named pair is not an adjacent ring link in clockwise order.
    #[error("({0}, {1}) is not an adjacent ring link")]
    NotAdjacentLink(usize, usize),

    /// Table model construction rejected the knot list.
    #[error("bad rate table: {0}")]
    BadTable(String),

    /// Reconfiguration dead time leaves no room for key generation.
    #[error("infeasible schedule: reconfiguration overhead {overhead_s} s >= period {period_s} s")]
    InfeasibleSchedule { overhead_s: f64, period_s: f64 },

    /// A chord exceeded the link budget: the generation rate at that hop is zero.
    #[error("hop {hop} out of link budget: generation rate is 0 at {attenuation_db} dB")]
    OutOfBudget { hop: usize, attenuation_db: f64 },

    /// A schedule failed its internal consistency checks.
    #[error("inconsistent schedule: {0}")]
    InconsistentSchedule(String),

    /// Key blocks in one run must share a single block size.
    #[error("key block size mismatch: expected {expected} bits, got {got}")]
    BlockSizeMismatch { expected: usize, got: usize },
}
