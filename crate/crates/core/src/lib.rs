//! Time-memory tradeoff toolkit built around the rainbow distinguished point
//! (rainbow-DP) method: variable-length chain tables terminated at
//! distinguished points, the online pre-image search, the full analytic cost
//! model, a parameter optimizer, classic tradeoff baselines, and an
//! experiment harness that compares measurement against prediction.
//!
//! The search space is always `N = 2^n_bits` and a point is distinguished
//! when its top `k_bits` are zero, so the distinguishing probability is
//! `1/t` with `t = 2^k_bits`. Chains longer than `t_hat = round(c*t)` are
//! discarded during precomputation.
//!
//! Everything is deterministic: all randomness derives from explicit seeds
//! through a fixed mixing function, and results are independent of worker
//! count.

pub mod baselines;
pub mod experiment;
pub mod func;
pub mod numeric;
pub mod offline;
pub mod online;
pub mod optimizer;
pub mod params;
pub mod storage;
pub mod theory;

pub use func::OneWayFn;
pub use numeric::Real;
pub use offline::{ChainRecord, StartPointScheme};
pub use online::{BatchStats, SearchOptions, SearchOutcome};
pub use params::{CounterSet, Point, SpaceParams};
pub use storage::PrecompTable;

/// Concrete `f64` instantiations of the scalar-generic analytic model.
pub type TheoryInputs = theory::TheoryInputs<f64>;
pub type TheoryReport = theory::TheoryReport<f64>;

/// Errors reported by table construction, search setup and configuration.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },
    #[error("unknown one-way function id `{0}`")]
    UnknownFunction(String),
    #[error("table {table_index} kept no chains out of {m0_tilde} starting points")]
    EmptyTable { table_index: u16, m0_tilde: u64 },
    #[error(transparent)]
    Storage(#[from] storage::StorageError),
}

impl Error {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParams {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
