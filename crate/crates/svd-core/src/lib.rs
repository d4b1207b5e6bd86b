//! Truncated SVD over snapshot matrices: centering/scaling preprocessing,
//! one-sided Jacobi decomposition, principal components/directions, and
//! rank/energy diagnostics.
//!
//! All types are immutable after construction and the operations are pure, so
//! everything here is safe to share across threads.

mod decomposition;
mod error;
mod jacobi;
mod snapshot;

pub use decomposition::{reconstruct, svd, Decomposition, EnergyConvention, EnergyRank};
pub use error::{Result, SvdError};
pub use snapshot::{
    AggregationKind, CenterMethod, ColumnMeta, Preprocessing, ScaleMethod, SnapshotMatrix,
};
