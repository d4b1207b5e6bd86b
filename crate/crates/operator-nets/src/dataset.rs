use ndarray::{Array2, Axis};
use svd_core::{ColumnMeta, SnapshotMatrix};

use crate::error::{OperatorError, Result};

/// Pointwise operator regression data: row i pairs a scenario input `u`, a
/// coordinate `y`, and the value of every output variable there.
#[derive(Debug, Clone)]
pub struct OperatorDataset {
    pub u: Array2<f64>,
    pub y: Array2<f64>,
    pub values: Array2<f64>,
    pub variables: Vec<String>,
}

impl OperatorDataset {
    pub fn new(
        u: Array2<f64>,
        y: Array2<f64>,
        values: Array2<f64>,
        variables: Vec<String>,
    ) -> Result<Self> {
        let n = u.nrows();
        if y.nrows() != n || values.nrows() != n {
            return Err(OperatorError::InvalidShape(format!(
                "row counts differ: u {n}, y {}, values {}",
                y.nrows(),
                values.nrows()
            )));
        }
        if n == 0 {
            return Err(OperatorError::InvalidShape("empty dataset".into()));
        }
        if values.ncols() != variables.len() {
            return Err(OperatorError::InvalidShape(format!(
                "{} value columns for {} variables",
                values.ncols(),
                variables.len()
            )));
        }
        Ok(Self { u, y, values, variables })
    }

    /// Flatten gridded snapshot matrices (one per variable, sharing grid and
    /// scenarios) into pointwise rows: one row per (scenario, y-sample).
    pub fn from_snapshots(snaps: &[(String, &SnapshotMatrix)]) -> Result<Self> {
        let first = &snaps
            .first()
            .ok_or_else(|| OperatorError::InvalidShape("no snapshot matrices".into()))?
            .1;
        let (n, m) = first.values().dim();
        let u_all = match first.col_meta() {
            ColumnMeta::Scenarios(u) => u.clone(),
            ColumnMeta::Times(_) => {
                return Err(OperatorError::GridRequired(
                    "scenario-aggregated snapshots required".into(),
                ))
            }
        };
        for (name, s) in snaps {
            if s.values().dim() != (n, m) {
                return Err(OperatorError::GridRequired(format!(
                    "variable {name} has shape {:?}, expected {:?}",
                    s.values().dim(),
                    (n, m)
                )));
            }
            if s.row_coords() != first.row_coords() {
                return Err(OperatorError::GridRequired(format!(
                    "variable {name} is on a different sample grid"
                )));
            }
        }
        let rows = n * m;
        let du = u_all.ncols();
        let mut u = Array2::zeros((rows, du));
        let mut y = Array2::zeros((rows, 1));
        let mut values = Array2::zeros((rows, snaps.len()));
        let mut r = 0;
        for j in 0..m {
            for i in 0..n {
                for k in 0..du {
                    u[[r, k]] = u_all[[j, k]];
                }
                y[[r, 0]] = first.row_coords()[i];
                for (v, (_, s)) in snaps.iter().enumerate() {
                    values[[r, v]] = s.values()[[i, j]];
                }
                r += 1;
            }
        }
        Self::new(u, y, values, snaps.iter().map(|(n, _)| n.clone()).collect())
    }

    pub fn len(&self) -> usize {
        self.u.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, idx: &[usize]) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
        (
            self.u.select(Axis(0), idx),
            self.y.select(Axis(0), idx),
            self.values.select(Axis(0), idx),
        )
    }
}
