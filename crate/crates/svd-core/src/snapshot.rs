use ndarray::{Array1, Array2};

use crate::error::{Result, SvdError};

/// How the columns of a snapshot matrix were aggregated.
///
/// Scenario aggregation stacks one full trajectory per column (columns indexed
/// by scenario); time aggregation stacks one spatial field per column (columns
/// indexed by time instant).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationKind {
    ScenarioAggregated,
    TimeAggregated,
}

/// Per-column metadata: scenario input vectors or time stamps.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnMeta {
    /// One row per column: the scenario inputs u (all the same dimensionality).
    Scenarios(Array2<f64>),
    /// One time stamp per column.
    Times(Array1<f64>),
}

impl ColumnMeta {
    pub fn len(&self) -> usize {
        match self {
            ColumnMeta::Scenarios(s) => s.nrows(),
            ColumnMeta::Times(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterMethod {
    None,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMethod {
    None,
    Auto,
}

/// Degenerate-column guard for auto-scaling: columns whose sample standard
/// deviation falls below `1e-12 * (max|entry| + 1)` keep d_j = 1.
const DEGENERATE_STD_FACTOR: f64 = 1e-12;

/// An n x m data matrix whose columns are snapshots, together with the row
/// coordinates (values of the independent variable y) and per-column metadata.
#[derive(Debug, Clone)]
pub struct SnapshotMatrix {
    values: Array2<f64>,
    kind: AggregationKind,
    row_coords: Array1<f64>,
    col_meta: ColumnMeta,
}

impl SnapshotMatrix {
    pub fn new(
        values: Array2<f64>,
        kind: AggregationKind,
        row_coords: Array1<f64>,
        col_meta: ColumnMeta,
    ) -> Result<Self> {
        let (n, m) = values.dim();
        if n == 0 || m == 0 {
            return Err(SvdError::InvalidData("empty snapshot matrix".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SvdError::InvalidData("non-finite snapshot entries".into()));
        }
        if row_coords.len() != n {
            return Err(SvdError::InvalidShape(format!(
                "{} row coordinates for {n} rows",
                row_coords.len()
            )));
        }
        if col_meta.len() != m {
            return Err(SvdError::InvalidShape(format!(
                "{} column metadata entries for {m} columns",
                col_meta.len()
            )));
        }
        match (kind, &col_meta) {
            (AggregationKind::ScenarioAggregated, ColumnMeta::Scenarios(_)) => {}
            (AggregationKind::TimeAggregated, ColumnMeta::Times(_)) => {}
            _ => {
                return Err(SvdError::InvalidData(
                    "aggregation kind does not match column metadata".into(),
                ))
            }
        }
        Ok(Self { values, kind, row_coords, col_meta })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn kind(&self) -> AggregationKind {
        self.kind
    }

    pub fn row_coords(&self) -> &Array1<f64> {
        &self.row_coords
    }

    pub fn col_meta(&self) -> &ColumnMeta {
        &self.col_meta
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    /// Transform each column j to `(x_j - c_j) / d_j` and return the
    /// transformed matrix with the applied preprocessing vectors.
    pub fn center_scale(
        &self,
        center: CenterMethod,
        scale: ScaleMethod,
    ) -> Result<(SnapshotMatrix, Preprocessing)> {
        let (n, m) = self.values.dim();
        let mut c = Array1::zeros(m);
        let mut d = Array1::ones(m);
        let mut out = self.values.clone();

        if center == CenterMethod::Mean {
            for (j, mut col) in out.columns_mut().into_iter().enumerate() {
                let mean = col.sum() / n as f64;
                c[j] = mean;
                col.mapv_inplace(|x| x - mean);
            }
        }
        if scale == ScaleMethod::Auto {
            for (j, mut col) in out.columns_mut().into_iter().enumerate() {
                let std = sample_std(col.iter().copied());
                let max_abs = self.values.column(j).iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if std < DEGENERATE_STD_FACTOR * (max_abs + 1.0) {
                    d[j] = 1.0;
                } else {
                    d[j] = std;
                    col.mapv_inplace(|x| x / std);
                }
            }
        }
        let transformed = SnapshotMatrix {
            values: out,
            kind: self.kind,
            row_coords: self.row_coords.clone(),
            col_meta: self.col_meta.clone(),
        };
        Ok((transformed, Preprocessing { c, d, center, scale }))
    }
}

/// Sample standard deviation about the data's own mean (n-1 denominator).
fn sample_std(x: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = x.clone().count();
    if n < 2 {
        return 0.0;
    }
    let mean = x.clone().sum::<f64>() / n as f64;
    let ss: f64 = x.map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Per-column centering and scaling vectors recorded by `center_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessing {
    c: Array1<f64>,
    d: Array1<f64>,
    center: CenterMethod,
    scale: ScaleMethod,
}

impl Preprocessing {
    /// Identity preprocessing for m columns (c = 0, d = 1).
    pub fn identity(m: usize) -> Self {
        Self {
            c: Array1::zeros(m),
            d: Array1::ones(m),
            center: CenterMethod::None,
            scale: ScaleMethod::None,
        }
    }

    pub fn from_vectors(c: Array1<f64>, d: Array1<f64>) -> Result<Self> {
        if c.len() != d.len() {
            return Err(SvdError::InvalidShape(format!(
                "centering has {} entries, scaling {}",
                c.len(),
                d.len()
            )));
        }
        if d.iter().any(|&v| !(v > 0.0)) {
            return Err(SvdError::InvalidData("scaling entries must be positive".into()));
        }
        Ok(Self { c, d, center: CenterMethod::Mean, scale: ScaleMethod::Auto })
    }

    pub fn centering(&self) -> &Array1<f64> {
        &self.c
    }

    pub fn scaling(&self) -> &Array1<f64> {
        &self.d
    }

    pub fn center_method(&self) -> CenterMethod {
        self.center
    }

    pub fn scale_method(&self) -> ScaleMethod {
        self.scale
    }
}
