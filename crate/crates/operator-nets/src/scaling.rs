use ndarray::Array2;
use nn_core::MinMaxScaler;

use crate::error::{OperatorError, Result};

/// Rotation-preserving affine map for trunk coordinates: every component is
/// shifted by its own mid-range but divided by one shared scale, so that a
/// rotation in the scaled frame is still a rotation of the raw coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformScaler {
    offsets: Vec<f64>,
    scale: f64,
}

impl UniformScaler {
    pub fn fit(data: &Array2<f64>) -> Result<Self> {
        if data.nrows() == 0 {
            return Err(OperatorError::InvalidShape("cannot fit scaler on empty data".into()));
        }
        let d = data.ncols();
        let mut offsets = Vec::with_capacity(d);
        let mut scale = 0.0f64;
        for j in 0..d {
            let col = data.column(j);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in col {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            offsets.push(0.5 * (lo + hi));
            scale = scale.max(0.5 * (hi - lo));
        }
        if scale <= 1e-300 {
            scale = 1.0;
        }
        Ok(Self { offsets, scale })
    }

    pub fn new(offsets: Vec<f64>, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(OperatorError::InvalidShape("scale must be positive".into()));
        }
        Ok(Self { offsets, scale })
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn apply(&self, data: &Array2<f64>) -> Result<Array2<f64>> {
        if data.ncols() != self.offsets.len() {
            return Err(OperatorError::InvalidShape(format!(
                "{} coordinates, scaler has {}",
                data.ncols(),
                self.offsets.len()
            )));
        }
        let mut out = data.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.offsets[j]) / self.scale;
            }
        }
        Ok(out)
    }
}

/// Optional input normalization applied before the branch/Pre-Net inputs (u)
/// and the trunk coordinates (y). When a y-scaler is set, the Pre-Net frame
/// and the transformed coordinates live in the scaled units.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InputScaling {
    pub u: Option<MinMaxScaler>,
    pub y: Option<UniformScaler>,
}

impl InputScaling {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn fit(u: &Array2<f64>, y: &Array2<f64>) -> Result<Self> {
        Ok(Self { u: Some(MinMaxScaler::fit(u)?), y: Some(UniformScaler::fit(y)?) })
    }

    pub fn scale_u(&self, u: &Array2<f64>) -> Result<Array2<f64>> {
        match &self.u {
            Some(s) => Ok(s.transform(u)?),
            None => Ok(u.clone()),
        }
    }

    pub fn scale_y(&self, y: &Array2<f64>) -> Result<Array2<f64>> {
        match &self.y {
            Some(s) => s.apply(y),
            None => Ok(y.clone()),
        }
    }
}
