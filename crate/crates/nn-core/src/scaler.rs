use ndarray::{Array1, Array2};

use crate::error::{NnError, Result};

/// Affine per-feature map onto [0, 1]. Features with no spread map to 0.5 and
/// invert back to their constant value.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    min: Array1<f64>,
    max: Array1<f64>,
}

impl MinMaxScaler {
    pub fn fit(data: &Array2<f64>) -> Result<Self> {
        if data.nrows() == 0 {
            return Err(NnError::InvalidData("cannot fit scaler on empty data".into()));
        }
        let mut min = Array1::from_elem(data.ncols(), f64::INFINITY);
        let mut max = Array1::from_elem(data.ncols(), f64::NEG_INFINITY);
        for row in data.rows() {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Self { min, max })
    }

    pub fn from_bounds(min: Array1<f64>, max: Array1<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(NnError::InvalidShape("min/max length mismatch".into()));
        }
        if min.iter().zip(max.iter()).any(|(a, b)| a > b) {
            return Err(NnError::InvalidData("max must be >= min per feature".into()));
        }
        Ok(Self { min, max })
    }

    pub fn bounds(&self) -> (&Array1<f64>, &Array1<f64>) {
        (&self.min, &self.max)
    }

    pub fn n_features(&self) -> usize {
        self.min.len()
    }

    pub fn transform(&self, data: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_width(data)?;
        let mut out = data.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                let range = self.max[j] - self.min[j];
                *v = if range == 0.0 { 0.5 } else { (*v - self.min[j]) / range };
            }
        }
        Ok(out)
    }

    pub fn inverse(&self, data: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_width(data)?;
        let mut out = data.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                let range = self.max[j] - self.min[j];
                *v = if range == 0.0 { self.min[j] } else { *v * range + self.min[j] };
            }
        }
        Ok(out)
    }

    pub fn fit_transform(data: &Array2<f64>) -> Result<(Self, Array2<f64>)> {
        let scaler = Self::fit(data)?;
        let out = scaler.transform(data)?;
        Ok((scaler, out))
    }

    fn check_width(&self, data: &Array2<f64>) -> Result<()> {
        if data.ncols() != self.min.len() {
            return Err(NnError::InvalidShape(format!(
                "{} features, scaler has {}",
                data.ncols(),
                self.min.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn maps_to_unit_interval() {
        let data = arr2(&[[0.0], [10.0]]);
        let (_, out) = MinMaxScaler::fit_transform(&data).unwrap();
        assert_eq!(out, arr2(&[[0.0], [1.0]]));
    }

    #[test]
    fn constant_feature_maps_to_half() {
        let data = arr2(&[[7.0], [7.0]]);
        let (s, out) = MinMaxScaler::fit_transform(&data).unwrap();
        assert_eq!(out, arr2(&[[0.5], [0.5]]));
        assert_eq!(s.inverse(&out).unwrap(), data);
    }

    #[test]
    fn roundtrip_within_tolerance() {
        let data = arr2(&[[1.0, -3.0, 2.5], [4.0, 0.0, 2.5], [-2.0, 9.0, 2.5]]);
        let (s, t) = MinMaxScaler::fit_transform(&data).unwrap();
        let back = s.inverse(&t).unwrap();
        for (a, b) in back.iter().zip(data.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
