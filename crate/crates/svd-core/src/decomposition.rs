use ndarray::{Array1, Array2};

use crate::error::{Result, SvdError};
use crate::jacobi::jacobi_svd_tall;
use crate::snapshot::Preprocessing;

/// Share convention used by cumulative-energy diagnostics.
///
/// `SquaredSingularValues` is the variance convention and the default
/// everywhere. `SingularValues` weighs each mode by sigma_i itself; it decays
/// far slower on symmetry-dominated data and is the convention under which the
/// rigid-body rank-explosion diagnostic is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyConvention {
    SquaredSingularValues,
    SingularValues,
}

/// Result of a rank search: `reached` is false when the stored spectrum cannot
/// attain the requested threshold (possible only after truncation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRank {
    pub rank: usize,
    pub reached: bool,
}

/// Truncated singular value decomposition `U * diag(sigma) * V^T`.
///
/// `total_energy` is the sum of all squared singular values of the full
/// decomposition and survives truncation, so energy shares keep referring to
/// the original matrix.
#[derive(Debug, Clone)]
pub struct Decomposition {
    u: Array2<f64>,
    sigma: Array1<f64>,
    v: Array2<f64>,
    total_energy: f64,
}

/// Compute the full thin SVD of `x`.
///
/// Singular values come back sorted descending, and the sign of each singular
/// pair is fixed so the largest-magnitude entry of the U column is positive.
pub fn svd(x: &Array2<f64>) -> Result<Decomposition> {
    let (n, m) = x.dim();
    if n == 0 || m == 0 {
        return Err(SvdError::InvalidData("empty matrix".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SvdError::InvalidData("non-finite entries".into()));
    }
    let (u, sigma, v) = if n >= m {
        jacobi_svd_tall(x)?
    } else {
        // svd(X^T) = (V, sigma, U); the sign convention is re-applied on U below.
        let xt = x.t().to_owned();
        let (vt_u, sigma, vt_v) = jacobi_svd_tall(&xt)?;
        (vt_v, sigma, vt_u)
    };
    let mut u = u;
    let mut v = v;
    resign(&mut u, &mut v);
    let total_energy = sigma.iter().map(|s| s * s).sum();
    Ok(Decomposition { u, sigma, v, total_energy })
}

// jacobi_svd_tall fixes signs on its own U; after a transpose round-trip the
// convention must be re-anchored to the actual U factor.
fn resign(u: &mut Array2<f64>, v: &mut Array2<f64>) {
    for j in 0..u.ncols() {
        let col = u.column(j);
        let mut best = 0usize;
        let mut best_abs = 0.0;
        for (i, val) in col.iter().enumerate() {
            if val.abs() > best_abs {
                best_abs = val.abs();
                best = i;
            }
        }
        if u[[best, j]] < 0.0 {
            u.column_mut(j).mapv_inplace(|x| -x);
            v.column_mut(j).mapv_inplace(|x| -x);
        }
    }
}

impl Decomposition {
    pub fn u(&self) -> &Array2<f64> {
        &self.u
    }

    pub fn sigma(&self) -> &Array1<f64> {
        &self.sigma
    }

    pub fn v(&self) -> &Array2<f64> {
        &self.v
    }

    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    /// Number of retained singular triplets.
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Keep the leading `r` singular triplets. `total_energy` is preserved.
    pub fn truncate(&self, r: usize) -> Result<Decomposition> {
        if r == 0 || r > self.rank() {
            return Err(SvdError::InvalidRank { requested: r, available: self.rank() });
        }
        Ok(Decomposition {
            u: self.u.slice(ndarray::s![.., ..r]).to_owned(),
            sigma: self.sigma.slice(ndarray::s![..r]).to_owned(),
            v: self.v.slice(ndarray::s![.., ..r]).to_owned(),
            total_energy: self.total_energy,
        })
    }

    /// Principal components `Phi = U * diag(sigma)`; column i has norm sigma_i.
    pub fn principal_components(&self) -> Array2<f64> {
        let mut phi = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            phi.column_mut(j).mapv_inplace(|x| x * s);
        }
        phi
    }

    /// Principal directions `A = V`.
    pub fn principal_directions(&self) -> Array2<f64> {
        self.v.clone()
    }

    /// Share of total energy captured by the leading `k` modes, sigma^2 convention.
    pub fn cumulative_energy(&self, k: usize) -> Result<f64> {
        self.cumulative_energy_with(k, EnergyConvention::SquaredSingularValues)
    }

    /// Cumulative energy under an explicit convention.
    ///
    /// The sigma^2 share is taken against `total_energy` (the full spectrum,
    /// even after truncation). The sigma share is defined over the stored
    /// spectrum and is meaningful on untruncated decompositions.
    pub fn cumulative_energy_with(&self, k: usize, conv: EnergyConvention) -> Result<f64> {
        if k == 0 || k > self.rank() {
            return Err(SvdError::InvalidRank { requested: k, available: self.rank() });
        }
        Ok(match conv {
            EnergyConvention::SquaredSingularValues => {
                if self.total_energy == 0.0 {
                    1.0
                } else {
                    self.sigma.iter().take(k).map(|s| s * s).sum::<f64>() / self.total_energy
                }
            }
            EnergyConvention::SingularValues => {
                let total: f64 = self.sigma.iter().sum();
                if total == 0.0 {
                    1.0
                } else {
                    self.sigma.iter().take(k).sum::<f64>() / total
                }
            }
        })
    }

    /// Smallest k whose cumulative energy reaches `threshold` (sigma^2 convention).
    pub fn rank_for_energy(&self, threshold: f64) -> Result<EnergyRank> {
        self.rank_for_energy_with(threshold, EnergyConvention::SquaredSingularValues)
    }

    pub fn rank_for_energy_with(&self, threshold: f64, conv: EnergyConvention) -> Result<EnergyRank> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(SvdError::InvalidData(format!(
                "energy threshold {threshold} outside (0, 1]"
            )));
        }
        for k in 1..=self.rank() {
            if self.cumulative_energy_with(k, conv)? >= threshold {
                return Ok(EnergyRank { rank: k, reached: true });
            }
        }
        Ok(EnergyRank { rank: self.rank(), reached: false })
    }
}

/// Undo the per-column preprocessing on a low-rank product:
/// column j of the result is `(Phi * A^T)_j * d_j + c_j`.
pub fn reconstruct(phi: &Array2<f64>, a: &Array2<f64>, prep: &Preprocessing) -> Result<Array2<f64>> {
    if phi.ncols() != a.ncols() || phi.ncols() == 0 {
        return Err(SvdError::InvalidShape(format!(
            "rank mismatch: Phi has {} columns, A has {}",
            phi.ncols(),
            a.ncols()
        )));
    }
    if prep.centering().len() != a.nrows() {
        return Err(SvdError::InvalidShape(format!(
            "preprocessing is for {} columns but A has {} rows",
            prep.centering().len(),
            a.nrows()
        )));
    }
    let mut out = phi.dot(&a.t());
    for (j, mut col) in out.columns_mut().into_iter().enumerate() {
        let d = prep.scaling()[j];
        let c = prep.centering()[j];
        col.mapv_inplace(|x| x * d + c);
    }
    Ok(out)
}
