use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{CasegenError, Result};

/// Latin hypercube sample: `n` points in the box given by `bounds`, exactly
/// one point per stratum in every dimension. Deterministic for a given RNG
/// state.
pub fn lhs_sample(
    bounds: &[(f64, f64)],
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(CasegenError::InvalidBounds("need at least one sample".into()));
    }
    for &(lo, hi) in bounds {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(CasegenError::InvalidBounds(format!("({lo}, {hi})")));
        }
    }
    let mut points = vec![vec![0.0; bounds.len()]; n];
    for (j, &(lo, hi)) in bounds.iter().enumerate() {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        for (i, point) in points.iter_mut().enumerate() {
            let u: f64 = rng.random();
            point[j] = lo + (strata[i] as f64 + u) / n as f64 * (hi - lo);
        }
    }
    Ok(points)
}
