//! Property checks for the decomposition: optimality against random
//! projections, factor orthonormality, and energy bookkeeping.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use svd_core::{svd, CenterMethod, EnergyConvention, ScaleMethod};

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, m), |_| rng.random_range(-1.0..1.0))
}

fn fro(x: &Array2<f64>) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Orthonormalize the columns of x in place (modified Gram-Schmidt); returns
/// false if a column degenerates.
fn orthonormalize(x: &mut Array2<f64>) -> bool {
    let (n, m) = x.dim();
    for j in 0..m {
        for k in 0..j {
            let proj: f64 = (0..n).map(|i| x[[i, j]] * x[[i, k]]).sum();
            for i in 0..n {
                x[[i, j]] -= proj * x[[i, k]];
            }
        }
        let norm: f64 = x.column(j).iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return false;
        }
        x.column_mut(j).mapv_inplace(|v| v / norm);
    }
    true
}

#[test]
fn eckart_young_dominates_random_projections() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..50 {
        let x = random_matrix(&mut rng, 20, 10);
        let dec = svd(&x).unwrap();
        for r in 1..=10 {
            let t = dec.truncate(r).unwrap();
            let best = fro(&(&x - &t.principal_components().dot(&t.principal_directions().t())));
            for _ in 0..100 {
                let mut q = random_matrix(&mut rng, 20, r);
                if !orthonormalize(&mut q) {
                    continue;
                }
                let proj = q.dot(&q.t().dot(&x));
                let err = fro(&(&x - &proj));
                assert!(
                    best <= err + 1e-10,
                    "rank-{r} truncation beaten by a random projection: {best} > {err}"
                );
            }
        }
    }
}

#[test]
fn factors_stay_orthonormal_after_truncation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..20 {
        let n = 5 + (trial % 4) * 7;
        let m = 3 + (trial % 5) * 2;
        let x = random_matrix(&mut rng, n, m);
        let dec = svd(&x).unwrap();
        for d in [dec.truncate(1).unwrap(), dec.truncate(dec.rank()).unwrap(), dec] {
            for (label, f) in [("U", d.u()), ("V", d.v())] {
                let g = f.t().dot(f);
                for i in 0..g.nrows() {
                    for j in 0..g.ncols() {
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!(
                            (g[[i, j]] - want).abs() < 1e-10,
                            "{label}^T {label} deviates at ({i},{j}): {}",
                            g[[i, j]]
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn residual_energy_matches_dropped_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let x = random_matrix(&mut rng, 15, 8);
        let dec = svd(&x).unwrap();
        let total: f64 = dec.sigma().iter().map(|s| s * s).sum();
        for r in 1..dec.rank() {
            let t = dec.truncate(r).unwrap();
            let resid = &x - &t.principal_components().dot(&t.principal_directions().t());
            let resid_sq: f64 = resid.iter().map(|v| v * v).sum();
            let dropped: f64 = dec.sigma().iter().skip(r).map(|s| s * s).sum();
            assert!((resid_sq - dropped).abs() <= 1e-8 * total);
        }
    }
}

#[test]
fn reconstruction_error_below_1e10_relative() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let x = random_matrix(&mut rng, 30, 12);
        let dec = svd(&x).unwrap();
        let rec = dec.principal_components().dot(&dec.principal_directions().t());
        assert!(fro(&(&x - &rec)) / fro(&x) < 1e-10);
    }
}

#[test]
fn center_scale_then_reconstruct_roundtrips() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let raw = random_matrix(&mut rng, 20, 6);
        let snap = svd_core::SnapshotMatrix::new(
            raw.clone(),
            svd_core::AggregationKind::ScenarioAggregated,
            Array1::linspace(0.0, 1.0, 20),
            svd_core::ColumnMeta::Scenarios(random_matrix(&mut rng, 6, 2)),
        )
        .unwrap();
        let (pre, prep) = snap.center_scale(CenterMethod::Mean, ScaleMethod::Auto).unwrap();
        let dec = svd(pre.values()).unwrap();
        let rec =
            svd_core::reconstruct(&dec.principal_components(), &dec.principal_directions(), &prep)
                .unwrap();
        assert!(fro(&(&raw - &rec)) / fro(&raw) < 1e-9);
    }
}

#[test]
fn cumulative_energy_monotone_and_complete() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let x = random_matrix(&mut rng, 12, 9);
        let dec = svd(&x).unwrap();
        for conv in [EnergyConvention::SquaredSingularValues, EnergyConvention::SingularValues] {
            let mut prev = 0.0;
            for k in 1..=dec.rank() {
                let e = dec.cumulative_energy_with(k, conv).unwrap();
                assert!(e >= prev - 1e-14);
                prev = e;
            }
            assert!((prev - 1.0).abs() < 1e-12);
        }
    }
}
