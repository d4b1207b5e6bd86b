use crate::error::{CasegenError, Result};

/// Closed-form trajectory of the unforced mass-spring-damper
/// `m x'' + c x' + k x = 0`, `x(0) = x0`, `x'(0) = v0`, evaluated on `times`.
///
/// Solved through the eigenvalues of the companion matrix; the under-, over-,
/// and critically damped branches are all handled.
pub fn msd_solve(
    x0: f64,
    v0: f64,
    k: f64,
    c: f64,
    m: f64,
    times: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(m > 0.0) || k < 0.0 || c < 0.0 {
        return Err(CasegenError::InvalidData(format!("bad msd constants k={k} c={c} m={m}")));
    }
    if !times.windows(2).all(|w| w[0] <= w[1]) {
        return Err(CasegenError::InvalidData("times must be sorted".into()));
    }
    let zeta = c / (2.0 * m);
    let k_over_m = k / m;
    let disc = zeta * zeta - k_over_m;
    let scale = zeta * zeta + k_over_m + 1.0;

    let mut xs = Vec::with_capacity(times.len());
    let mut vs = Vec::with_capacity(times.len());
    if disc.abs() <= 1e-12 * scale {
        // repeated root r = -zeta: x = (A + B t) e^{rt}
        let r = -zeta;
        let a = x0;
        let b = v0 - r * x0;
        for &t in times {
            let e = (r * t).exp();
            xs.push((a + b * t) * e);
            vs.push((b + r * (a + b * t)) * e);
        }
    } else if disc < 0.0 {
        // underdamped: x = e^{-zeta t} (A cos wt + B sin wt)
        let w = (-disc).sqrt();
        let a = x0;
        let b = (v0 + zeta * x0) / w;
        for &t in times {
            let e = (-zeta * t).exp();
            let (sin, cos) = (w * t).sin_cos();
            xs.push(e * (a * cos + b * sin));
            vs.push(e * ((-zeta * a + w * b) * cos + (-zeta * b - w * a) * sin));
        }
    } else {
        // overdamped: x = C1 e^{r1 t} + C2 e^{r2 t}
        let root = disc.sqrt();
        let r1 = -zeta + root;
        let r2 = -zeta - root;
        let c1 = (v0 - r2 * x0) / (r1 - r2);
        let c2 = x0 - c1;
        for &t in times {
            let (e1, e2) = ((r1 * t).exp(), (r2 * t).exp());
            xs.push(c1 * e1 + c2 * e2);
            vs.push(c1 * r1 * e1 + c2 * r2 * e2);
        }
    }
    Ok((xs, vs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rk4::rk4_integrate;

    const K: f64 = 3.0;
    const C: f64 = 0.5;
    const M: f64 = 1.0;

    #[test]
    fn equilibrium_stays_at_rest() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.3).collect();
        let (xs, vs) = msd_solve(0.0, 0.0, K, C, M, &t).unwrap();
        assert!(xs.iter().chain(vs.iter()).all(|&v| v == 0.0));
    }

    #[test]
    fn energy_is_nonincreasing_when_damped() {
        let t: Vec<f64> = (0..500).map(|i| i as f64 * 0.03).collect();
        let (xs, vs) = msd_solve(1.0, -2.0, K, C, M, &t).unwrap();
        let energy: Vec<f64> =
            xs.iter().zip(&vs).map(|(x, v)| 0.5 * K * x * x + 0.5 * M * v * v).collect();
        for w in energy.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_rk4() {
        let times: Vec<f64> = (0..=150).map(|i| i as f64 * 0.1).collect();
        let (xs, vs) = msd_solve(1.0, 0.0, K, C, M, &times).unwrap();
        let traj = rk4_integrate(
            |_, s| vec![s[1], -K / M * s[0] - C / M * s[1]],
            &[1.0, 0.0],
            &times,
            1e-4,
        )
        .unwrap();
        for (i, s) in traj.iter().enumerate() {
            assert!((s[0] - xs[i]).abs() < 1e-8, "x at t={}", times[i]);
            assert!((s[1] - vs[i]).abs() < 1e-8, "v at t={}", times[i]);
        }
        // paper constants give an underdamped motion at angular frequency sqrt(2.9375)
        let w_expected = (K / M - (C / (2.0 * M)).powi(2)).sqrt();
        assert!((w_expected * w_expected - 2.9375).abs() < 1e-12);
    }

    #[test]
    fn overdamped_and_critical_branches_match_rk4() {
        let times: Vec<f64> = (0..=60).map(|i| i as f64 * 0.1).collect();
        for (k, c) in [(1.0, 4.0), (1.0, 2.0)] {
            let (xs, _) = msd_solve(0.5, -1.0, k, c, 1.0, &times).unwrap();
            let traj = rk4_integrate(
                |_, s| vec![s[1], -k * s[0] - c * s[1]],
                &[0.5, -1.0],
                &times,
                1e-4,
            )
            .unwrap();
            for (i, s) in traj.iter().enumerate() {
                assert!((s[0] - xs[i]).abs() < 1e-8, "k={k} c={c} t={}", times[i]);
            }
        }
    }

    #[test]
    fn rk4_error_scales_with_fourth_order() {
        // Richardson ratio on the paper system: halving h divides the error by ~16
        let times = [0.0, 2.0];
        let exact = msd_solve(1.0, 0.5, K, C, M, &times).unwrap().0[1];
        let err = |h: f64| {
            let traj = rk4_integrate(
                |_, s| vec![s[1], -K / M * s[0] - C / M * s[1]],
                &[1.0, 0.5],
                &times,
                h,
            )
            .unwrap();
            (traj[1][0] - exact).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((12.8..=19.2).contains(&ratio), "order-4 ratio was {ratio}");
    }
}
