use crate::error::{CasegenError, Result};

/// Classical fixed-step RK4. Integrates `dx/dt = f(t, x)` from `times[0]`,
/// recording the state at every entry of `times`; each interval is split into
/// equal substeps no longer than `max_step`.
pub fn rk4_integrate(
    f: impl Fn(f64, &[f64]) -> Vec<f64>,
    x0: &[f64],
    times: &[f64],
    max_step: f64,
) -> Result<Vec<Vec<f64>>> {
    if times.is_empty() {
        return Err(CasegenError::InvalidData("empty time grid".into()));
    }
    if !times.windows(2).all(|w| w[0] <= w[1]) {
        return Err(CasegenError::InvalidData("times must be sorted".into()));
    }
    if !(max_step > 0.0) {
        return Err(CasegenError::InvalidData("max_step must be positive".into()));
    }
    let dim = x0.len();
    let mut state = x0.to_vec();
    let mut out = Vec::with_capacity(times.len());
    out.push(state.clone());
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let span = t1 - t0;
        let n_sub = (span / max_step).ceil().max(1.0) as usize;
        let h = span / n_sub as f64;
        let mut t = t0;
        for _ in 0..n_sub {
            let k1 = f(t, &state);
            let k2 = f(t + 0.5 * h, &offset(&state, &k1, 0.5 * h));
            let k3 = f(t + 0.5 * h, &offset(&state, &k2, 0.5 * h));
            let k4 = f(t + h, &offset(&state, &k3, h));
            for i in 0..dim {
                state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += h;
            if state.iter().any(|v| !v.is_finite()) {
                return Err(CasegenError::NumericalFailure { t });
            }
        }
        out.push(state.clone());
    }
    Ok(out)
}

fn offset(x: &[f64], k: &[f64], h: f64) -> Vec<f64> {
    x.iter().zip(k).map(|(xi, ki)| xi + h * ki).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_stays_constant() {
        let traj =
            rk4_integrate(|_, _| vec![0.0, 0.0], &[1.5, -2.0], &[0.0, 1.0, 2.0], 0.1).unwrap();
        for s in &traj {
            assert_eq!(s, &vec![1.5, -2.0]);
        }
    }

    #[test]
    fn exponential_to_1e10() {
        let traj = rk4_integrate(|_, x| vec![x[0]], &[1.0], &[0.0, 1.0], 1e-3).unwrap();
        assert!((traj[1][0] - std::f64::consts::E).abs() < 1e-10);
    }

    #[test]
    fn diverging_state_reports_time() {
        // dx/dt = x^2 from x0=1 blows up at t = 1
        let res = rk4_integrate(|_, x| vec![x[0] * x[0]], &[1.0], &[0.0, 2.0], 1e-4);
        match res {
            Err(CasegenError::NumericalFailure { t }) => assert!(t > 0.9 && t < 1.1),
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
