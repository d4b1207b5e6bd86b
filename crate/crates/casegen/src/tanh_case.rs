/// Analytic state of the shifting-tanh system:
/// `x(t) = a tanh(t - b x0) + a tanh(b x0) + x0`,
/// the solution of `dx/dt = a sech^2(b x0 - t)` with `x(0) = x0`.
pub fn tanh_solution(x0: f64, t: f64, a: f64, b: f64) -> f64 {
    a * (t - b * x0).tanh() + a * (b * x0).tanh() + x0
}

/// Right-hand side of the generating ODE.
pub fn tanh_rate(x0: f64, t: f64, a: f64, b: f64) -> f64 {
    let sech = 1.0 / (b * x0 - t).cosh();
    a * sech * sech
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_condition_is_exact() {
        for x0 in [5.0, 7.3, 10.0, -2.0] {
            assert_eq!(tanh_solution(x0, 0.0, 1.0, 1.0), x0);
        }
    }

    #[test]
    fn direct_evaluation() {
        // a = b = 1, x0 = 5, t = 5: tanh(0) + tanh(5) + 5
        let got = tanh_solution(5.0, 5.0, 1.0, 1.0);
        assert!((got - (5.0f64.tanh() + 5.0)).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_ode_rate() {
        let h = 1e-6;
        for x0 in [5.0, 6.7, 9.9] {
            for i in 0..=30 {
                let t = i as f64 * 0.5;
                let fd = (tanh_solution(x0, t + h, 1.0, 1.0)
                    - tanh_solution(x0, t - h, 1.0, 1.0))
                    / (2.0 * h);
                assert!(
                    (fd - tanh_rate(x0, t, 1.0, 1.0)).abs() < 1e-6,
                    "x0={x0} t={t}"
                );
            }
        }
    }
}
