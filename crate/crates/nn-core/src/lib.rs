//! Dense feed-forward networks with reverse-mode gradients, Adam
//! optimization, MSE training, min-max feature scaling, and plain-text model
//! persistence. Everything is double precision and deterministic under a
//! fixed seed.
//!
//! A `DenseNet` is immutable during inference and safe to share across
//! threads; training mutates a single network and its optimizer state.

mod activation;
mod adam;
mod error;
mod net;
mod persist;
mod rng;
mod scaler;
mod train;

pub use activation::Activation;
pub use adam::{AdamParams, AdamState, ScalarAdam};
pub use error::{NnError, Result};
pub use net::{grad, mse_loss_grad, DenseNet, Layer, NetGrads, Trace};
pub use persist::{
    format_f64, load_densenet, read_densenet, save_densenet, write_densenet, LineReader,
    DENSENET_FORMAT_VERSION,
};
pub use rng::stream_rng;
pub use scaler::MinMaxScaler;
pub use train::{train, Dataset, LossHistory, TrainConfig};

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, arr2, Array1, Array2};

    fn identity_net(w: f64, b: f64) -> DenseNet {
        DenseNet::from_layers(vec![Layer {
            weights: arr2(&[[w]]),
            biases: arr1(&[b]),
            activation: Activation::Identity,
        }])
        .unwrap()
    }

    #[test]
    fn forward_identity_layer_passes_through() {
        let net = DenseNet::from_layers(vec![Layer {
            weights: Array2::eye(3),
            biases: Array1::zeros(3),
            activation: Activation::Identity,
        }])
        .unwrap();
        let x = arr1(&[0.5, -1.0, 2.0]);
        assert_eq!(net.forward(&x).unwrap(), x);
    }

    #[test]
    fn forward_tanh_at_zero() {
        let net = DenseNet::from_layers(vec![Layer {
            weights: arr2(&[[1.0]]),
            biases: arr1(&[0.0]),
            activation: Activation::Tanh,
        }])
        .unwrap();
        assert_eq!(net.forward(&arr1(&[0.0])).unwrap(), arr1(&[0.0]));
    }

    #[test]
    fn forward_two_layer_hand_evaluated() {
        let net = DenseNet::from_layers(vec![
            Layer {
                weights: arr2(&[[1.0, 0.0], [0.0, 1.0]]),
                biases: arr1(&[0.5, -0.5]),
                activation: Activation::Tanh,
            },
            Layer {
                weights: arr2(&[[1.0, 1.0]]),
                biases: arr1(&[0.25]),
                activation: Activation::Identity,
            },
        ])
        .unwrap();
        let out = net.forward(&arr1(&[0.25, 0.5])).unwrap();
        let expected = 0.75f64.tanh() + 0.0f64.tanh() + 0.25;
        assert!((out[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let net = identity_net(1.0, 0.0);
        assert!(matches!(net.forward(&arr1(&[1.0, 2.0])), Err(NnError::InvalidShape(_))));
    }

    #[test]
    fn grad_is_zero_on_perfect_fit() {
        let mut rng = stream_rng(1, "init");
        let net =
            DenseNet::glorot(&[2, 4, 2], Activation::Tanh, Activation::Identity, &mut rng)
                .unwrap();
        let x = arr2(&[[0.3, -0.1], [1.0, 0.4], [-0.6, 0.9]]);
        let y = net.forward_batch(&x).unwrap();
        let (grads, loss) = grad(&net, &x, &y).unwrap();
        assert!(loss < 1e-30);
        assert!(grads.max_abs() < 1e-12);
    }

    #[test]
    fn grad_single_linear_neuron_closed_form() {
        let (w, b, x, y) = (0.7, -0.2, 1.3, 0.5);
        let net = identity_net(w, b);
        let (grads, _) = grad(&net, &arr2(&[[x]]), &arr2(&[[y]])).unwrap();
        let resid = w * x + b - y;
        assert!((grads.layers[0].0[[0, 0]] - 2.0 * resid * x).abs() < 1e-12);
        assert!((grads.layers[0].1[0] - 2.0 * resid).abs() < 1e-12);
    }

    /// Central finite differences against the reverse-mode gradient.
    fn finite_diff_check(net: &DenseNet, x: &Array2<f64>, y: &Array2<f64>) {
        let (grads, _) = grad(net, x, y).unwrap();
        let analytic = grads.flat();
        let params = net.params_flat();
        let h = 1e-6;
        // below ~1e-6 of the gradient scale the h^2 truncation term of the
        // central difference dominates and the comparison is meaningless
        let floor = (1e-8f64).max(1e-6 * grads.max_abs());
        for (i, &g) in analytic.iter().enumerate() {
            if g.abs() <= floor {
                continue;
            }
            let mut p = params.clone();
            p[i] += h;
            let mut plus = net.clone();
            plus.set_params_flat(&p).unwrap();
            p[i] -= 2.0 * h;
            let mut minus = net.clone();
            minus.set_params_flat(&p).unwrap();
            let lp = mse_loss_grad(&plus.forward_batch(x).unwrap(), y).unwrap().0;
            let lm = mse_loss_grad(&minus.forward_batch(x).unwrap(), y).unwrap().0;
            let fd = (lp - lm) / (2.0 * h);
            assert!(
                ((fd - g) / g).abs() < 1e-5,
                "param {i}: analytic {g}, finite difference {fd}"
            );
        }
    }

    #[test]
    fn grad_matches_finite_differences_random_nets() {
        let mut rng = stream_rng(99, "init");
        for trial in 0..20 {
            let depth = 1 + trial % 4;
            let width = 2 + (trial * 3) % 15;
            let mut dims = vec![2];
            dims.extend(std::iter::repeat(width).take(depth));
            dims.push(2);
            // smooth activations only: finite differences are meaningless at a
            // relu kink, which gets its own test below
            let hidden = Activation::Tanh;
            let output = if trial % 3 == 0 { Activation::Exp } else { Activation::Identity };
            let net = DenseNet::glorot(&dims, hidden, output, &mut rng).unwrap();
            let x = Array2::from_shape_fn((5, 2), |_| {
                rand::Rng::random_range(&mut rng, -1.0..1.0)
            });
            // small residuals keep the loss low enough that the finite
            // difference is not drowned by cancellation at h = 1e-6
            let y = net.forward_batch(&x).unwrap()
                + Array2::from_shape_fn((5, 2), |_| {
                    rand::Rng::random_range(&mut rng, -0.05..0.05)
                });
            finite_diff_check(&net, &x, &y);
        }
    }

    #[test]
    fn grad_relu_away_from_kink() {
        // fixed weights keep every pre-activation far from zero, where the
        // relu derivative is well defined
        let net = DenseNet::from_layers(vec![
            Layer {
                weights: arr2(&[[1.0], [-1.0]]),
                biases: arr1(&[2.0, 2.0]),
                activation: Activation::Relu,
            },
            Layer {
                weights: arr2(&[[0.5, -0.25]]),
                biases: arr1(&[0.1]),
                activation: Activation::Identity,
            },
        ])
        .unwrap();
        let x = arr2(&[[0.5], [-0.3], [1.1]]);
        let y = arr2(&[[0.2], [0.9], [-0.4]]);
        finite_diff_check(&net, &x, &y);
    }

    #[test]
    fn adam_zero_gradient_leaves_parameters() {
        let mut net = identity_net(0.4, 0.1);
        let mut adam = AdamState::new(&net, AdamParams::default());
        let before = net.params_flat();
        let grads = NetGrads::zeros_like(&net);
        adam.apply(&mut net, &grads);
        assert_eq!(net.params_flat(), before);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn adam_first_step_closed_form() {
        // g = 1, lr = 0.1: bias-corrected m_hat = v_hat = 1, so
        // delta = -0.1 / (1 + 1e-8)
        let mut net = identity_net(0.0, 0.0);
        let mut adam = AdamState::new(
            &net,
            AdamParams { lr: 0.1, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 },
        );
        let grads = NetGrads {
            layers: vec![(arr2(&[[1.0]]), arr1(&[0.0]))],
        };
        adam.apply(&mut net, &grads);
        let expected = -0.1 / (1.0 + 1e-8);
        assert!((net.layers()[0].weights()[[0, 0]] - expected).abs() < 1e-12);
        assert_eq!(net.layers()[0].biases()[0], 0.0);
    }

    #[test]
    fn adam_matches_scalar_reference_on_random_draws() {
        let mut rng = stream_rng(5, "sampling");
        let params = AdamParams::default();
        let mut net = identity_net(0.3, 0.0);
        let mut adam = AdamState::new(&net, params);
        // scalar reference state
        let (mut m, mut v) = (0.0f64, 0.0f64);
        let mut theta = 0.3f64;
        for step in 1..=100u64 {
            let g: f64 = rand::Rng::random_range(&mut rng, -2.0..2.0);
            m = params.beta1 * m + (1.0 - params.beta1) * g;
            v = params.beta2 * v + (1.0 - params.beta2) * g * g;
            let m_hat = m / (1.0 - params.beta1.powi(step as i32));
            let v_hat = v / (1.0 - params.beta2.powi(step as i32));
            theta -= params.lr * m_hat / (v_hat.sqrt() + params.epsilon);
            let grads = NetGrads { layers: vec![(arr2(&[[g]]), arr1(&[0.0]))] };
            adam.apply(&mut net, &grads);
            let got = net.layers()[0].weights()[[0, 0]];
            assert!((got - theta).abs() < 1e-12, "step {step}: {got} vs {theta}");
        }
    }

    fn line_dataset() -> Dataset {
        let x = Array2::from_shape_fn((100, 1), |(i, _)| i as f64 / 99.0);
        let y = x.mapv(|v| 2.0 * v);
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn train_fits_scaled_line() {
        let mut rng = stream_rng(2, "init");
        let net =
            DenseNet::glorot(&[1, 1], Activation::Identity, Activation::Identity, &mut rng)
                .unwrap();
        let cfg = TrainConfig {
            epochs: 1200,
            batch_size: 100,
            lr_schedule: vec![(0, 0.1), (300, 0.01), (600, 1e-3), (900, 1e-5)],
            seed: 2,
            ..TrainConfig::default()
        };
        let (net, history) = train(net, &line_dataset(), &cfg).unwrap();
        assert!(*history.train.last().unwrap() < 1e-8, "{:?}", history.train.last());
        assert!((net.layers()[0].weights()[[0, 0]] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn train_zero_epochs_returns_unchanged() {
        let net = identity_net(0.9, -0.4);
        let before = net.params_flat();
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        let (net, history) = train(net, &line_dataset(), &cfg).unwrap();
        assert_eq!(net.params_flat(), before);
        assert!(history.train.is_empty());
    }

    #[test]
    fn train_is_deterministic_under_seed() {
        let make = || {
            let mut rng = stream_rng(77, "init");
            DenseNet::glorot(&[1, 4, 1], Activation::Tanh, Activation::Identity, &mut rng)
                .unwrap()
        };
        let cfg = TrainConfig {
            epochs: 50,
            batch_size: 16,
            seed: 77,
            validation_fraction: 0.2,
            ..TrainConfig::default()
        };
        let (a, ha) = train(make(), &line_dataset(), &cfg).unwrap();
        let (b, hb) = train(make(), &line_dataset(), &cfg).unwrap();
        assert_eq!(a.params_flat(), b.params_flat());
        assert_eq!(ha.train, hb.train);
        assert_eq!(ha.validation, hb.validation);
    }

    #[test]
    fn train_diverges_cleanly() {
        let net = identity_net(1.0, 0.0);
        let x = arr2(&[[1e300], [1e300]]);
        let y = arr2(&[[0.0], [0.0]]);
        let data = Dataset::new(x, y).unwrap();
        let cfg = TrainConfig {
            epochs: 5,
            lr_schedule: vec![(0, 1e280)],
            ..TrainConfig::default()
        };
        assert!(matches!(train(net, &data, &cfg), Err(NnError::DivergedAtEpoch(_))));
    }

    #[test]
    fn param_count_matches_hand_computation() {
        let mut rng = stream_rng(0, "init");
        // 1 -> 32 -> 32 -> 32 -> 2: the trunk used for the damped-oscillator runs
        let trunk =
            DenseNet::glorot(&[1, 32, 32, 32, 2], Activation::Tanh, Activation::Identity, &mut rng)
                .unwrap();
        assert_eq!(trunk.param_count(), 64 + 1056 + 1056 + 66);
        // 2 -> 32^3 -> 2 branch
        let branch =
            DenseNet::glorot(&[2, 32, 32, 32, 2], Activation::Tanh, Activation::Identity, &mut rng)
                .unwrap();
        assert_eq!(branch.param_count(), 96 + 1056 + 1056 + 66);
        // branch + trunk + dot-product bias, twice (two state variables) = 9,034
        assert_eq!(2 * (trunk.param_count() + branch.param_count() + 1), 9034);
        // 1 -> 32^3 -> 8 trunk and branch plus bias = 4,881
        let t8 =
            DenseNet::glorot(&[1, 32, 32, 32, 8], Activation::Tanh, Activation::Identity, &mut rng)
                .unwrap();
        assert_eq!(2 * t8.param_count() + 1, 4881);
    }

    #[test]
    fn persist_roundtrip_is_exact() {
        let mut rng = stream_rng(123, "init");
        let net = DenseNet::glorot(&[3, 7, 5, 2], Activation::Tanh, Activation::Exp, &mut rng)
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.txt");
        save_densenet(&path, &net).unwrap();
        let loaded = load_densenet(&path).unwrap();
        assert_eq!(net.params_flat(), loaded.params_flat());
        assert_eq!(
            net.layers().iter().map(|l| l.activation()).collect::<Vec<_>>(),
            loaded.layers().iter().map(|l| l.activation()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn persist_reports_line_numbers() {
        let text = "densenet 1\nlayers 1\nlayer 2 1 tanh\n1.0\nnot_a_number\n0.0 0.0\n";
        let err = read_densenet(&mut LineReader::new(text)).unwrap_err();
        match err {
            NnError::ParseError { line, .. } => assert_eq!(line, 5),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
