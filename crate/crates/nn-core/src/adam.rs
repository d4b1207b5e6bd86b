use ndarray::{Array1, Array2};

use crate::net::{DenseNet, NetGrads};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Adam accumulators mirroring one network's parameter set.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<(Array2<f64>, Array1<f64>)>,
    v: Vec<(Array2<f64>, Array1<f64>)>,
    step: u64,
    pub params: AdamParams,
}

impl AdamState {
    pub fn new(net: &DenseNet, params: AdamParams) -> Self {
        let zeros = || {
            net.layers()
                .iter()
                .map(|l| {
                    (Array2::zeros(l.weights().dim()), Array1::<f64>::zeros(l.biases().len()))
                })
                .collect::<Vec<_>>()
        };
        Self { m: zeros(), v: zeros(), step: 0, params }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.params.lr = lr;
    }

    /// One bias-corrected Adam update:
    /// m <- b1 m + (1-b1) g; v <- b2 v + (1-b2) g^2;
    /// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
    pub fn apply(&mut self, net: &mut DenseNet, grads: &NetGrads) {
        self.step += 1;
        let AdamParams { lr, beta1, beta2, epsilon } = self.params;
        let bc1 = 1.0 - beta1.powi(self.step as i32);
        let bc2 = 1.0 - beta2.powi(self.step as i32);
        for (li, (gw, gb)) in grads.layers.iter().enumerate() {
            update(
                self.m[li].0.as_slice_mut().unwrap(),
                self.v[li].0.as_slice_mut().unwrap(),
                net.layer_weights_mut(li),
                gw.as_slice().unwrap(),
                lr,
                beta1,
                beta2,
                epsilon,
                bc1,
                bc2,
            );
            update(
                self.m[li].1.as_slice_mut().unwrap(),
                self.v[li].1.as_slice_mut().unwrap(),
                net.layer_biases_mut(li),
                gb.as_slice().unwrap(),
                lr,
                beta1,
                beta2,
                epsilon,
                bc1,
                bc2,
            );
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn update(
    m: &mut [f64],
    v: &mut [f64],
    theta: &mut [f64],
    g: &[f64],
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..g.len() {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        theta[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
    }
}

/// Adam for a single scalar parameter (e.g. a dot-product bias).
#[derive(Debug, Clone)]
pub struct ScalarAdam {
    m: f64,
    v: f64,
    step: u64,
    pub params: AdamParams,
}

impl ScalarAdam {
    pub fn new(params: AdamParams) -> Self {
        Self { m: 0.0, v: 0.0, step: 0, params }
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.params.lr = lr;
    }

    pub fn apply(&mut self, theta: &mut f64, g: f64) {
        self.step += 1;
        let AdamParams { lr, beta1, beta2, epsilon } = self.params;
        self.m = beta1 * self.m + (1.0 - beta1) * g;
        self.v = beta2 * self.v + (1.0 - beta2) * g * g;
        let m_hat = self.m / (1.0 - beta1.powi(self.step as i32));
        let v_hat = self.v / (1.0 - beta2.powi(self.step as i32));
        *theta -= lr * m_hat / (v_hat.sqrt() + epsilon);
    }
}
