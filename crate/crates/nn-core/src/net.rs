use ndarray::{Array1, Array2};
use rand::Rng;

use crate::activation::Activation;
use crate::error::{NnError, Result};

/// One dense layer: `y = act(W x + b)` with `W` stored as [out x in].
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub(crate) weights: Array2<f64>,
    pub(crate) biases: Array1<f64>,
    pub(crate) activation: Activation,
}

impl Layer {
    pub fn new(weights: Array2<f64>, biases: Array1<f64>, activation: Activation) -> Self {
        Self { weights, biases, activation }
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn biases(&self) -> &Array1<f64> {
        &self.biases
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }
}

/// Chain-structured dense feed-forward network.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
}

impl DenseNet {
    /// Build a network from explicit layer sizes: `dims = [in, h1, .., out]`,
    /// hidden layers use `hidden`, the final layer uses `output`. Weights are
    /// Glorot-uniform, biases zero.
    pub fn glorot(
        dims: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(NnError::InvalidShape(format!("bad layer sizes {dims:?}")));
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weights =
                Array2::from_shape_fn((fan_out, fan_in), |_| rng.random_range(-bound..bound));
            let act = if layers.len() + 2 == dims.len() { output } else { hidden };
            layers.push(Layer { weights, biases: Array1::zeros(fan_out), activation: act });
        }
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(NnError::InvalidShape("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].weights.nrows() != pair[1].weights.ncols() {
                return Err(NnError::InvalidShape(format!(
                    "layer output {} does not chain into next input {}",
                    pair[0].weights.nrows(),
                    pair[1].weights.ncols()
                )));
            }
        }
        for l in &layers {
            if l.biases.len() != l.weights.nrows() {
                return Err(NnError::InvalidShape("bias length != layer output".into()));
            }
            if l.weights.iter().chain(l.biases.iter()).any(|v| !v.is_finite()) {
                return Err(NnError::InvalidData("non-finite parameters".into()));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().weights.nrows()
    }

    /// Exact trainable parameter count.
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Zero the final layer's weights and set its biases, so the net outputs
    /// a constant regardless of input. Used to start Pre-Net heads at the
    /// identity frame.
    pub fn pin_output(&mut self, biases: &[f64]) -> Result<()> {
        let last = self.layers.last_mut().unwrap();
        if biases.len() != last.biases.len() {
            return Err(NnError::InvalidShape("pin_output bias length".into()));
        }
        last.weights.fill(0.0);
        for (b, &v) in last.biases.iter_mut().zip(biases) {
            *b = v;
        }
        Ok(())
    }

    /// All parameters as one vector: per layer, weights row-major then biases.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.weights.iter());
            out.extend(l.biases.iter());
        }
        out
    }

    pub fn set_params_flat(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(NnError::InvalidShape(format!(
                "{} parameters supplied, network has {}",
                params.len(),
                self.param_count()
            )));
        }
        let mut it = params.iter();
        for l in &mut self.layers {
            for w in l.weights.iter_mut() {
                *w = *it.next().unwrap();
            }
            for b in l.biases.iter_mut() {
                *b = *it.next().unwrap();
            }
        }
        Ok(())
    }

    pub(crate) fn layer_weights_mut(&mut self, i: usize) -> &mut [f64] {
        self.layers[i].weights.as_slice_mut().unwrap()
    }

    pub(crate) fn layer_biases_mut(&mut self, i: usize) -> &mut [f64] {
        self.layers[i].biases.as_slice_mut().unwrap()
    }

    pub fn forward(&self, x: &Array1<f64>) -> Result<Array1<f64>> {
        if x.len() != self.input_dim() {
            return Err(NnError::InvalidShape(format!(
                "input length {} != input_dim {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut a = x.clone();
        for l in &self.layers {
            let mut z = l.weights.dot(&a);
            z += &l.biases;
            z.mapv_inplace(|v| l.activation.apply(v));
            a = z;
        }
        Ok(a)
    }

    /// Batched forward: rows of `x` are samples.
    pub fn forward_batch(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        Ok(self.trace(x)?.output().clone())
    }

    /// Forward pass retaining pre- and post-activation values for backprop.
    pub fn trace(&self, x: &Array2<f64>) -> Result<Trace> {
        if x.ncols() != self.input_dim() {
            return Err(NnError::InvalidShape(format!(
                "batch input width {} != input_dim {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len() + 1);
        post.push(x.clone());
        for l in &self.layers {
            let mut z = post.last().unwrap().dot(&l.weights.t());
            z += &l.biases;
            let a = z.mapv(|v| l.activation.apply(v));
            if !a.sum().is_finite() {
                return Err(NnError::NumericalFailure("forward pass".into()));
            }
            pre.push(z);
            post.push(a);
        }
        Ok(Trace { pre, post })
    }

    /// Reverse-mode pass. `out_grad` is dL/d(output), one row per sample.
    /// Returns the parameter gradients and dL/d(input) for chaining into an
    /// upstream block.
    pub fn backward(&self, trace: &Trace, out_grad: &Array2<f64>) -> (NetGrads, Array2<f64>) {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut da = out_grad.clone();
        for (idx, l) in self.layers.iter().enumerate().rev() {
            let z = &trace.pre[idx];
            let a = &trace.post[idx + 1];
            // dz = da (*) act'(z)
            let mut dz = da;
            ndarray::Zip::from(&mut dz).and(z).and(a).for_each(|g, &zv, &av| {
                *g *= l.activation.derivative(zv, av);
            });
            let dw = dz.t().dot(&trace.post[idx]);
            // dot() may hand back an F-order array for transposed operands;
            // the optimizer indexes gradients as contiguous slices
            let dw = if dw.is_standard_layout() {
                dw
            } else {
                Array2::from_shape_vec(dw.dim(), dw.iter().copied().collect()).unwrap()
            };
            let db = dz.sum_axis(ndarray::Axis(0));
            da = dz.dot(&l.weights);
            grads.push((dw, db));
        }
        grads.reverse();
        (NetGrads { layers: grads }, da)
    }
}

/// Saved activations from a batched forward pass.
pub struct Trace {
    pre: Vec<Array2<f64>>,
    post: Vec<Array2<f64>>,
}

impl Trace {
    pub fn output(&self) -> &Array2<f64> {
        self.post.last().unwrap()
    }
}

/// Parameter-shaped gradients, one (dW, db) pair per layer.
#[derive(Debug, Clone)]
pub struct NetGrads {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

impl NetGrads {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| (Array2::zeros(l.weights.dim()), Array1::zeros(l.biases.len())))
                .collect(),
        }
    }

    pub fn add(&mut self, other: &NetGrads) {
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            *w += ow;
            *b += ob;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for (w, b) in &mut self.layers {
            w.mapv_inplace(|v| v * s);
            b.mapv_inplace(|v| v * s);
        }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for (w, b) in &self.layers {
            for v in w.iter().chain(b.iter()) {
                m = m.max(v.abs());
            }
        }
        m
    }

    /// Gradients flattened in the same order as `DenseNet::params_flat`.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in &self.layers {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }
}

/// MSE loss and its gradient over a batch: `1/(N * out_dim) * sum |f(x) - y|^2`.
pub fn mse_loss_grad(pred: &Array2<f64>, targets: &Array2<f64>) -> Result<(f64, Array2<f64>)> {
    if pred.dim() != targets.dim() {
        return Err(NnError::InvalidShape(format!(
            "predictions {:?} vs targets {:?}",
            pred.dim(),
            targets.dim()
        )));
    }
    let count = (pred.nrows() * pred.ncols()) as f64;
    let diff = pred - targets;
    let loss = diff.iter().map(|v| v * v).sum::<f64>() / count;
    let grad = diff.mapv(|v| 2.0 * v / count);
    Ok((loss, grad))
}

/// Gradient of the batch MSE with respect to every parameter of `net`.
pub fn grad(net: &DenseNet, x: &Array2<f64>, y: &Array2<f64>) -> Result<(NetGrads, f64)> {
    if x.nrows() == 0 {
        return Err(NnError::InvalidData("empty batch".into()));
    }
    let trace = net.trace(x)?;
    let (loss, out_grad) = mse_loss_grad(trace.output(), y)?;
    if !loss.is_finite() {
        return Err(NnError::NumericalFailure("loss".into()));
    }
    let (grads, _) = net.backward(&trace, &out_grad);
    Ok((grads, loss))
}
