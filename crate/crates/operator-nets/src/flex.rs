use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;

use nn_core::{
    stream_rng, AdamParams, AdamState, DenseNet, LossHistory, NetGrads, Trace, TrainConfig,
};

use crate::dataset::OperatorDataset;
use crate::error::{OperatorError, Result};
use crate::prenet::PreNet;
use crate::scaling::InputScaling;
use crate::spec::{NetSpec, PreNetSpec};

/// DeepONet with a pre-transformation network and scenario-dependent
/// centering: per variable, `sum_i b_i(u) psi_i(y') + c(u)` with
/// `y' = s(u) R(theta(u)) y + ybar(u)`. The centering output replaces the
/// vanilla dot-product bias.
#[derive(Debug, Clone)]
pub struct FlexDeepONet {
    pub(crate) prenet: PreNet,
    pub(crate) vars: Vec<FlexVar>,
    pub(crate) p: usize,
    pub(crate) scaling: InputScaling,
}

#[derive(Debug, Clone)]
pub struct FlexVar {
    pub name: String,
    /// p outputs.
    pub trunk: DenseNet,
    /// p + 1 outputs: b_1..b_p then the centering c.
    pub branch: DenseNet,
}

impl FlexDeepONet {
    pub fn new(prenet: PreNet, vars: Vec<FlexVar>, p: usize, scaling: InputScaling) -> Result<Self> {
        if vars.is_empty() {
            return Err(OperatorError::InvalidSpec("no output variables".into()));
        }
        for v in &vars {
            if v.trunk.output_dim() != p {
                return Err(OperatorError::InvalidSpec(format!(
                    "variable {}: trunk must have {p} outputs",
                    v.name
                )));
            }
            if v.branch.output_dim() != p + 1 {
                return Err(OperatorError::InvalidSpec(format!(
                    "variable {}: branch must have {} outputs (coefficients plus centering)",
                    v.name,
                    p + 1
                )));
            }
            if v.trunk.input_dim() != prenet.n_y() {
                return Err(OperatorError::InvalidSpec(format!(
                    "variable {}: trunk input dimension {} != coordinate dimension {}",
                    v.name,
                    v.trunk.input_dim(),
                    prenet.n_y()
                )));
            }
        }
        Ok(Self { prenet, vars, p, scaling })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn prenet(&self) -> &PreNet {
        &self.prenet
    }

    pub fn vars(&self) -> &[FlexVar] {
        &self.vars
    }

    pub fn variables(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn scaling(&self) -> &InputScaling {
        &self.scaling
    }

    pub fn param_count(&self) -> usize {
        self.prenet.param_count()
            + self
                .vars
                .iter()
                .map(|v| v.trunk.param_count() + v.branch.param_count())
                .sum::<usize>()
    }

    pub fn forward(&self, u: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let u = Array2::from_shape_vec((1, u.len()), u.to_vec())
            .map_err(|e| OperatorError::InvalidShape(e.to_string()))?;
        let y = Array2::from_shape_vec((1, y.len()), y.to_vec())
            .map_err(|e| OperatorError::InvalidShape(e.to_string()))?;
        Ok(self.forward_batch(&u, &y)?.row(0).to_vec())
    }

    pub fn forward_batch(&self, u: &Array2<f64>, y: &Array2<f64>) -> Result<Array2<f64>> {
        let us = self.scaling.scale_u(u)?;
        let ys = self.scaling.scale_y(y)?;
        let pn = self.prenet_forward(&us)?;
        let mut out = Array2::zeros((u.nrows(), self.vars.len()));
        for (j, var) in self.vars.iter().enumerate() {
            let (yp, _) = self.transform_batch(&pn, &ys, j);
            let psi = var.trunk.forward_batch(&yp)?;
            let br = var.branch.forward_batch(&us)?;
            for i in 0..u.nrows() {
                let mut acc = 0.0;
                for k in 0..self.p {
                    acc += br[[i, k]] * psi[[i, k]];
                }
                out[[i, j]] = acc + br[[i, self.p]];
            }
        }
        Ok(out)
    }

    fn prenet_forward(&self, us: &Array2<f64>) -> Result<PreNetBatch> {
        let rotation = self.prenet.rotation.as_ref().map(|n| n.trace(us)).transpose()?;
        let stretch = self.prenet.stretch.as_ref().map(|n| n.trace(us)).transpose()?;
        let shift = self.prenet.shift.as_ref().map(|n| n.trace(us)).transpose()?;
        Ok(PreNetBatch { rotation, stretch, shift })
    }

    /// Transformed trunk coordinates for variable `var_index`, plus the
    /// rotated vectors R(theta) y needed by the backward pass.
    fn transform_batch(
        &self,
        pn: &PreNetBatch,
        ys: &Array2<f64>,
        var_index: usize,
    ) -> (Array2<f64>, Array2<f64>) {
        let n = ys.nrows();
        let d = ys.ncols();
        let mut rotated = ys.clone();
        if let Some(rot) = &pn.rotation {
            let theta = rot.output();
            for i in 0..n {
                let (sin, cos) = theta[[i, 0]].sin_cos();
                let (x, y) = (ys[[i, 0]], ys[[i, 1]]);
                rotated[[i, 0]] = cos * x - sin * y;
                rotated[[i, 1]] = sin * x + cos * y;
            }
        }
        let mut out = rotated.clone();
        if let Some(st) = &pn.stretch {
            let s = st.output();
            let col = if self.prenet.stretch_per_variable { var_index } else { 0 };
            for i in 0..n {
                for k in 0..d {
                    out[[i, k]] *= s[[i, col]];
                }
            }
        }
        if let Some(sh) = &pn.shift {
            let sv = sh.output();
            for i in 0..n {
                for k in 0..d {
                    out[[i, k]] += sv[[i, k]];
                }
            }
        }
        (out, rotated)
    }
}

struct PreNetBatch {
    rotation: Option<Trace>,
    stretch: Option<Trace>,
    shift: Option<Trace>,
}

/// Gradients for every trainable block of a flex model.
pub struct FlexGrads {
    pub rotation: Option<NetGrads>,
    pub stretch: Option<NetGrads>,
    pub shift: Option<NetGrads>,
    /// Per variable: (trunk grads, branch grads).
    pub vars: Vec<(NetGrads, NetGrads)>,
}

/// Loss and full parameter gradient of the joint MSE on one batch; the loss
/// averages over samples and variables.
pub fn flex_loss_grads(
    model: &FlexDeepONet,
    u: &Array2<f64>,
    y: &Array2<f64>,
    targets: &Array2<f64>,
) -> Result<(f64, FlexGrads)> {
    let us = model.scaling.scale_u(u)?;
    let ys = model.scaling.scale_y(y)?;
    batch_grads(model, &us, &ys, targets)
}

/// Core joint forward/backward on pre-scaled inputs.
fn batch_grads(
    model: &FlexDeepONet,
    us: &Array2<f64>,
    ys: &Array2<f64>,
    targets: &Array2<f64>,
) -> Result<(f64, FlexGrads)> {
    let n = us.nrows();
    let n_vars = model.vars.len();
    if targets.dim() != (n, n_vars) {
        return Err(OperatorError::InvalidShape(format!(
            "targets {:?}, expected ({n}, {n_vars})",
            targets.dim()
        )));
    }
    let pn = model.prenet_forward(us)?;
    let norm = (n * n_vars) as f64;
    let mut loss = 0.0;

    let mut d_rotation: Option<Array2<f64>> =
        pn.rotation.as_ref().map(|t| Array2::zeros(t.output().dim()));
    let mut d_stretch: Option<Array2<f64>> =
        pn.stretch.as_ref().map(|t| Array2::zeros(t.output().dim()));
    let mut d_shift: Option<Array2<f64>> =
        pn.shift.as_ref().map(|t| Array2::zeros(t.output().dim()));
    let mut var_grads = Vec::with_capacity(n_vars);

    for (j, var) in model.vars.iter().enumerate() {
        let (yp, rotated) = model.transform_batch(&pn, ys, j);
        let ttrace = var.trunk.trace(&yp)?;
        let btrace = var.branch.trace(us)?;
        let psi = ttrace.output();
        let br = btrace.output();

        let mut dpred = Array1::zeros(n);
        for i in 0..n {
            let mut acc = 0.0;
            for k in 0..model.p {
                acc += br[[i, k]] * psi[[i, k]];
            }
            let resid = acc + br[[i, model.p]] - targets[[i, j]];
            loss += resid * resid;
            dpred[i] = 2.0 * resid / norm;
        }

        // branch: first p outputs see psi * dpred, the centering sees dpred
        let mut dbr = Array2::zeros((n, model.p + 1));
        for i in 0..n {
            for k in 0..model.p {
                dbr[[i, k]] = psi[[i, k]] * dpred[i];
            }
            dbr[[i, model.p]] = dpred[i];
        }
        let (gb, _) = var.branch.backward(&btrace, &dbr);

        // trunk: outputs see b * dpred; its input gradient feeds the frame
        let mut dpsi = Array2::zeros((n, model.p));
        for i in 0..n {
            for k in 0..model.p {
                dpsi[[i, k]] = br[[i, k]] * dpred[i];
            }
        }
        let (gt, dyp) = var.trunk.backward(&ttrace, &dpsi);

        // through y' = s * (R y) + ybar
        if let Some(d) = d_shift.as_mut() {
            *d += &dyp;
        }
        if let Some(d) = d_stretch.as_mut() {
            let col = if model.prenet.stretch_per_variable { j } else { 0 };
            for i in 0..n {
                let mut acc = 0.0;
                for k in 0..ys.ncols() {
                    acc += dyp[[i, k]] * rotated[[i, k]];
                }
                d[[i, col]] += acc;
            }
        }
        if let Some(d) = d_rotation.as_mut() {
            let theta = pn.rotation.as_ref().unwrap().output();
            let s_out = pn.stretch.as_ref().map(|t| t.output());
            for i in 0..n {
                let s = s_out.map_or(1.0, |so| {
                    so[[i, if model.prenet.stretch_per_variable { j } else { 0 }]]
                });
                let (sin, cos) = theta[[i, 0]].sin_cos();
                let (x, y) = (ys[[i, 0]], ys[[i, 1]]);
                // d(R(theta) y)/dtheta = [-sin x - cos y, cos x - sin y]
                let rx = -sin * x - cos * y;
                let ry = cos * x - sin * y;
                d[[i, 0]] += s * (dyp[[i, 0]] * rx + dyp[[i, 1]] * ry);
            }
        }
        var_grads.push((gt, gb));
    }
    loss /= norm;

    let back = |net: Option<&DenseNet>, trace: &Option<Trace>, grad: Option<Array2<f64>>| {
        match (net, trace, grad) {
            (Some(n), Some(t), Some(g)) => Some(n.backward(t, &g).0),
            _ => None,
        }
    };
    let grads = FlexGrads {
        rotation: back(model.prenet.rotation.as_ref(), &pn.rotation, d_rotation),
        stretch: back(model.prenet.stretch.as_ref(), &pn.stretch, d_stretch),
        shift: back(model.prenet.shift.as_ref(), &pn.shift, d_shift),
        vars: var_grads,
    };
    Ok((loss, grads))
}

/// Joint Adam training of Pre-Net, trunks, and branches on the summed
/// per-variable MSE. Deterministic under the config seed.
pub fn flex_fit(
    data: &OperatorDataset,
    p: usize,
    prenet_spec: &PreNetSpec,
    branch_spec: &NetSpec,
    trunk_spec: &NetSpec,
    cfg: &TrainConfig,
    scaling: InputScaling,
) -> Result<(FlexDeepONet, LossHistory)> {
    cfg.validate().map_err(OperatorError::Nn)?;
    let us = scaling.scale_u(&data.u)?;
    let ys = scaling.scale_y(&data.y)?;
    let n_y = ys.ncols();

    let mut rng = stream_rng(cfg.seed, "init:prenet");
    let prenet = PreNet::build(prenet_spec, us.ncols(), n_y, data.variables.len(), &mut rng)?;
    let mut vars = Vec::with_capacity(data.variables.len());
    for name in &data.variables {
        let mut rng = stream_rng(cfg.seed, &format!("init:{name}"));
        let trunk = DenseNet::glorot(
            &trunk_spec.dims(n_y, p),
            trunk_spec.hidden_activation,
            trunk_spec.output_activation,
            &mut rng,
        )?;
        let branch = DenseNet::glorot(
            &branch_spec.dims(us.ncols(), p + 1),
            branch_spec.hidden_activation,
            branch_spec.output_activation,
            &mut rng,
        )?;
        vars.push(FlexVar { name: name.clone(), trunk, branch });
    }
    let mut model = FlexDeepONet::new(prenet, vars, p, scaling)?;
    let mut history = LossHistory::default();
    if cfg.epochs == 0 {
        return Ok((model, history));
    }

    let n = data.len();
    let n_val = (cfg.validation_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    if n_val > 0 {
        order.shuffle(&mut stream_rng(cfg.seed, "split"));
    }
    let (val_idx, train_idx) = order.split_at(n_val);
    let mut pool = train_idx.to_vec();
    if pool.is_empty() {
        return Err(OperatorError::InvalidShape("validation split leaves no training data".into()));
    }

    let mut opt = FlexAdam::new(&model);
    let mut shuffle_rng = stream_rng(cfg.seed, "shuffle");
    let mut best: Option<(f64, usize, FlexDeepONet)> = None;

    let us_val = us.select(Axis(0), val_idx);
    let ys_val = ys.select(Axis(0), val_idx);
    let tv = data.values.select(Axis(0), val_idx);

    for epoch in 0..cfg.epochs {
        let lr = cfg.lr_at(epoch);
        opt.set_lr(lr);
        pool.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for chunk in pool.chunks(cfg.batch_size) {
            let ub = us.select(Axis(0), chunk);
            let yb = ys.select(Axis(0), chunk);
            let tb = data.values.select(Axis(0), chunk);
            let (loss, grads) = batch_grads(&model, &ub, &yb, &tb).map_err(flex_diverged(epoch))?;
            if !loss.is_finite() {
                return Err(OperatorError::DivergedAtEpoch(epoch));
            }
            epoch_loss += loss * chunk.len() as f64;
            opt.apply(&mut model, &grads);
        }
        history.train.push(epoch_loss / pool.len() as f64);

        if n_val > 0 {
            let (vloss, _) = batch_grads(&model, &us_val, &ys_val, &tv)?;
            history.validation.push(vloss);
            let improved = best.as_ref().map_or(true, |(b, ..)| vloss < *b);
            if improved {
                best = Some((vloss, epoch, model.clone()));
            }
            if let (Some(patience), Some((_, be, _))) = (cfg.early_stop_patience, best.as_ref()) {
                if epoch - be >= patience {
                    break;
                }
            }
        }
    }

    if let Some((_, epoch, checkpoint)) = best {
        history.best_epoch = Some(epoch);
        model = checkpoint;
    }
    Ok((model, history))
}

fn flex_diverged(epoch: usize) -> impl Fn(OperatorError) -> OperatorError {
    move |e| match e {
        OperatorError::Nn(nn_core::NnError::NumericalFailure(_)) => {
            OperatorError::DivergedAtEpoch(epoch)
        }
        other => other,
    }
}

/// Adam states mirroring every block of a flex model, stepped together.
struct FlexAdam {
    rotation: Option<AdamState>,
    stretch: Option<AdamState>,
    shift: Option<AdamState>,
    vars: Vec<(AdamState, AdamState)>,
}

impl FlexAdam {
    fn new(model: &FlexDeepONet) -> Self {
        let params = AdamParams::default();
        Self {
            rotation: model.prenet.rotation.as_ref().map(|n| AdamState::new(n, params)),
            stretch: model.prenet.stretch.as_ref().map(|n| AdamState::new(n, params)),
            shift: model.prenet.shift.as_ref().map(|n| AdamState::new(n, params)),
            vars: model
                .vars
                .iter()
                .map(|v| (AdamState::new(&v.trunk, params), AdamState::new(&v.branch, params)))
                .collect(),
        }
    }

    fn set_lr(&mut self, lr: f64) {
        if let Some(s) = self.rotation.as_mut() {
            s.set_lr(lr);
        }
        if let Some(s) = self.stretch.as_mut() {
            s.set_lr(lr);
        }
        if let Some(s) = self.shift.as_mut() {
            s.set_lr(lr);
        }
        for (t, b) in &mut self.vars {
            t.set_lr(lr);
            b.set_lr(lr);
        }
    }

    fn apply(&mut self, model: &mut FlexDeepONet, grads: &FlexGrads) {
        if let (Some(state), Some(net), Some(g)) =
            (self.rotation.as_mut(), model.prenet.rotation.as_mut(), grads.rotation.as_ref())
        {
            state.apply(net, g);
        }
        if let (Some(state), Some(net), Some(g)) =
            (self.stretch.as_mut(), model.prenet.stretch.as_mut(), grads.stretch.as_ref())
        {
            state.apply(net, g);
        }
        if let (Some(state), Some(net), Some(g)) =
            (self.shift.as_mut(), model.prenet.shift.as_mut(), grads.shift.as_ref())
        {
            state.apply(net, g);
        }
        for ((ts, bs), (var, (gt, gb))) in
            self.vars.iter_mut().zip(model.vars.iter_mut().zip(grads.vars.iter()))
        {
            ts.apply(&mut var.trunk, gt);
            bs.apply(&mut var.branch, gb);
        }
    }
}

impl FlexDeepONet {
    /// All parameters flattened: rotation, stretch, shift (present blocks
    /// only), then per variable trunk and branch.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for net in [&self.prenet.rotation, &self.prenet.stretch, &self.prenet.shift]
            .into_iter()
            .flatten()
        {
            out.extend(net.params_flat());
        }
        for v in &self.vars {
            out.extend(v.trunk.params_flat());
            out.extend(v.branch.params_flat());
        }
        out
    }

    pub fn set_params_flat(&mut self, params: &[f64]) -> Result<()> {
        let mut offset = 0;
        let mut take = |net: &mut DenseNet| -> Result<()> {
            let n = net.param_count();
            net.set_params_flat(&params[offset..offset + n])?;
            offset += n;
            Ok(())
        };
        for net in [&mut self.prenet.rotation, &mut self.prenet.stretch, &mut self.prenet.shift]
            .into_iter()
            .flatten()
        {
            take(net)?;
        }
        for v in &mut self.vars {
            take(&mut v.trunk)?;
            take(&mut v.branch)?;
        }
        if offset != params.len() {
            return Err(OperatorError::InvalidShape(format!(
                "{} parameters supplied, model has {offset}",
                params.len()
            )));
        }
        Ok(())
    }
}

impl FlexGrads {
    /// Flattened in the same order as `FlexDeepONet::params_flat`.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for g in [&self.rotation, &self.stretch, &self.shift].into_iter().flatten() {
            out.extend(g.flat());
        }
        for (t, b) in &self.vars {
            out.extend(t.flat());
            out.extend(b.flat());
        }
        out
    }
}

/// Learned frame and centering per scenario, plus the transformed-coordinate
/// samples that make the alignment overlays. Frames and coordinates are
/// reported in the model's (scaled) trunk units.
#[derive(Debug, Clone)]
pub struct AlignmentDiagnostics {
    pub rows: Vec<FrameRow>,
    /// `transformed[scenario][variable]` is (n_samples x n_y).
    pub transformed: Vec<Vec<Array2<f64>>>,
}

#[derive(Debug, Clone)]
pub struct FrameRow {
    pub u: Vec<f64>,
    /// One scale per variable in per-variable stretch mode, else one entry.
    pub scales: Vec<f64>,
    pub angles: Vec<f64>,
    pub shift: Vec<f64>,
    /// Centering output c(u) per variable.
    pub centering: Vec<f64>,
}

/// Read-only frame report for a trained model over a set of scenarios.
pub fn alignment_diagnostics(
    model: &FlexDeepONet,
    scenarios: &Array2<f64>,
    y_samples: &Array2<f64>,
) -> Result<AlignmentDiagnostics> {
    let us = model.scaling.scale_u(scenarios)?;
    let ys = model.scaling.scale_y(y_samples)?;
    let n_vars = model.vars.len();
    let mut rows = Vec::with_capacity(us.nrows());
    let mut transformed = Vec::with_capacity(us.nrows());
    for (si, u_raw) in scenarios.rows().into_iter().enumerate() {
        let u_scaled: Vec<f64> = us.row(si).to_vec();
        let mut scales = Vec::new();
        let mut per_var = Vec::with_capacity(n_vars);
        let mut centering = Vec::with_capacity(n_vars);
        let mut angles = vec![0.0];
        let mut shift = vec![0.0; model.prenet.n_y()];
        for (vj, var) in model.vars.iter().enumerate() {
            let frame = model.prenet.frame(&u_scaled, vj)?;
            if vj == 0 || model.prenet.stretch_per_variable() {
                scales.push(frame.scale);
            }
            angles = frame.angles.clone();
            shift = frame.shift.clone();
            let mut coords = Array2::zeros((ys.nrows(), model.prenet.n_y()));
            for (i, yrow) in ys.rows().into_iter().enumerate() {
                let yp = crate::prenet::prenet_transform(&frame, &yrow.to_vec())?;
                for (k, &v) in yp.iter().enumerate() {
                    coords[[i, k]] = v;
                }
            }
            per_var.push(coords);
            let b = var.branch.forward(&Array1::from_vec(u_scaled.clone()))?;
            centering.push(b[model.p]);
        }
        rows.push(FrameRow { u: u_raw.to_vec(), scales, angles, shift, centering });
        transformed.push(per_var);
    }
    Ok(AlignmentDiagnostics { rows, transformed })
}
