use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;

use nn_core::{
    stream_rng, AdamParams, AdamState, DenseNet, LossHistory, ScalarAdam,
    TrainConfig,
};

use crate::dataset::OperatorDataset;
use crate::error::{OperatorError, Result};
use crate::scaling::InputScaling;
use crate::spec::NetSpec;

/// Unstacked DeepONet with a trainable dot-product bias: one branch and one
/// trunk per output variable, fused as `sum_i b_i(u) psi_i(y) + b0`.
#[derive(Debug, Clone)]
pub struct VanillaDeepONet {
    pub(crate) vars: Vec<VanillaVar>,
    pub(crate) p: usize,
    pub(crate) scaling: InputScaling,
}

#[derive(Debug, Clone)]
pub struct VanillaVar {
    pub name: String,
    pub branch: DenseNet,
    pub trunk: DenseNet,
    pub bias: f64,
}

/// Row-wise fused dot product: `sum_i branch_out[i] * trunk_out[i] + bias`.
pub(crate) fn dot_fuse(branch_out: &Array2<f64>, trunk_out: &Array2<f64>, bias: f64) -> Array1<f64> {
    let mut out = Array1::zeros(branch_out.nrows());
    for (i, mut_v) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for k in 0..branch_out.ncols() {
            acc += branch_out[[i, k]] * trunk_out[[i, k]];
        }
        *mut_v = acc + bias;
    }
    out
}

impl VanillaDeepONet {
    pub fn new(vars: Vec<VanillaVar>, p: usize, scaling: InputScaling) -> Result<Self> {
        for v in &vars {
            if v.branch.output_dim() != p || v.trunk.output_dim() != p {
                return Err(OperatorError::InvalidSpec(format!(
                    "variable {}: branch/trunk must both have {p} outputs",
                    v.name
                )));
            }
        }
        if vars.is_empty() {
            return Err(OperatorError::InvalidSpec("no output variables".into()));
        }
        Ok(Self { vars, p, scaling })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn variables(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn vars(&self) -> &[VanillaVar] {
        &self.vars
    }

    pub fn scaling(&self) -> &InputScaling {
        &self.scaling
    }

    pub fn param_count(&self) -> usize {
        self.vars
            .iter()
            .map(|v| v.branch.param_count() + v.trunk.param_count() + 1)
            .sum()
    }

    /// Predict every variable at one (u, y).
    pub fn forward(&self, u: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let u = Array2::from_shape_vec((1, u.len()), u.to_vec())
            .map_err(|e| OperatorError::InvalidShape(e.to_string()))?;
        let y = Array2::from_shape_vec((1, y.len()), y.to_vec())
            .map_err(|e| OperatorError::InvalidShape(e.to_string()))?;
        Ok(self.forward_batch(&u, &y)?.row(0).to_vec())
    }

    /// Predict every variable for each row of (u, y).
    pub fn forward_batch(&self, u: &Array2<f64>, y: &Array2<f64>) -> Result<Array2<f64>> {
        let us = self.scaling.scale_u(u)?;
        let ys = self.scaling.scale_y(y)?;
        let mut out = Array2::zeros((u.nrows(), self.vars.len()));
        for (j, var) in self.vars.iter().enumerate() {
            let b = var.branch.forward_batch(&us)?;
            let t = var.trunk.forward_batch(&ys)?;
            let pred = dot_fuse(&b, &t, var.bias);
            out.column_mut(j).assign(&pred);
        }
        Ok(out)
    }
}

/// End-to-end joint training of branch + trunk + bias per variable, each
/// variable fitted independently on its own value column.
pub fn vanilla_fit(
    data: &OperatorDataset,
    p: usize,
    branch_spec: &NetSpec,
    trunk_spec: &NetSpec,
    cfg: &TrainConfig,
    scaling: InputScaling,
) -> Result<(VanillaDeepONet, Vec<LossHistory>)> {
    cfg.validate().map_err(OperatorError::Nn)?;
    let us = scaling.scale_u(&data.u)?;
    let ys = scaling.scale_y(&data.y)?;
    let mut vars = Vec::with_capacity(data.variables.len());
    let mut histories = Vec::with_capacity(data.variables.len());
    for (vj, name) in data.variables.iter().enumerate() {
        let mut rng = stream_rng(cfg.seed, &format!("init:{name}"));
        let branch = DenseNet::glorot(
            &branch_spec.dims(us.ncols(), p),
            branch_spec.hidden_activation,
            branch_spec.output_activation,
            &mut rng,
        )?;
        let trunk = DenseNet::glorot(
            &trunk_spec.dims(ys.ncols(), p),
            trunk_spec.hidden_activation,
            trunk_spec.output_activation,
            &mut rng,
        )?;
        let targets = data.values.column(vj).to_owned();
        let (var, history) = fit_single_variable(
            name.clone(),
            branch,
            trunk,
            0.0,
            &us,
            &ys,
            &targets,
            cfg,
            false,
        )?;
        vars.push(var);
        histories.push(history);
    }
    Ok((VanillaDeepONet { vars, p, scaling }, histories))
}

/// Joint mini-batch Adam over (branch, trunk, bias) for one output variable.
/// `freeze_trunk` leaves the trunk untouched (the branch-only phase of the
/// POD paradigm).
#[allow(clippy::too_many_arguments)]
pub(crate) fn fit_single_variable(
    name: String,
    mut branch: DenseNet,
    mut trunk: DenseNet,
    mut bias: f64,
    us: &Array2<f64>,
    ys: &Array2<f64>,
    targets: &Array1<f64>,
    cfg: &TrainConfig,
    freeze_trunk: bool,
) -> Result<(VanillaVar, LossHistory)> {
    let n = us.nrows();
    let mut history = LossHistory::default();
    if cfg.epochs == 0 {
        return Ok((VanillaVar { name, branch, trunk, bias }, history));
    }

    let n_val = (cfg.validation_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    if n_val > 0 {
        order.shuffle(&mut stream_rng(cfg.seed, &format!("split:{name}")));
    }
    let (val_idx, train_idx) = order.split_at(n_val);
    let mut pool: Vec<usize> = train_idx.to_vec();
    if pool.is_empty() {
        return Err(OperatorError::InvalidShape("validation split leaves no training data".into()));
    }

    let mut adam_b = AdamState::new(&branch, AdamParams::default());
    let mut adam_t = AdamState::new(&trunk, AdamParams::default());
    let mut adam_bias = ScalarAdam::new(AdamParams::default());
    let mut shuffle_rng = stream_rng(cfg.seed, &format!("shuffle:{name}"));
    let mut best: Option<(f64, usize, DenseNet, DenseNet, f64)> = None;

    for epoch in 0..cfg.epochs {
        let lr = cfg.lr_at(epoch);
        adam_b.set_lr(lr);
        adam_t.set_lr(lr);
        adam_bias.set_lr(lr);
        pool.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for chunk in pool.chunks(cfg.batch_size) {
            let ub = us.select(Axis(0), chunk);
            let yb = ys.select(Axis(0), chunk);
            let tb = targets.select(Axis(0), chunk);

            let (loss, gb, gt, gbias) =
                dot_batch_grads(&branch, &trunk, bias, &ub, &yb, &tb).map_err(diverged(epoch))?;
            if !loss.is_finite() {
                return Err(OperatorError::DivergedAtEpoch(epoch));
            }
            epoch_loss += loss * chunk.len() as f64;
            adam_b.apply(&mut branch, &gb);
            if !freeze_trunk {
                adam_t.apply(&mut trunk, &gt);
            }
            adam_bias.apply(&mut bias, gbias);
        }
        history.train.push(epoch_loss / pool.len() as f64);

        if n_val > 0 {
            let uv = us.select(Axis(0), val_idx);
            let yv = ys.select(Axis(0), val_idx);
            let tv = targets.select(Axis(0), val_idx);
            let pred = dot_fuse(
                &branch.forward_batch(&uv)?,
                &trunk.forward_batch(&yv)?,
                bias,
            );
            let vloss = pred
                .iter()
                .zip(tv.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                / val_idx.len() as f64;
            history.validation.push(vloss);
            let improved = best.as_ref().map_or(true, |(b, ..)| vloss < *b);
            if improved {
                best = Some((vloss, epoch, branch.clone(), trunk.clone(), bias));
            }
            if let (Some(patience), Some((_, be, ..))) = (cfg.early_stop_patience, best.as_ref()) {
                if epoch - be >= patience {
                    break;
                }
            }
        }
    }

    if let Some((_, epoch, bb, bt, b0)) = best {
        history.best_epoch = Some(epoch);
        branch = bb;
        trunk = bt;
        bias = b0;
    }
    Ok((VanillaVar { name, branch, trunk, bias }, history))
}

pub(crate) fn diverged(epoch: usize) -> impl Fn(OperatorError) -> OperatorError {
    move |e| match e {
        OperatorError::Nn(nn_core::NnError::NumericalFailure(_)) => {
            OperatorError::DivergedAtEpoch(epoch)
        }
        other => other,
    }
}

/// Loss and gradients of the dot-product architecture on one batch:
/// `pred = sum_k branch_k(u) trunk_k(y) + bias`, MSE over the batch.
fn dot_batch_grads(
    branch: &DenseNet,
    trunk: &DenseNet,
    bias: f64,
    ub: &Array2<f64>,
    yb: &Array2<f64>,
    tb: &Array1<f64>,
) -> Result<(f64, nn_core::NetGrads, nn_core::NetGrads, f64)> {
    let n = ub.nrows();
    let btrace = branch.trace(ub)?;
    let ttrace = trunk.trace(yb)?;
    let pred = dot_fuse(btrace.output(), ttrace.output(), bias);
    let resid = &pred - tb;
    let loss = resid.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let dpred = resid.mapv(|v| 2.0 * v / n as f64);

    // d pred / d branch_out = trunk_out, and vice versa
    let mut db = ttrace.output().clone();
    for (mut row, &g) in db.rows_mut().into_iter().zip(dpred.iter()) {
        row.mapv_inplace(|v| v * g);
    }
    let (gb, _) = branch.backward(&btrace, &db);

    let mut dt = btrace.output().clone();
    for (mut row, &g) in dt.rows_mut().into_iter().zip(dpred.iter()) {
        row.mapv_inplace(|v| v * g);
    }
    let (gt, _) = trunk.backward(&ttrace, &dt);
    Ok((loss, gb, gt, dpred.sum()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nn_core::{stream_rng, Activation};

    #[test]
    fn dot_batch_gradient_matches_finite_differences() {
        let mut rng = stream_rng(55, "init");
        let branch =
            DenseNet::glorot(&[1, 4, 2], Activation::Tanh, Activation::Identity, &mut rng)
                .unwrap();
        let trunk =
            DenseNet::glorot(&[1, 4, 2], Activation::Tanh, Activation::Identity, &mut rng)
                .unwrap();
        let bias = 0.2;
        let n = 7;
        let ub = Array2::from_shape_fn((n, 1), |(i, _)| -1.0 + 2.0 * i as f64 / 6.0);
        let yb = Array2::from_shape_fn((n, 1), |(i, _)| (i as f64 * 0.7).sin());
        let tb = Array1::from_shape_fn(n, |i| 0.3 * (i as f64).cos());

        let loss_at = |bp: &[f64], tp: &[f64], b0: f64| {
            let mut br = branch.clone();
            br.set_params_flat(bp).unwrap();
            let mut tr = trunk.clone();
            tr.set_params_flat(tp).unwrap();
            let pred = dot_fuse(
                &br.forward_batch(&ub).unwrap(),
                &tr.forward_batch(&yb).unwrap(),
                b0,
            );
            (&pred - &tb).iter().map(|v| v * v).sum::<f64>() / n as f64
        };

        let (_, gb, gt, gbias) = dot_batch_grads(&branch, &trunk, bias, &ub, &yb, &tb).unwrap();
        let h = 1e-6;
        let bp = branch.params_flat();
        let tp = trunk.params_flat();
        for (i, &g) in gb.flat().iter().enumerate() {
            let mut p = bp.clone();
            p[i] += h;
            let lp = loss_at(&p, &tp, bias);
            p[i] -= 2.0 * h;
            let lm = loss_at(&p, &tp, bias);
            let fd = (lp - lm) / (2.0 * h);
            assert!((fd - g).abs() <= 1e-7 + 1e-5 * g.abs(), "branch param {i}: {g} vs {fd}");
        }
        for (i, &g) in gt.flat().iter().enumerate() {
            let mut p = tp.clone();
            p[i] += h;
            let lp = loss_at(&bp, &p, bias);
            p[i] -= 2.0 * h;
            let lm = loss_at(&bp, &p, bias);
            let fd = (lp - lm) / (2.0 * h);
            assert!((fd - g).abs() <= 1e-7 + 1e-5 * g.abs(), "trunk param {i}: {g} vs {fd}");
        }
        let fd = (loss_at(&bp, &tp, bias + h) - loss_at(&bp, &tp, bias - h)) / (2.0 * h);
        assert!((fd - gbias).abs() <= 1e-7 + 1e-5 * gbias.abs());
    }
}
