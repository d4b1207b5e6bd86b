use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;

use crate::adam::{AdamParams, AdamState};
use crate::error::{NnError, Result};
use crate::net::{grad, DenseNet};
use crate::rng::stream_rng;

/// Training hyperparameters. The learning-rate schedule is piecewise constant:
/// entry (e, lr) applies from epoch e onward.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_schedule: Vec<(usize, f64)>,
    pub seed: u64,
    pub validation_fraction: f64,
    pub early_stop_patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            batch_size: 256,
            lr_schedule: vec![(0, 1e-3)],
            seed: 0,
            validation_fraction: 0.0,
            early_stop_patience: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(NnError::InvalidData("batch_size must be positive".into()));
        }
        if self.lr_schedule.is_empty() {
            return Err(NnError::InvalidData("empty lr schedule".into()));
        }
        if !self.lr_schedule.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(NnError::InvalidData("lr schedule epochs must strictly increase".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(NnError::InvalidData("validation_fraction outside [0,1)".into()));
        }
        Ok(())
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        let mut lr = self.lr_schedule[0].1;
        for &(e, l) in &self.lr_schedule {
            if epoch >= e {
                lr = l;
            }
        }
        lr
    }
}

/// Per-epoch loss record. `validation` is empty when no split was configured;
/// `best_epoch` marks the returned checkpoint.
#[derive(Debug, Clone, Default)]
pub struct LossHistory {
    pub train: Vec<f64>,
    pub validation: Vec<f64>,
    pub best_epoch: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub inputs: Array2<f64>,
    pub targets: Array2<f64>,
}

impl Dataset {
    pub fn new(inputs: Array2<f64>, targets: Array2<f64>) -> Result<Self> {
        if inputs.nrows() != targets.nrows() {
            return Err(NnError::InvalidShape(format!(
                "{} input rows vs {} target rows",
                inputs.nrows(),
                targets.nrows()
            )));
        }
        if inputs.nrows() == 0 {
            return Err(NnError::InvalidData("empty dataset".into()));
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Shuffled mini-batch Adam on the MSE loss. Returns the trained network and
/// the loss history; when validation is enabled the best-validation checkpoint
/// is returned instead of the final state.
pub fn train(net: DenseNet, data: &Dataset, cfg: &TrainConfig) -> Result<(DenseNet, LossHistory)> {
    cfg.validate()?;
    let mut net = net;
    let mut history = LossHistory::default();
    if cfg.epochs == 0 {
        return Ok((net, history));
    }

    let n = data.len();
    let n_val = (cfg.validation_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    if n_val > 0 {
        order.shuffle(&mut stream_rng(cfg.seed, "split"));
    }
    let (val_idx, train_idx) = order.split_at(n_val);
    let val = gather(data, val_idx);
    let mut train_pool: Vec<usize> = train_idx.to_vec();
    if train_pool.is_empty() {
        return Err(NnError::InvalidData("validation split leaves no training data".into()));
    }

    let mut adam = AdamState::new(&net, AdamParams::default());
    let mut shuffle_rng = stream_rng(cfg.seed, "shuffle");
    let mut best: Option<(f64, usize, DenseNet)> = None;

    for epoch in 0..cfg.epochs {
        adam.set_lr(cfg.lr_at(epoch));
        train_pool.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for chunk in train_pool.chunks(cfg.batch_size) {
            let (xb, yb) = gather(data, chunk);
            let (grads, loss) = grad(&net, &xb, &yb).map_err(|e| match e {
                NnError::NumericalFailure(_) => NnError::DivergedAtEpoch(epoch),
                other => other,
            })?;
            if !loss.is_finite() {
                return Err(NnError::DivergedAtEpoch(epoch));
            }
            epoch_loss += loss * chunk.len() as f64;
            adam.apply(&mut net, &grads);
        }
        history.train.push(epoch_loss / train_pool.len() as f64);

        if n_val > 0 {
            let pred = net.forward_batch(&val.0)?;
            let (vloss, _) = crate::net::mse_loss_grad(&pred, &val.1)?;
            history.validation.push(vloss);
            let improved = best.as_ref().map_or(true, |(b, _, _)| vloss < *b);
            if improved {
                best = Some((vloss, epoch, net.clone()));
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
        net = checkpoint;
    }
    Ok((net, history))
}

fn gather(data: &Dataset, idx: &[usize]) -> (Array2<f64>, Array2<f64>) {
    (data.inputs.select(Axis(0), idx), data.targets.select(Axis(0), idx))
}
