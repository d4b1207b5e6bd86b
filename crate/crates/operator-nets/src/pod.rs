use ndarray::{Array1, Array2};

use nn_core::{stream_rng, DenseNet, LossHistory, TrainConfig};
use svd_core::{svd, ColumnMeta, SnapshotMatrix};

use crate::error::{OperatorError, Result};
use crate::scaling::InputScaling;
use crate::spec::NetSpec;
use crate::vanilla::{fit_single_variable, VanillaDeepONet, VanillaVar};

/// Four-step paradigm for one output variable's snapshot matrix:
/// 1. decompose the matrix, 2. fit a trunk to the leading modes as functions
/// of y, 3. freeze it, 4. train the branch (and dot-product bias) end to end
/// on the same data. The result has the vanilla architecture.
pub fn pod_deeponet_fit(
    snap: &SnapshotMatrix,
    variable: &str,
    r: usize,
    trunk_spec: &NetSpec,
    branch_spec: &NetSpec,
    trunk_cfg: &TrainConfig,
    branch_cfg: &TrainConfig,
    scaling: InputScaling,
) -> Result<(VanillaDeepONet, PodHistories)> {
    let u_meta = match snap.col_meta() {
        ColumnMeta::Scenarios(u) => u.clone(),
        ColumnMeta::Times(_) => {
            return Err(OperatorError::GridRequired(
                "scenario-aggregated snapshots required".into(),
            ))
        }
    };
    let (n, m) = snap.values().dim();
    let dec = svd(snap.values())?.truncate(r)?;

    // step 2: trunk regresses the r modes (columns of U) against y
    let y_grid = Array2::from_shape_fn((n, 1), |(i, _)| snap.row_coords()[i]);
    let ys = scaling.scale_y(&y_grid)?;
    let modes = dec.u().clone();
    let mut rng = stream_rng(trunk_cfg.seed, &format!("init:pod-trunk:{variable}"));
    let trunk0 = DenseNet::glorot(
        &trunk_spec.dims(1, r),
        trunk_spec.hidden_activation,
        trunk_spec.output_activation,
        &mut rng,
    )?;
    let (trunk, trunk_history) =
        nn_core::train(trunk0, &nn_core::Dataset::new(ys.clone(), modes)?, trunk_cfg)?;

    // steps 3-4: trunk frozen, branch + bias trained through the dot product
    let us_meta = scaling.scale_u(&u_meta)?;
    let rows = n * m;
    let mut us = Array2::zeros((rows, us_meta.ncols()));
    let mut ys_full = Array2::zeros((rows, 1));
    let mut targets = Array1::zeros(rows);
    let mut row = 0;
    for j in 0..m {
        for i in 0..n {
            for k in 0..us_meta.ncols() {
                us[[row, k]] = us_meta[[j, k]];
            }
            ys_full[[row, 0]] = ys[[i, 0]];
            targets[row] = snap.values()[[i, j]];
            row += 1;
        }
    }
    let mut rng = stream_rng(branch_cfg.seed, &format!("init:pod-branch:{variable}"));
    let branch0 = DenseNet::glorot(
        &branch_spec.dims(us.ncols(), r),
        branch_spec.hidden_activation,
        branch_spec.output_activation,
        &mut rng,
    )?;
    let frozen = trunk.clone();
    let (var, branch_history) = fit_single_variable(
        variable.to_string(),
        branch0,
        trunk,
        0.0,
        &us,
        &ys_full,
        &targets,
        branch_cfg,
        true,
    )?;
    debug_assert_eq!(frozen.params_flat(), var.trunk.params_flat());

    let model = VanillaDeepONet::new(
        vec![VanillaVar { name: var.name, branch: var.branch, trunk: var.trunk, bias: var.bias }],
        r,
        scaling,
    )?;
    Ok((model, PodHistories { trunk: trunk_history, branch: branch_history }))
}

#[derive(Debug, Clone)]
pub struct PodHistories {
    pub trunk: LossHistory,
    pub branch: LossHistory,
}
