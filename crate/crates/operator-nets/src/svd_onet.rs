use ndarray::{concatenate, Array2, Axis};

use nn_core::{stream_rng, DenseNet, LossHistory, TrainConfig};
use svd_core::{svd, CenterMethod, ColumnMeta, Preprocessing, ScaleMethod, SnapshotMatrix};

use crate::error::{OperatorError, Result};
use crate::scaling::InputScaling;
use crate::spec::NetSpec;

/// Assembled SVD surrogate. Per trunk group: one trunk regressing the
/// principal components of the (centered, auto-scaled, possibly concatenated)
/// snapshot matrix; per member variable: a branch with p + 2 outputs
/// regressing the principal-direction rows extended with the centering and
/// scaling coefficients. No joint training happens; the blocks are fitted
/// independently and only composed at prediction time.
#[derive(Debug, Clone)]
pub struct SvdAssembly {
    pub(crate) groups: Vec<SvdGroup>,
    pub(crate) p: usize,
    pub(crate) scaling: InputScaling,
}

#[derive(Debug, Clone)]
pub struct SvdGroup {
    pub trunk: DenseNet,
    pub members: Vec<SvdVar>,
    /// Training-time per-column preprocessing of the group matrix, kept for
    /// provenance and grid-point diagnostics.
    pub preprocessing: Preprocessing,
}

#[derive(Debug, Clone)]
pub struct SvdVar {
    pub name: String,
    /// p + 2 outputs: alpha_1..alpha_p, centering c, scaling d.
    pub branch: DenseNet,
}

impl SvdAssembly {
    pub fn new(groups: Vec<SvdGroup>, p: usize, scaling: InputScaling) -> Result<Self> {
        if groups.is_empty() || groups.iter().any(|g| g.members.is_empty()) {
            return Err(OperatorError::InvalidSpec("assembly needs at least one member".into()));
        }
        for g in &groups {
            if g.trunk.output_dim() != p {
                return Err(OperatorError::InvalidSpec(format!(
                    "trunk must have {p} outputs, found {}",
                    g.trunk.output_dim()
                )));
            }
            for m in &g.members {
                if m.branch.output_dim() != p + 2 {
                    return Err(OperatorError::InvalidSpec(format!(
                        "variable {}: branch must have {} outputs",
                        m.name,
                        p + 2
                    )));
                }
            }
        }
        Ok(Self { groups, p, scaling })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn groups(&self) -> &[SvdGroup] {
        &self.groups
    }

    pub fn scaling(&self) -> &InputScaling {
        &self.scaling
    }

    pub fn variables(&self) -> Vec<&str> {
        self.groups
            .iter()
            .flat_map(|g| g.members.iter().map(|m| m.name.as_str()))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.groups
            .iter()
            .map(|g| {
                g.trunk.param_count()
                    + g.members.iter().map(|m| m.branch.param_count()).sum::<usize>()
            })
            .sum()
    }

    pub fn forward(&self, u: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let u = Array2::from_shape_vec((1, u.len()), u.to_vec())
            .map_err(|e| OperatorError::InvalidShape(e.to_string()))?;
        let y = Array2::from_shape_vec((1, y.len()), y.to_vec())
            .map_err(|e| OperatorError::InvalidShape(e.to_string()))?;
        Ok(self.forward_batch(&u, &y)?.row(0).to_vec())
    }

    /// `d(u) * (sum_i phi_i(y) alpha_i(u)) + c(u)` per variable.
    pub fn forward_batch(&self, u: &Array2<f64>, y: &Array2<f64>) -> Result<Array2<f64>> {
        let us = self.scaling.scale_u(u)?;
        let ys = self.scaling.scale_y(y)?;
        let n_vars = self.groups.iter().map(|g| g.members.len()).sum();
        let mut out = Array2::zeros((u.nrows(), n_vars));
        let mut col = 0;
        for group in &self.groups {
            let phi = group.trunk.forward_batch(&ys)?;
            for member in &group.members {
                let b = member.branch.forward_batch(&us)?;
                for i in 0..u.nrows() {
                    let mut acc = 0.0;
                    for k in 0..self.p {
                        acc += phi[[i, k]] * b[[i, k]];
                    }
                    out[[i, col]] = b[[i, self.p + 1]] * acc + b[[i, self.p]];
                }
                col += 1;
            }
        }
        Ok(out)
    }
}

pub struct SvdFitOutcome {
    pub assembly: SvdAssembly,
    pub trunk_histories: Vec<LossHistory>,
    pub branch_histories: Vec<(String, LossHistory)>,
}

/// Five-step fit: center and auto-scale the (concatenated) group matrix,
/// decompose it, fit the trunk to (y; Phi) and each member branch to (u; B)
/// where B stacks the principal-direction columns with c and d. The trunk and
/// branch fits are independent and run concurrently.
pub fn svd_deeponet_fit(
    snaps: &[(String, SnapshotMatrix)],
    r: usize,
    trunk_spec: &NetSpec,
    branch_spec: &NetSpec,
    trunk_cfg: &TrainConfig,
    branch_cfg: &TrainConfig,
    groups: &[Vec<usize>],
    scaling: InputScaling,
) -> Result<SvdFitOutcome> {
    if groups.is_empty() {
        return Err(OperatorError::InvalidSpec("no trunk groups".into()));
    }
    let mut out_groups = Vec::with_capacity(groups.len());
    let mut trunk_histories = Vec::new();
    let mut branch_histories = Vec::new();

    for group in groups {
        if group.is_empty() {
            return Err(OperatorError::InvalidSpec("empty trunk group".into()));
        }
        let first = &snaps[group[0]].1;
        let (n, m) = first.values().dim();
        let u_meta = match first.col_meta() {
            ColumnMeta::Scenarios(u) => u.clone(),
            ColumnMeta::Times(_) => {
                return Err(OperatorError::GridRequired(
                    "scenario-aggregated snapshots required".into(),
                ))
            }
        };
        let mut mats = Vec::with_capacity(group.len());
        for &gi in group {
            let (name, s) = &snaps[gi];
            if s.values().dim() != (n, m) || s.row_coords() != first.row_coords() {
                return Err(OperatorError::GridRequired(format!(
                    "variable {name} does not share the group grid"
                )));
            }
            mats.push(s.values().view());
        }
        let z = concatenate(Axis(1), &mats).map_err(|e| OperatorError::InvalidShape(e.to_string()))?;
        let z_snap = SnapshotMatrix::new(
            z,
            svd_core::AggregationKind::ScenarioAggregated,
            first.row_coords().clone(),
            ColumnMeta::Scenarios(tile_rows(&u_meta, group.len())),
        )?;
        let (pre, prep) = z_snap.center_scale(CenterMethod::Mean, ScaleMethod::Auto)?;
        let dec = svd(pre.values())?.truncate(r)?;
        let phi = dec.principal_components();
        let a = dec.principal_directions();

        // trunk data: (y; Phi)
        let y_grid = Array2::from_shape_fn((n, 1), |(i, _)| first.row_coords()[i]);
        let ys = scaling.scale_y(&y_grid)?;
        let us = scaling.scale_u(&u_meta)?;

        // branch targets per member: B = [alpha_1 .. alpha_p, c, d]
        let mut branch_targets = Vec::with_capacity(group.len());
        for (slot, &gi) in group.iter().enumerate() {
            let mut b = Array2::zeros((m, r + 2));
            for j in 0..m {
                let zcol = slot * m + j;
                for k in 0..r {
                    b[[j, k]] = a[[zcol, k]];
                }
                b[[j, r]] = prep.centering()[zcol];
                b[[j, r + 1]] = prep.scaling()[zcol];
            }
            branch_targets.push((snaps[gi].0.clone(), b));
        }

        // the trunk fit and the member branch fits share no state; run them on
        // separate threads
        let (trunk_res, branch_res) = std::thread::scope(|scope| {
            let trunk_handle = scope.spawn(|| {
                let mut rng = stream_rng(trunk_cfg.seed, "init:svd-trunk");
                let net = DenseNet::glorot(
                    &trunk_spec.dims(1, r),
                    trunk_spec.hidden_activation,
                    trunk_spec.output_activation,
                    &mut rng,
                )?;
                nn_core::train(net, &nn_core::Dataset::new(ys.clone(), phi.clone())?, trunk_cfg)
                    .map_err(OperatorError::Nn)
            });
            let branch_handle = scope.spawn(|| {
                let mut fitted = Vec::with_capacity(branch_targets.len());
                for (name, targets) in &branch_targets {
                    let mut rng = stream_rng(branch_cfg.seed, &format!("init:svd-branch:{name}"));
                    let net = DenseNet::glorot(
                        &branch_spec.dims(us.ncols(), r + 2),
                        branch_spec.hidden_activation,
                        branch_spec.output_activation,
                        &mut rng,
                    )?;
                    let (net, history) = nn_core::train(
                        net,
                        &nn_core::Dataset::new(us.clone(), targets.clone())?,
                        branch_cfg,
                    )?;
                    fitted.push((name.clone(), net, history));
                }
                Ok::<_, OperatorError>(fitted)
            });
            (trunk_handle.join(), branch_handle.join())
        });
        let (trunk, trunk_history) =
            trunk_res.map_err(|_| OperatorError::InvalidShape("trunk fit panicked".into()))??;
        let fitted_branches =
            branch_res.map_err(|_| OperatorError::InvalidShape("branch fit panicked".into()))??;

        let mut members = Vec::with_capacity(fitted_branches.len());
        for (name, net, history) in fitted_branches {
            branch_histories.push((name.clone(), history));
            members.push(SvdVar { name, branch: net });
        }
        trunk_histories.push(trunk_history);
        out_groups.push(SvdGroup { trunk, members, preprocessing: prep });
    }

    Ok(SvdFitOutcome {
        assembly: SvdAssembly { groups: out_groups, p: r, scaling },
        trunk_histories,
        branch_histories,
    })
}

fn tile_rows(u: &Array2<f64>, times: usize) -> Array2<f64> {
    let (m, d) = u.dim();
    let mut out = Array2::zeros((m * times, d));
    for t in 0..times {
        for j in 0..m {
            for k in 0..d {
                out[[t * m + j, k]] = u[[j, k]];
            }
        }
    }
    out
}
