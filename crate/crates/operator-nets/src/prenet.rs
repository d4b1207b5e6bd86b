use ndarray::{Array1, Array2};
use rand::Rng;

use nn_core::{Activation, DenseNet};

use crate::error::{OperatorError, Result};
use crate::spec::{NetSpec, PreNetSpec};

/// Frame parameters produced by the Pre-Net for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameParams {
    pub scale: f64,
    pub angles: Vec<f64>,
    pub shift: Vec<f64>,
}

impl FrameParams {
    pub fn identity(n_y: usize) -> Self {
        Self { scale: 1.0, angles: vec![0.0], shift: vec![0.0; n_y] }
    }
}

/// Rotation matrix built from one angle (the only rotation arity these
/// problems need); orthogonal by construction.
pub fn rotation_matrix(theta: f64) -> Array2<f64> {
    let (sin, cos) = theta.sin_cos();
    ndarray::arr2(&[[cos, -sin], [sin, cos]])
}

/// Apply the moving frame to one coordinate vector: `y' = s R(theta) y + ybar`.
/// For one-dimensional y the rotation degenerates to the identity.
pub fn prenet_transform(frame: &FrameParams, y: &[f64]) -> Result<Vec<f64>> {
    if frame.shift.len() != y.len() {
        return Err(OperatorError::InvalidShape(format!(
            "shift has {} components for {}-dimensional y",
            frame.shift.len(),
            y.len()
        )));
    }
    match y.len() {
        1 => Ok(vec![frame.scale * y[0] + frame.shift[0]]),
        2 => {
            let theta = frame.angles.first().copied().unwrap_or(0.0);
            let (sin, cos) = theta.sin_cos();
            Ok(vec![
                frame.scale * (cos * y[0] - sin * y[1]) + frame.shift[0],
                frame.scale * (sin * y[0] + cos * y[1]) + frame.shift[1],
            ])
        }
        d => Err(OperatorError::InvalidShape(format!("unsupported coordinate dimension {d}"))),
    }
}

/// Pre-transformation network: separate blocks regress the rotation angle, the
/// stretch factor, and the shift vector from the branch input u. Blocks that
/// are absent contribute the identity (theta = 0, s = 1, ybar = 0).
///
/// The stretch head uses an exp output activation so the scale stays positive,
/// and every head starts pinned at the identity frame (zero final-layer
/// weights).
#[derive(Debug, Clone)]
pub struct PreNet {
    pub(crate) rotation: Option<DenseNet>,
    pub(crate) stretch: Option<DenseNet>,
    pub(crate) shift: Option<DenseNet>,
    pub(crate) stretch_per_variable: bool,
    pub(crate) n_y: usize,
}

impl PreNet {
    pub fn build(
        spec: &PreNetSpec,
        input_dim: usize,
        n_y: usize,
        n_vars: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if spec.stretch_per_variable {
            if spec.rotation.is_some() || spec.shift.is_some() {
                return Err(OperatorError::InvalidSpec(
                    "per-variable stretch excludes rotation and shift blocks".into(),
                ));
            }
            if spec.stretch.is_none() {
                return Err(OperatorError::InvalidSpec(
                    "per-variable stretch mode needs a stretch block".into(),
                ));
            }
            if n_y != 1 {
                return Err(OperatorError::InvalidSpec(
                    "per-variable stretch assumes a scalar trunk coordinate".into(),
                ));
            }
        }
        if spec.rotation.is_some() && n_y != 2 {
            return Err(OperatorError::InvalidSpec(
                "rotation block needs two trunk coordinates".into(),
            ));
        }
        let rotation = spec
            .rotation
            .as_ref()
            .map(|s| build_head(s, input_dim, 1, Activation::Identity, rng))
            .transpose()?;
        let stretch_outs = if spec.stretch_per_variable { n_vars } else { 1 };
        let stretch = spec
            .stretch
            .as_ref()
            .map(|s| build_head(s, input_dim, stretch_outs, Activation::Exp, rng))
            .transpose()?;
        let shift = spec
            .shift
            .as_ref()
            .map(|s| build_head(s, input_dim, n_y, Activation::Identity, rng))
            .transpose()?;
        Ok(Self { rotation, stretch, shift, stretch_per_variable: spec.stretch_per_variable, n_y })
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn stretch_per_variable(&self) -> bool {
        self.stretch_per_variable
    }

    pub fn param_count(&self) -> usize {
        self.rotation.as_ref().map_or(0, DenseNet::param_count)
            + self.stretch.as_ref().map_or(0, DenseNet::param_count)
            + self.shift.as_ref().map_or(0, DenseNet::param_count)
    }

    /// Frame parameters for one scenario input (already in model units). In
    /// per-variable stretch mode the scale of `var_index` is reported.
    pub fn frame(&self, u_scaled: &[f64], var_index: usize) -> Result<FrameParams> {
        let u = Array1::from_vec(u_scaled.to_vec());
        let scale = match &self.stretch {
            Some(net) => {
                let out = net.forward(&u)?;
                if self.stretch_per_variable {
                    out[var_index]
                } else {
                    out[0]
                }
            }
            None => 1.0,
        };
        let angles = match &self.rotation {
            Some(net) => net.forward(&u)?.to_vec(),
            None => vec![0.0],
        };
        let shift = match &self.shift {
            Some(net) => net.forward(&u)?.to_vec(),
            None => vec![0.0; self.n_y],
        };
        Ok(FrameParams { scale, angles, shift })
    }
}

/// A Pre-Net head: Glorot body, the requested output activation, and the
/// final layer pinned so the initial frame is the identity.
fn build_head(
    net_spec: &NetSpec,
    input_dim: usize,
    outs: usize,
    head: Activation,
    rng: &mut impl Rng,
) -> Result<DenseNet> {
    let mut net = DenseNet::glorot(
        &net_spec.dims(input_dim, outs),
        net_spec.hidden_activation,
        head,
        rng,
    )?;
    net.pin_output(&vec![0.0; outs])?;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_frame_is_a_no_op() {
        let f = FrameParams::identity(3);
        let y = vec![1.0, -2.0, 0.5];
        // 3-d has no rotation support, so build a 1-d and 2-d check instead
        let f1 = FrameParams::identity(1);
        assert_eq!(prenet_transform(&f1, &[4.2]).unwrap(), vec![4.2]);
        let f2 = FrameParams::identity(2);
        assert_eq!(prenet_transform(&f2, &[1.0, -2.0]).unwrap(), vec![1.0, -2.0]);
        assert!(prenet_transform(&f, &y).is_err());
    }

    #[test]
    fn quarter_turn_rotates() {
        let f = FrameParams {
            scale: 1.0,
            angles: vec![std::f64::consts::FRAC_PI_2],
            shift: vec![0.0, 0.0],
        };
        let out = prenet_transform(&f, &[1.0, 0.0]).unwrap();
        assert!((out[0] - 0.0).abs() < 1e-15);
        assert!((out[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_affine_case() {
        let f = FrameParams { scale: 2.0, angles: vec![0.0], shift: vec![-3.0] };
        assert_eq!(prenet_transform(&f, &[5.0]).unwrap(), vec![7.0]);
    }

    #[test]
    fn rotation_matrices_are_orthogonal() {
        let mut theta = -9.0f64;
        for _ in 0..1000 {
            theta += 0.018;
            let r = rotation_matrix(theta);
            let g = r.t().dot(&r);
            for i in 0..2 {
                for j in 0..2 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g[[i, j]] - want).abs() < 1e-12);
                }
            }
        }
    }
}
