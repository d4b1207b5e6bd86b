use nn_core::Activation;

/// Hidden sizes and activations for one feed-forward block.
#[derive(Debug, Clone, PartialEq)]
pub struct NetSpec {
    pub hidden: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

impl NetSpec {
    pub fn tanh(hidden: Vec<usize>) -> Self {
        Self { hidden, hidden_activation: Activation::Tanh, output_activation: Activation::Identity }
    }

    pub fn with_output(mut self, act: Activation) -> Self {
        self.output_activation = act;
        self
    }

    pub fn dims(&self, input: usize, output: usize) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden.len() + 2);
        dims.push(input);
        dims.extend_from_slice(&self.hidden);
        dims.push(output);
        dims
    }
}

/// Which Pre-Net component blocks exist. A missing block contributes its
/// identity value (scale 1, angle 0, shift 0).
#[derive(Debug, Clone, PartialEq)]
pub struct PreNetSpec {
    pub rotation: Option<NetSpec>,
    pub stretch: Option<NetSpec>,
    pub shift: Option<NetSpec>,
    /// Combustion-style sharing: one stretch output per variable, applied to
    /// that variable's trunk input. Excludes rotation and shift.
    pub stretch_per_variable: bool,
}

impl PreNetSpec {
    pub fn none() -> Self {
        Self { rotation: None, stretch: None, shift: None, stretch_per_variable: false }
    }

    pub fn shift_only(spec: NetSpec) -> Self {
        Self { rotation: None, stretch: None, shift: Some(spec), stretch_per_variable: false }
    }

    pub fn shared_stretch(spec: NetSpec) -> Self {
        Self { rotation: None, stretch: Some(spec), shift: None, stretch_per_variable: true }
    }

    pub fn full(rotation: NetSpec, stretch: NetSpec, shift: NetSpec) -> Self {
        Self {
            rotation: Some(rotation),
            stretch: Some(stretch),
            shift: Some(shift),
            stretch_per_variable: false,
        }
    }
}
