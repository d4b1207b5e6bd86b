/// Elementwise activations supported by the dense layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Exp,
    Identity,
    Relu,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Exp => x.exp(),
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `y = f(x)`; for
    /// Relu the pre-activation `x` is used instead.
    pub fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Exp => y,
            Activation::Identity => 1.0,
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Exp => "exp",
            Activation::Identity => "identity",
            Activation::Relu => "relu",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "tanh" => Activation::Tanh,
            "exp" => Activation::Exp,
            "identity" => Activation::Identity,
            "relu" => Activation::Relu,
            _ => return None,
        })
    }
}
