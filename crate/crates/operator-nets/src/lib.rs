//! The four operator-surrogate architectures and their training paradigms:
//! vanilla (joint branch/trunk/bias), POD (frozen SVD-mode trunk), SVD
//! (independently fitted trunk and branch assembled at prediction time), and
//! flex (a pre-transformation network discovering a moving reference frame
//! before the trunk).
//!
//! Trained models are immutable and safe to share across threads for
//! inference.

mod dataset;
mod error;
mod flex;
mod persist;
mod pod;
mod prenet;
mod scaling;
mod spec;
mod svd_onet;
mod vanilla;

pub use dataset::OperatorDataset;
pub use error::{OperatorError, Result};
pub use flex::{
    alignment_diagnostics, flex_fit, flex_loss_grads, AlignmentDiagnostics, FlexDeepONet,
    FlexGrads, FlexVar, FrameRow,
};
pub use persist::{
    load_model, model_from_str, model_to_string, save_model, OperatorModel,
    OPERATOR_FORMAT_VERSION,
};
pub use pod::{pod_deeponet_fit, PodHistories};
pub use prenet::{prenet_transform, rotation_matrix, FrameParams, PreNet};
pub use scaling::{InputScaling, UniformScaler};
pub use spec::{NetSpec, PreNetSpec};
pub use svd_onet::{svd_deeponet_fit, SvdAssembly, SvdFitOutcome, SvdGroup, SvdVar};
pub use vanilla::{vanilla_fit, VanillaDeepONet, VanillaVar};
