//! Fitting a representation to one video.

mod fit;
mod optim;

pub use fit::{
    evaluate_regression, finetune, fit, fit_with_observer, EpochRecord, FitOutcome, FrameSource, LossKind,
    MaskSource, TrainLog, TrainMode, TrainPlan,
};
pub use optim::{adam_step, cosine_lr, AdamState, OptimizerConfig};
