//! The modal-regression loss, parameter transforms and the minibatch trainer.

pub mod dataset;
pub mod index_equation;
pub mod loss;
pub mod params;
pub mod spec;
pub mod trainer;

pub use dataset::{ColumnScaling, CovariateEncoding, CsvTable, Dataset, Design};
pub use index_equation::{IndexEquation, IndexTerm};
pub use loss::{
    index_values, negative_log_likelihood, nll_gradient, predict_modes, row_nll, RowGrad,
};
pub use params::{Estimates, LinkParams, ParamVector, MIN_DIRECTION_NORM};
pub use spec::{ErrorFamily, LinkKind, ModelSpec, Optimizer, TrainConfig, MODEL_TAGS};
pub use trainer::{
    compute_index, half_sample_mode, initialize, predict_mode, residuals, sgd_fit, train_from,
    FitResult, FIT_SCHEMA,
};
