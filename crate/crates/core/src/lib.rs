//! Monotone single-index modal regression.
//!
//! The conditional mode of `y` given covariates `x` is modelled as `g(β⊤x)` with an increasing
//! link `g` — a positive-weight tanh network or a monotone Bernstein polynomial — and two-piece
//! skewed errors (Student-t, normal, or their symmetric special cases). Parameters are learned
//! by minibatch gradient descent on the likelihood; uncertainty comes from a parametric
//! bootstrap.

pub mod bernstein;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod inference;
pub mod monotone_net;
pub mod numerics;
pub mod simulation;

pub use error::{Error, Result};
pub use estimation::{
    compute_index, negative_log_likelihood, nll_gradient, predict_mode, residuals, sgd_fit,
    Dataset, ErrorFamily, Estimates, FitResult, LinkKind, ModelSpec, Optimizer, ParamVector,
    TrainConfig,
};
pub use inference::{
    ci_quantiles, kfold_cv, model_select, parametric_bootstrap, pointwise_band_g,
    residual_diagnostic, BootstrapMode, BootstrapResult, CiRecord, Recommendation,
};
pub use numerics::RngStream;
pub use simulation::{gen_dataset, monte_carlo, Scheme, SchemeConfig, SimReport};
