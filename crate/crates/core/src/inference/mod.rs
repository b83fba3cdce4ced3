//! Uncertainty quantification and model checking: parametric bootstrap, percentile
//! intervals, link bands, cross-validation, residual diagnostics and family selection.

pub mod bootstrap;
pub mod cv;
pub mod diagnostics;
pub mod intervals;

pub use bootstrap::{
    parametric_bootstrap, simulate_response, BootstrapMode, BootstrapResult, Replicate,
    ReplicateFailure, BOOTSTRAP_SCHEMA,
};
pub use cv::{fold_partition, kfold_cv, CvResult, FoldResult};
pub use diagnostics::{residual_diagnostic, ResidualDiagnostic, CURVE_POINTS};
pub use intervals::{
    bootstrap_se, ci_quantiles, linspace, model_select, named_values, pointwise_band_g, quantile,
    sample_sd, write_band_csv, write_ci_csv, BandPoint, CiRecord, Recommendation,
};
