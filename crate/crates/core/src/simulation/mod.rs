//! Simulation schemes and the Monte Carlo harness.

pub mod monte_carlo;
pub mod schemes;

pub use schemes::{
    gen_covariates, gen_dataset, mse_g, true_g, Scheme, SchemeConfig, Simulated, Truth,
    OUTLIER_MEAN, OUTLIER_RATE, OUTLIER_SD, ST_NOISE,
};

pub use monte_carlo::{
    monte_carlo, replicate_data_seed, truth_value, BootstrapSettings, MonteCarloConfig,
    ParamSummary, ReplicateRecord, SimReport,
};
