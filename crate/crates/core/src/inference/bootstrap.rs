//! Parametric bootstrap: simulate responses from a fitted error law and refit.

use crate::distributions::{sn_draw, st_draw, two_piece_scales};
use crate::error::{Error, Result};
use crate::estimation::predict_modes;
use crate::estimation::{
    sgd_fit, Dataset, ErrorFamily, Estimates, FitResult, ModelSpec, ParamVector, TrainConfig,
};
use crate::numerics::{derive_seed, RngStream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const BOOTSTRAP_SCHEMA: &str = "monosim.bootstrap.v1";

/// Which fitted model each replicate simulates from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BootstrapMode {
    /// Replicate `b` simulates from the estimates of replicate `b − 1` (the first from the
    /// original fit). Inherently sequential.
    #[default]
    Chained,
    /// Every replicate simulates from the original fit. Replicates run in parallel.
    Classic,
}

impl FromStr for BootstrapMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chained" => Ok(BootstrapMode::Chained),
            "classic" => Ok(BootstrapMode::Classic),
            other => Err(Error::Input(format!(
                "bootstrap mode must be chained or classic, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for BootstrapMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BootstrapMode::Chained => "chained",
            BootstrapMode::Classic => "classic",
        })
    }
}

/// One successful refit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replicate {
    /// 1-based replicate id.
    pub id: usize,
    /// Whether the retry seed was needed.
    pub retried: bool,
    pub estimates: Estimates,
    /// Full parameter snapshot, used for link bands.
    pub params: ParamVector,
}

/// A replicate that failed on both its seed and its retry seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateFailure {
    pub id: usize,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub schema: String,
    /// Requested number of replicates; equals `replicates.len() + failures.len()`.
    pub b: usize,
    pub mode: BootstrapMode,
    pub seed: u64,
    pub spec: ModelSpec,
    pub columns: Vec<String>,
    /// Estimates of the original fit.
    pub point: Estimates,
    /// Parameters of the original fit.
    pub point_params: ParamVector,
    pub replicates: Vec<Replicate>,
    pub failures: Vec<ReplicateFailure>,
}

impl BootstrapResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let boot: BootstrapResult = serde_json::from_str(text)?;
        if boot.schema != BOOTSTRAP_SCHEMA {
            return Err(Error::Input(format!(
                "unsupported bootstrap schema {:?}",
                boot.schema
            )));
        }
        Ok(boot)
    }
}

/// Draws a response vector from the fitted error law around the fitted modes.
pub fn simulate_response(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &Dataset,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let theta = predict_modes(spec, params, data.x.view())?;
    let w = params.w(spec.family);
    let sigma = params.sigma();
    let (s_lo, s_hi) = two_piece_scales(w, sigma);
    let y = match (spec.family, params.delta(spec.family)) {
        (ErrorFamily::St | ErrorFamily::SymmetricT, Some(delta)) => theta
            .iter()
            .map(|&t| st_draw(rng, w, t, s_lo, s_hi, delta))
            .collect(),
        _ => theta
            .iter()
            .map(|&t| sn_draw(rng, w, t, s_lo, s_hi))
            .collect(),
    };
    Ok(y)
}

/// One replicate: simulate from `source`, refit. On failure, retry once with a sub-seed.
fn run_replicate(
    spec: &ModelSpec,
    source: &ParamVector,
    data: &Dataset,
    config: &TrainConfig,
    seed: u64,
    id: usize,
) -> std::result::Result<Replicate, ReplicateFailure> {
    let attempt = |s: u64| -> Result<FitResult> {
        let mut rng = RngStream::with_stream(s, 2);
        let y = simulate_response(spec, source, data, &mut rng)?;
        let boot_data = data.with_response(y)?;
        sgd_fit(
            spec,
            &boot_data,
            &TrainConfig {
                seed: s,
                ..config.clone()
            },
        )
    };
    let first_seed = derive_seed(seed, id as u64);
    let (fit, retried) = match attempt(first_seed) {
        Ok(fit) => (fit, false),
        Err(_) => match attempt(derive_seed(first_seed, 1)) {
            Ok(fit) => (fit, true),
            Err(e) => {
                return Err(ReplicateFailure {
                    id,
                    error: e.to_string(),
                })
            }
        },
    };
    Ok(Replicate {
        id,
        retried,
        estimates: fit.estimates,
        params: fit.params,
    })
}

/// Parametric bootstrap with `b` replicates. Replicate `id` is keyed by
/// `derive_seed(seed, id)` for both the simulated response and the refit, so classic-mode
/// output does not depend on scheduling.
pub fn parametric_bootstrap(
    fit0: &FitResult,
    data: &Dataset,
    b: usize,
    config: &TrainConfig,
    seed: u64,
    mode: BootstrapMode,
) -> Result<BootstrapResult> {
    if b == 0 {
        return Err(Error::domain("bootstrap size must be at least 1"));
    }
    if fit0.columns.len() != data.p() {
        return Err(Error::Shape(format!(
            "fit has {} covariates, data {}",
            fit0.columns.len(),
            data.p()
        )));
    }
    config.validate()?;
    let spec = &fit0.spec;
    let outcomes: Vec<std::result::Result<Replicate, ReplicateFailure>> = match mode {
        BootstrapMode::Classic => (1..=b)
            .into_par_iter()
            .map(|id| run_replicate(spec, &fit0.params, data, config, seed, id))
            .collect(),
        BootstrapMode::Chained => {
            let mut source = fit0.params.clone();
            let mut out = Vec::with_capacity(b);
            for id in 1..=b {
                let r = run_replicate(spec, &source, data, config, seed, id);
                if let Ok(rep) = &r {
                    source = rep.params.clone();
                }
                out.push(r);
            }
            out
        }
    };
    let mut replicates = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => replicates.push(r),
            Err(f) => failures.push(f),
        }
    }
    Ok(BootstrapResult {
        schema: BOOTSTRAP_SCHEMA.to_string(),
        b,
        mode,
        seed,
        spec: spec.clone(),
        columns: fit0.columns.clone(),
        point: fit0.estimates.clone(),
        point_params: fit0.params.clone(),
        replicates,
        failures,
    })
}
