//! Monte Carlo harness: repeated simulate-and-fit with summary tables.

use super::schemes::{gen_dataset, mse_g, Scheme, SchemeConfig, ST_NOISE};
use crate::error::{Error, Result};
use crate::estimation::{sgd_fit, Estimates, ModelSpec, TrainConfig};
use crate::inference::{
    bootstrap_se, named_values, parametric_bootstrap, quantile, sample_sd, BootstrapMode,
};
use crate::numerics::{derive_seed, RngStream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub b: usize,
    pub mode: BootstrapMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub scheme: Scheme,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub train: TrainConfig,
    pub bootstrap: Option<BootstrapSettings>,
}

/// Outcome of one model on one replicate dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub id: usize,
    pub estimates: Option<Estimates>,
    pub g_mse: Option<f64>,
    /// Per-parameter bootstrap standard errors, when the bootstrap ran.
    pub bootstrap_se: Option<Vec<(String, Option<f64>)>>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub parameter: String,
    pub truth: Option<f64>,
    /// Average of the point estimates.
    pub ape: f64,
    pub avg_bias: Option<f64>,
    /// Standard deviation of the point estimates; absent with fewer than two replicates.
    pub empirical_se: Option<f64>,
    pub avg_bootstrap_se: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub spec: ModelSpec,
    pub scheme: Scheme,
    pub n: usize,
    pub reps: usize,
    pub succeeded: usize,
    pub params: Vec<ParamSummary>,
    pub g_mse: Vec<f64>,
    pub g_mse_median: Option<f64>,
    pub replicates: Vec<ReplicateRecord>,
}

impl SimReport {
    pub fn param(&self, name: &str) -> Option<&ParamSummary> {
        self.params.iter().find(|p| p.parameter == name)
    }

    /// CSV with columns `parameter, APE, avg_bias, empirical_SE, avg_bootstrap_SE`; `NA` marks
    /// undefined entries.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let na = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "parameter",
            "APE",
            "avg_bias",
            "empirical_SE",
            "avg_bootstrap_SE",
        ])?;
        for p in &self.params {
            w.write_record([
                p.parameter.clone(),
                format!("{}", p.ape),
                na(p.avg_bias),
                na(p.empirical_se),
                na(p.avg_bootstrap_se),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Data-generating values of the named parameters for a scheme.
pub fn truth_value(scheme: Scheme, name: &str) -> Option<f64> {
    if name.starts_with("beta[") {
        return Some(SchemeConfig::true_beta()[0]);
    }
    if scheme == Scheme::Contaminated {
        return None;
    }
    let (w, sigma, delta) = ST_NOISE;
    match name {
        "w" => Some(w),
        "sigma" => Some(sigma),
        "delta" => Some(delta),
        _ => None,
    }
}

/// Seed of replicate `id`'s dataset.
pub fn replicate_data_seed(cfg: &MonteCarloConfig, id: usize) -> u64 {
    derive_seed(cfg.seed, id as u64)
}

fn run_one(cfg: &MonteCarloConfig, specs: &[ModelSpec], id: usize) -> Vec<ReplicateRecord> {
    let data_seed = replicate_data_seed(cfg, id);
    let sim = SchemeConfig::new(cfg.scheme, cfg.n, data_seed)
        .and_then(|sc| gen_dataset(&sc, &mut RngStream::new(data_seed)));
    specs
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            let failed = |e: Error| ReplicateRecord {
                id,
                estimates: None,
                g_mse: None,
                bootstrap_se: None,
                error: Some(e.to_string()),
            };
            let sim = match &sim {
                Ok(s) => s,
                Err(e) => return failed(Error::Numeric(e.to_string())),
            };
            let train = TrainConfig {
                seed: derive_seed(data_seed, 1 + k as u64),
                ..cfg.train.clone()
            };
            let fit = match sgd_fit(spec, &sim.data, &train) {
                Ok(f) => f,
                Err(e) => return failed(e),
            };
            let g_mse = if spec.link.has_index() {
                mse_g(&fit, &sim.data, &sim.truth).ok()
            } else {
                None
            };
            let bootstrap_se = cfg.bootstrap.and_then(|bs| {
                parametric_bootstrap(
                    &fit,
                    &sim.data,
                    bs.b,
                    &train,
                    derive_seed(train.seed, 7),
                    bs.mode,
                )
                .and_then(|boot| bootstrap_se(&boot))
                .ok()
            });
            ReplicateRecord {
                id,
                estimates: Some(fit.estimates),
                g_mse,
                bootstrap_se,
                error: None,
            }
        })
        .collect()
}

/// Runs `cfg.reps` replicates for every spec. Replicate `id` draws its dataset from
/// `derive_seed(cfg.seed, id)`; all specs see the same datasets. Replicates run in parallel
/// and are merged by id.
pub fn monte_carlo(cfg: &MonteCarloConfig, specs: &[ModelSpec]) -> Result<Vec<SimReport>> {
    if cfg.reps == 0 {
        return Err(Error::domain("at least one replicate is required"));
    }
    if specs.is_empty() {
        return Err(Error::domain("no model specs given"));
    }
    cfg.train.validate()?;
    let per_rep: Vec<Vec<ReplicateRecord>> = (1..=cfg.reps)
        .into_par_iter()
        .map(|id| run_one(cfg, specs, id))
        .collect();
    specs
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            let records: Vec<ReplicateRecord> = per_rep.iter().map(|r| r[k].clone()).collect();
            Ok(summarize(cfg, spec, records))
        })
        .collect()
}

fn summarize(cfg: &MonteCarloConfig, spec: &ModelSpec, records: Vec<ReplicateRecord>) -> SimReport {
    let columns: Vec<String> = ["x1", "x2", "x3"].iter().map(|s| s.to_string()).collect();
    let ok: Vec<&ReplicateRecord> = records.iter().filter(|r| r.estimates.is_some()).collect();
    let mut params = Vec::new();
    if let Some(first) = ok.first() {
        let names: Vec<String> =
            named_values(&columns, first.estimates.as_ref().expect("filtered"))
                .into_iter()
                .map(|(n, _)| n)
                .collect();
        for (j, name) in names.iter().enumerate() {
            let vals: Vec<f64> = ok
                .iter()
                .map(|r| named_values(&columns, r.estimates.as_ref().expect("filtered"))[j].1)
                .collect();
            let ape = vals.iter().sum::<f64>() / vals.len() as f64;
            let truth = truth_value(cfg.scheme, name);
            let boot: Vec<f64> = ok
                .iter()
                .filter_map(|r| r.bootstrap_se.as_ref())
                .filter_map(|ses| ses.iter().find(|(n, _)| n == name).and_then(|(_, s)| *s))
                .collect();
            params.push(ParamSummary {
                parameter: name.clone(),
                truth,
                ape,
                avg_bias: truth.map(|t| ape - t),
                empirical_se: sample_sd(&vals),
                avg_bootstrap_se: (!boot.is_empty())
                    .then(|| boot.iter().sum::<f64>() / boot.len() as f64),
            });
        }
    }
    let g_mse: Vec<f64> = records.iter().filter_map(|r| r.g_mse).collect();
    let g_mse_median = quantile(&g_mse, 0.5).ok();
    SimReport {
        spec: spec.clone(),
        scheme: cfg.scheme,
        n: cfg.n,
        reps: cfg.reps,
        succeeded: ok.len(),
        params,
        g_mse,
        g_mse_median,
        replicates: records,
    }
}
