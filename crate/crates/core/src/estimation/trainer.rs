//! Minibatch gradient training of a [`ModelSpec`] and the resulting [`FitResult`].

use super::dataset::{Dataset, Design};
use super::loss::{index_values, negative_log_likelihood, nll_gradient, predict_modes};
use super::params::{Estimates, LinkParams, ParamVector};
use super::spec::{LinkKind, ModelSpec, Optimizer, TrainConfig};
use crate::bernstein::BernsteinParams;
use crate::error::{Error, Result};
use crate::monotone_net::{forward_batch, init_free_params, init_params, NetParams};
use crate::numerics::{derive_seed, sample_normal, RngStream};
use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub const FIT_SCHEMA: &str = "monosim.fit.v1";

/// A trained model together with its training record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub schema: String,
    pub spec: ModelSpec,
    pub params: ParamVector,
    pub estimates: Estimates,
    /// Full-data negative log-likelihood at the end of each epoch.
    pub learning_curve: Vec<f64>,
    pub final_nll: f64,
    pub config: TrainConfig,
    /// Covariate column names, in the order of `β̂`.
    pub columns: Vec<String>,
    /// How raw CSV columns map onto covariates, when the fit came from a table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<Design>,
}

impl FitResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let fit: FitResult = serde_json::from_str(text)?;
        if fit.schema != FIT_SCHEMA {
            return Err(Error::Input(format!(
                "unsupported fit schema {:?}",
                fit.schema
            )));
        }
        Ok(fit)
    }

    /// Predicted modes for every row of `x`.
    pub fn predict(&self, x: ndarray::ArrayView2<f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.columns.len() {
            return Err(Error::Shape(format!(
                "fit expects {} covariates, got {}",
                self.columns.len(),
                x.ncols()
            )));
        }
        predict_modes(&self.spec, &self.params, x)
    }

    /// Evaluates the fitted link at index values; `None` for links without an index.
    pub fn link_curve(&self, us: &[f64]) -> Result<Option<Vec<f64>>> {
        match &self.params.link {
            LinkParams::Net(net) if self.spec.link == LinkKind::GxD => {
                Ok(Some(crate::monotone_net::predict_batch(net, us)?))
            }
            LinkParams::Bernstein(b) => Ok(Some(crate::bernstein::bern_predict_batch(b, us))),
            _ => Ok(None),
        }
    }
}

/// `β⊤x` for a single covariate row.
pub fn compute_index(beta: &[f64], x: &[f64]) -> Result<f64> {
    if beta.len() != x.len() {
        return Err(Error::Shape(format!(
            "β has {} entries, row has {}",
            beta.len(),
            x.len()
        )));
    }
    Ok(beta.iter().zip(x).map(|(b, v)| b * v).sum())
}

/// Predicted mode `ĝ(β̂⊤x)` (or `f̂(x)`) for one covariate row.
pub fn predict_mode(fit: &FitResult, x: &[f64]) -> Result<f64> {
    let row = ndarray::ArrayView2::from_shape((1, x.len()), x)
        .map_err(|e| Error::Shape(e.to_string()))?;
    Ok(fit.predict(row)?[0])
}

/// Residuals `y_i − θ̂_i`.
pub fn residuals(fit: &FitResult, data: &Dataset) -> Result<Vec<f64>> {
    let pred = fit.predict(data.x.view())?;
    Ok(data.y.iter().zip(&pred).map(|(y, t)| y - t).collect())
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Robust spread: normalized MAD, falling back to the standard deviation and then 1.
fn robust_scale(values: &[f64]) -> f64 {
    let s = sorted(values);
    let med = quantile_sorted(&s, 0.5);
    let dev: Vec<f64> = sorted(&values.iter().map(|v| (v - med).abs()).collect::<Vec<_>>());
    let mad = quantile_sorted(&dev, 0.5) / 0.674_489_750_196_081_7;
    if mad > 1e-8 {
        return mad;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd > 1e-8 {
        sd
    } else {
        1.0
    }
}

/// Least-squares slope direction of `y` on `x`, or a random direction if degenerate.
fn ols_direction(data: &Dataset, rng: &mut RngStream) -> Vec<f64> {
    let (n, p) = (data.n(), data.p());
    let ybar = data.y.iter().sum::<f64>() / n as f64;
    let xbar: Vec<f64> = (0..p).map(|j| data.x.column(j).sum() / n as f64).collect();
    // normal equations with a small ridge for stability
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (row, y) in data.x.rows().into_iter().zip(&data.y) {
        for a in 0..p {
            let da = row[a] - xbar[a];
            xty[a] += da * (y - ybar);
            for b in 0..p {
                xtx[a][b] += da * (row[b] - xbar[b]);
            }
        }
    }
    for (a, row) in xtx.iter_mut().enumerate() {
        row[a] += 1e-8 * n as f64;
    }
    let slope = solve_dense(xtx, xty);
    let norm = slope
        .as_ref()
        .map_or(0.0, |s| s.iter().map(|v| v * v).sum::<f64>().sqrt());
    match slope {
        Some(s) if norm.is_finite() && norm > 1e-10 => s.iter().map(|v| v / norm).collect(),
        _ => {
            let v: Vec<f64> = (0..p).map(|_| sample_normal(rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            v.iter().map(|x| x / norm).collect()
        }
    }
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let p = b.len();
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..p {
            let f = a[r][col] / a[col][col];
            for c in col..p {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; p];
    for r in (0..p).rev() {
        let s: f64 = (r + 1..p).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Rescales a network's output layer so predictions span the response's spread and centre
/// on its median. Positive networks scale through the log-weights, free ones directly.
fn calibrate_output(
    net: &mut NetParams,
    inputs: ndarray::ArrayView2<f64>,
    y: &[f64],
) -> Result<()> {
    let (out, _) = forward_batch(net, inputs)?;
    let out = out.to_vec();
    let target = robust_scale(y);
    let current = robust_scale(&out);
    let factor = (target / current).clamp(1e-3, 1e3);
    let last = net.layers.last_mut().expect("network has an output layer");
    match net.mode {
        crate::monotone_net::WeightMode::Positive => last.raw.mapv_inplace(|u| u + factor.ln()),
        crate::monotone_net::WeightMode::Free => last.raw.mapv_inplace(|u| u * factor),
    }
    last.bias.mapv_inplace(|b| b * factor);
    let (out, _) = forward_batch(net, inputs)?;
    let shift = quantile_sorted(&sorted(y), 0.5) - quantile_sorted(&sorted(&out.to_vec()), 0.5);
    let last = net.layers.last_mut().expect("network has an output layer");
    last.bias.mapv_inplace(|b| b + shift);
    Ok(())
}

/// Data-informed starting point for training.
///
/// The direction starts at the least-squares slope; first-layer biases of a monotone network
/// are spread over the quantiles of the starting index so hidden units cover its range; the
/// output layer is calibrated to the response; `w = 0.5`, `δ = 10`, and `σ` is the robust
/// spread of the starting residuals.
pub fn initialize(spec: &ModelSpec, data: &Dataset, rng: &mut RngStream) -> Result<ParamVector> {
    spec.validate()?;
    data.validate()?;
    let v = if spec.link.has_index() {
        ols_direction(data, rng)
    } else {
        Vec::new()
    };
    let u = if spec.link.has_index() {
        index_values(&v, data.x.view())?
    } else {
        Vec::new()
    };
    let u_sorted = sorted(&u);

    let link = match spec.link {
        LinkKind::GxD => {
            let mut net = init_params(&spec.net, rng)?;
            let first = &mut net.layers[0];
            let h = first.bias.len();
            for j in 0..h {
                let a = first.raw[[j, 0]].exp();
                let q = quantile_sorted(&u_sorted, (j as f64 + 0.5) / h as f64);
                first.bias[j] = -a * q + 0.1 * sample_normal(rng);
            }
            let input = Array2::from_shape_vec((u.len(), 1), u.clone()).expect("column");
            calibrate_output(&mut net, input.view(), &data.y)?;
            LinkParams::Net(net)
        }
        LinkKind::Fx => {
            let mut net = init_free_params(&spec.net, data.p(), rng)?;
            calibrate_output(&mut net, data.x.view(), &data.y)?;
            LinkParams::Net(net)
        }
        LinkKind::GxB => {
            let (lo, hi) = (u_sorted[0], u_sorted[u_sorted.len() - 1]);
            let span = (hi - lo).max(1e-6);
            let ys = sorted(&data.y);
            let (q05, q95) = (quantile_sorted(&ys, 0.05), quantile_sorted(&ys, 0.95));
            let j = spec.bernstein_degree;
            let step = ((q95 - q05) / j as f64).max(1e-6);
            LinkParams::Bernstein(BernsteinParams::new(
                q05,
                vec![step.ln(); j],
                lo - 0.1 * span,
                hi + 0.1 * span,
            )?)
        }
    };
    let mut pv = ParamVector {
        v,
        link,
        a: 0.0,
        b: 0.0,
        c: 8f64.ln(),
    };
    let theta = predict_modes(spec, &pv, data.x.view())?;
    let resid: Vec<f64> = data.y.iter().zip(&theta).map(|(y, t)| y - t).collect();
    pv.b = robust_scale(&resid).ln();
    Ok(pv)
}

struct Stepper {
    rule: Optimizer,
    lr: f64,
    m: Vec<f64>,
    s: Vec<f64>,
    t: i32,
}

impl Stepper {
    fn new(rule: Optimizer, lr: f64, len: usize) -> Self {
        Self {
            rule,
            lr,
            m: vec![0.0; len],
            s: vec![0.0; len],
            t: 0,
        }
    }

    fn step(&mut self, x: &mut [f64], g: &[f64]) {
        self.t += 1;
        match self.rule {
            Optimizer::Sgd => {
                for (xi, gi) in x.iter_mut().zip(g) {
                    *xi -= self.lr * gi;
                }
            }
            Optimizer::Momentum { beta } => {
                for ((xi, gi), mi) in x.iter_mut().zip(g).zip(&mut self.m) {
                    *mi = beta * *mi + gi;
                    *xi -= self.lr * *mi;
                }
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                let c1 = 1.0 - beta1.powi(self.t);
                let c2 = 1.0 - beta2.powi(self.t);
                for (((xi, gi), mi), si) in x.iter_mut().zip(g).zip(&mut self.m).zip(&mut self.s) {
                    *mi = beta1 * *mi + (1.0 - beta1) * gi;
                    *si = beta2 * *si + (1.0 - beta2) * gi * gi;
                    *xi -= self.lr * (*mi / c1) / ((*si / c2).sqrt() + eps);
                }
            }
        }
    }
}

/// Trains from an explicit starting point. Rows are reshuffled every epoch from a stream
/// seeded by `config.seed`; each minibatch step follows the gradient of the loss summed over
/// the batch's rows, matching the summed form of the full-data objective.
pub fn train_from(
    spec: &ModelSpec,
    data: &Dataset,
    config: &TrainConfig,
    start: ParamVector,
) -> Result<(ParamVector, Vec<f64>)> {
    config.validate()?;
    let n = data.n();
    let mut params = start;
    let mut flat = params.to_flat();
    let mut stepper = Stepper::new(config.optimizer, config.learning_rate, flat.len());
    let mut rng = RngStream::with_stream(config.seed, 1);
    let mut order: Vec<usize> = (0..n).collect();
    let mut curve = Vec::with_capacity(config.epochs);
    let mut last_good = params.clone();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let step = nll_gradient(spec, &params, data, batch);
            let (_, grad) = step.map_err(|_| Error::Training {
                epoch,
                last_good_epoch: epoch - 1,
            })?;
            stepper.step(&mut flat, &grad);
            params.set_flat(&flat)?;
        }
        let nll = negative_log_likelihood(spec, &params, data)
            .ok()
            .filter(|v| v.is_finite())
            .ok_or(Error::Training {
                epoch,
                last_good_epoch: epoch - 1,
            })?;
        curve.push(nll);
        last_good.clone_from(&params);
    }
    Ok((last_good, curve))
}

/// Fits `spec` to `data`. With `config.starts > 1`, independent starts keyed by
/// `derive_seed(config.seed, start)` are trained and the lowest final loss is kept.
pub fn sgd_fit(spec: &ModelSpec, data: &Dataset, config: &TrainConfig) -> Result<FitResult> {
    config.validate()?;
    spec.validate()?;
    data.validate()?;
    let mut best: Option<(ParamVector, Vec<f64>)> = None;
    let mut last_err = None;
    for s in 0..config.starts {
        let seed = if s == 0 {
            config.seed
        } else {
            derive_seed(config.seed, s as u64)
        };
        let mut rng = RngStream::new(seed);
        let start = initialize(spec, data, &mut rng)?;
        match train_from(
            spec,
            data,
            &TrainConfig {
                seed,
                ..config.clone()
            },
            start,
        ) {
            Ok((p, curve)) => {
                let better = best.as_ref().map_or(true, |(_, c)| curve.last() < c.last());
                if better {
                    best = Some((p, curve));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let (params, curve) = match (best, last_err) {
        (Some(b), _) => b,
        (None, Some(e)) => return Err(e),
        (None, None) => unreachable!("at least one start"),
    };
    Ok(finish(spec, data, config, params, curve))
}

pub(crate) fn finish(
    spec: &ModelSpec,
    data: &Dataset,
    config: &TrainConfig,
    params: ParamVector,
    curve: Vec<f64>,
) -> FitResult {
    let final_nll = *curve.last().expect("at least one epoch");
    FitResult {
        schema: FIT_SCHEMA.to_string(),
        spec: spec.clone(),
        estimates: params.estimates(spec),
        params,
        learning_curve: curve,
        final_nll,
        config: config.clone(),
        columns: data.columns.clone(),
        design: None,
    }
}

/// Half-sample mode of a sample (Bickel's robust mode estimator).
pub fn half_sample_mode(values: &[f64]) -> Option<f64> {
    if values.iter().any(|v| !v.is_finite()) || values.is_empty() {
        return None;
    }
    let mut s = sorted(values);
    while s.len() > 3 {
        let h = s.len().div_ceil(2);
        let (mut best, mut width) = (0, f64::INFINITY);
        for i in 0..=s.len() - h {
            let w = s[i + h - 1] - s[i];
            if w < width {
                width = w;
                best = i;
            }
        }
        s = s[best..best + h].to_vec();
    }
    Some(match s.len() {
        1 => s[0],
        2 => 0.5 * (s[0] + s[1]),
        _ => {
            if s[1] - s[0] < s[2] - s[1] {
                0.5 * (s[0] + s[1])
            } else if s[1] - s[0] > s[2] - s[1] {
                0.5 * (s[1] + s[2])
            } else {
                s[1]
            }
        }
    })
}
