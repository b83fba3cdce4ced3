//! Fully connected tanh networks with an identity output layer.
//!
//! The monotone variant maps a scalar index to a scalar and keeps every weight strictly
//! positive by storing unconstrained values `U` and using `A = exp(U)` elementwise. With
//! positive weights and increasing activations the composition is increasing in its input.
//! The same machinery with unconstrained weights backs the multivariate baseline that
//! regresses the response on the full covariate vector.

use crate::error::{Error, Result};
use crate::numerics::{sample_normal, RngStream};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

pub const NET_SCHEMA: &str = "monosim.net.v1";

/// Hidden-layer architecture. Input and output widths are implied by the link.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    pub hidden: Vec<usize>,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            hidden: vec![512, 512],
        }
    }
}

impl NetConfig {
    pub fn new(hidden: Vec<usize>) -> Result<Self> {
        let c = Self { hidden };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() {
            return Err(Error::domain("network needs at least one hidden layer"));
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return Err(Error::domain("hidden layer widths must be at least 1"));
        }
        Ok(())
    }
}

/// How stored weights map to the weights used in the affine maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// `A = exp(U)`, strictly positive.
    Positive,
    /// `A = U`.
    Free,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    /// Stored (unconstrained) weights, `out × in`.
    pub raw: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Network parameters: one [`Layer`] per hidden layer plus the output layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetDoc", into = "NetDoc")]
pub struct NetParams {
    pub mode: WeightMode,
    pub layers: Vec<Layer>,
}

/// Gradients with the same layout as [`NetParams`], taken with respect to the stored
/// weights, plus the gradient with respect to each input row.
#[derive(Clone, Debug, PartialEq)]
pub struct NetGradients {
    pub layers: Vec<Layer>,
    /// `n × input_dim`.
    pub input: Array2<f64>,
}

/// Activations retained by [`forward_batch`] for the backward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    /// `activations[0]` is the input batch, `activations[k]` the output of hidden layer `k`.
    activations: Vec<Array2<f64>>,
    layer_count: usize,
}

impl ForwardCache {
    pub fn batch_len(&self) -> usize {
        self.activations[0].nrows()
    }
}

fn init_layers(
    widths: &[usize],
    rng: &mut RngStream,
    weight_law: impl Fn(usize) -> (f64, f64),
) -> Vec<Layer> {
    widths
        .windows(2)
        .map(|pair| {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let (mean, sd) = weight_law(fan_in);
            let raw =
                Array2::from_shape_simple_fn((fan_out, fan_in), || mean + sd * sample_normal(rng));
            let bias = Array1::from_shape_simple_fn(fan_out, || 0.1 * sample_normal(rng));
            Layer { raw, bias }
        })
        .collect()
}

fn widths_for(config: &NetConfig, input_dim: usize) -> Vec<usize> {
    let mut widths = Vec::with_capacity(config.hidden.len() + 2);
    widths.push(input_dim);
    widths.extend_from_slice(&config.hidden);
    widths.push(1);
    widths
}

/// Initializes a monotone scalar network. Stored weights are `N(−ln fan_in, 0.1²)` so the
/// positive weights average about `1/fan_in`; biases are `N(0, 0.1²)`.
pub fn init_params(config: &NetConfig, rng: &mut RngStream) -> Result<NetParams> {
    config.validate()?;
    let layers = init_layers(&widths_for(config, 1), rng, |fan_in| {
        (-(fan_in as f64).ln(), 0.1)
    });
    Ok(NetParams {
        mode: WeightMode::Positive,
        layers,
    })
}

/// Initializes an unconstrained network with `input_dim` inputs, weights `N(0, 1/fan_in)`.
pub fn init_free_params(
    config: &NetConfig,
    input_dim: usize,
    rng: &mut RngStream,
) -> Result<NetParams> {
    config.validate()?;
    if input_dim == 0 {
        return Err(Error::domain("input dimension must be at least 1"));
    }
    let layers = init_layers(&widths_for(config, input_dim), rng, |fan_in| {
        (0.0, (1.0 / fan_in as f64).sqrt())
    });
    Ok(NetParams {
        mode: WeightMode::Free,
        layers,
    })
}

impl NetParams {
    pub fn input_dim(&self) -> usize {
        self.layers[0].raw.ncols()
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.bias.len())
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.raw.len() + l.bias.len()).sum()
    }

    /// Weights as used in the affine maps.
    pub fn effective_weights(&self) -> Vec<Array2<f64>> {
        self.layers
            .iter()
            .map(|l| match self.mode {
                WeightMode::Positive => l.raw.mapv(f64::exp),
                WeightMode::Free => l.raw.clone(),
            })
            .collect()
    }

    pub fn zeros_like(&self) -> Vec<Layer> {
        self.layers
            .iter()
            .map(|l| Layer {
                raw: Array2::zeros(l.raw.dim()),
                bias: Array1::zeros(l.bias.len()),
            })
            .collect()
    }

    fn check_shapes(&self) -> Result<()> {
        if self.layers.len() < 2 {
            return Err(Error::Shape(
                "network needs a hidden and an output layer".into(),
            ));
        }
        for (k, l) in self.layers.iter().enumerate() {
            if l.raw.nrows() != l.bias.len() {
                return Err(Error::Shape(format!(
                    "layer {k}: weight rows {} vs bias {}",
                    l.raw.nrows(),
                    l.bias.len()
                )));
            }
            if k > 0 && self.layers[k - 1].raw.nrows() != l.raw.ncols() {
                return Err(Error::Shape(format!(
                    "layer {k} input width does not match previous layer"
                )));
            }
        }
        if self.layers.last().map(|l| l.bias.len()) != Some(1) {
            return Err(Error::Shape("output layer must have width 1".into()));
        }
        Ok(())
    }
}

/// Hyperbolic tangent through a single `exp`; within a couple of ulps of `f64::tanh` and
/// considerably cheaper on the unpredictable inputs seen inside a network.
#[inline]
pub fn tanh(x: f64) -> f64 {
    let a = x.abs();
    if a < 0.5 {
        let e = (2.0 * x).exp_m1();
        return e / (e + 2.0);
    }
    if a > 20.0 {
        return 1.0f64.copysign(x);
    }
    let e = (-2.0 * a).exp();
    ((1.0 - e) / (1.0 + e)).copysign(x)
}

/// Evaluates the network on each row of `inputs` (`n × input_dim`) using precomputed
/// effective weights.
pub fn forward_batch_with(
    params: &NetParams,
    weights: &[Array2<f64>],
    inputs: ArrayView2<f64>,
) -> Result<(Array1<f64>, ForwardCache)> {
    if inputs.ncols() != params.input_dim() {
        return Err(Error::Shape(format!(
            "network expects {} inputs, got {}",
            params.input_dim(),
            inputs.ncols()
        )));
    }
    if inputs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("network input is not finite".into()));
    }
    let n_layers = params.layers.len();
    let mut activations = Vec::with_capacity(n_layers);
    activations.push(inputs.to_owned());
    for k in 0..n_layers - 1 {
        let mut z = activations[k].dot(&weights[k].t());
        z += &params.layers[k].bias;
        z.mapv_inplace(tanh);
        activations.push(z);
    }
    let last = &params.layers[n_layers - 1];
    let mut out = activations[n_layers - 1].dot(&weights[n_layers - 1].t());
    out += &last.bias;
    let out = out.index_axis_move(Axis(1), 0);
    Ok((
        out,
        ForwardCache {
            activations,
            layer_count: n_layers,
        },
    ))
}

pub fn forward_batch(
    params: &NetParams,
    inputs: ArrayView2<f64>,
) -> Result<(Array1<f64>, ForwardCache)> {
    forward_batch_with(params, &params.effective_weights(), inputs)
}

/// Reverse pass for a batch: gradients of `Σ_i dl_dg[i] · G(x_i)` with respect to the stored
/// weights and biases (summed over rows) and with respect to each input row.
pub fn backward_batch_with(
    params: &NetParams,
    weights: &[Array2<f64>],
    cache: &ForwardCache,
    dl_dg: &[f64],
) -> Result<NetGradients> {
    let n_layers = params.layers.len();
    if cache.layer_count != n_layers || cache.batch_len() != dl_dg.len() {
        return Err(Error::Shape(
            "forward cache does not match parameters or upstream gradient".into(),
        ));
    }
    for k in 0..n_layers {
        if cache.activations[k].ncols() != params.layers[k].raw.ncols() {
            return Err(Error::Shape(format!(
                "cached activation width mismatch at layer {k}"
            )));
        }
    }
    let n = dl_dg.len();
    let mut delta = Array2::from_shape_vec((n, 1), dl_dg.to_vec()).expect("column vector");
    let mut grads: Vec<Layer> = Vec::with_capacity(n_layers);
    let mut input_grad = Array2::zeros((0, 0));
    for k in (0..n_layers).rev() {
        let prev = &cache.activations[k];
        let mut g_w = delta.t().dot(prev);
        if params.mode == WeightMode::Positive {
            g_w *= &weights[k];
        }
        let g_b = delta.sum_axis(Axis(0));
        grads.push(Layer {
            raw: g_w,
            bias: g_b,
        });
        let d_prev = delta.dot(&weights[k]);
        if k == 0 {
            input_grad = d_prev;
        } else {
            delta = d_prev;
            ndarray::Zip::from(&mut delta)
                .and(prev)
                .for_each(|d, &a| *d *= 1.0 - a * a);
        }
    }
    grads.reverse();
    Ok(NetGradients {
        layers: grads,
        input: input_grad,
    })
}

pub fn backward_batch(
    params: &NetParams,
    cache: &ForwardCache,
    dl_dg: &[f64],
) -> Result<NetGradients> {
    backward_batch_with(params, &params.effective_weights(), cache, dl_dg)
}

/// Evaluates a scalar-input network at `u`.
pub fn forward(params: &NetParams, u: f64) -> Result<(f64, ForwardCache)> {
    params.check_shapes()?;
    if !u.is_finite() {
        return Err(Error::Numeric(format!("network input {u} is not finite")));
    }
    let input = Array2::from_elem((1, 1), u);
    let (out, cache) = forward_batch(params, input.view())?;
    Ok((out[0], cache))
}

/// Gradients of `dl_dg · G(u)` for the single input cached by [`forward`].
pub fn backward(params: &NetParams, cache: &ForwardCache, dl_dg: f64) -> Result<NetGradients> {
    backward_batch(params, cache, &[dl_dg])
}

/// Evaluates a scalar-input network on every element of `us`.
pub fn predict_batch(params: &NetParams, us: &[f64]) -> Result<Vec<f64>> {
    if us.is_empty() {
        return Ok(Vec::new());
    }
    let input = Array2::from_shape_vec((us.len(), 1), us.to_vec()).expect("column vector");
    Ok(forward_batch(params, input.view())?.0.to_vec())
}

#[derive(Serialize, Deserialize)]
struct LayerDoc {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NetDoc {
    schema: String,
    mode: WeightMode,
    layers: Vec<LayerDoc>,
}

impl From<NetParams> for NetDoc {
    fn from(p: NetParams) -> Self {
        NetDoc {
            schema: NET_SCHEMA.to_string(),
            mode: p.mode,
            layers: p
                .layers
                .into_iter()
                .map(|l| LayerDoc {
                    rows: l.raw.nrows(),
                    cols: l.raw.ncols(),
                    weights: l.raw.iter().copied().collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<NetDoc> for NetParams {
    type Error = Error;

    fn try_from(doc: NetDoc) -> Result<Self> {
        if doc.schema != NET_SCHEMA {
            return Err(Error::Input(format!(
                "unsupported network schema {:?}",
                doc.schema
            )));
        }
        let layers = doc
            .layers
            .into_iter()
            .map(|l| {
                let raw = Array2::from_shape_vec((l.rows, l.cols), l.weights)
                    .map_err(|e| Error::Shape(e.to_string()))?;
                Ok(Layer {
                    raw,
                    bias: Array1::from(l.bias),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let p = NetParams {
            mode: doc.mode,
            layers,
        };
        p.check_shapes()?;
        Ok(p)
    }
}
