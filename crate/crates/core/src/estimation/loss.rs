//! Negative log-likelihood of the modal regression model and its analytic gradient.

use super::dataset::Dataset;
use super::params::{LinkParams, ParamVector};
use super::spec::{ErrorFamily, LinkKind, ModelSpec};
use crate::bernstein::{bern_backward, bern_predict_batch};
use crate::distributions::{two_piece_log_prefactor, two_piece_scales};
use crate::error::{Error, Result};
use crate::monotone_net::{backward_batch_with, forward_batch_with};
use crate::numerics::digamma;
use crate::numerics::special::student_t_log_norm;
use ndarray::{Array2, ArrayView2, Axis};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Per-row derivatives of `−log f(y | θ, w, σ, δ)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RowGrad {
    pub nll: f64,
    pub d_theta: f64,
    pub d_w: f64,
    pub d_sigma: f64,
    pub d_delta: f64,
}

/// An error law with its parameter-only terms precomputed.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ErrorLaw {
    heavy: bool,
    w: f64,
    sigma: f64,
    delta: f64,
    s_lo: f64,
    s_hi: f64,
    base: f64,
    d_lognorm: f64,
}

impl ErrorLaw {
    pub(crate) fn new(family: ErrorFamily, w: f64, sigma: f64, delta: Option<f64>) -> Self {
        let (s_lo, s_hi) = two_piece_scales(w, sigma);
        let prefactor = two_piece_log_prefactor(w, sigma);
        match (family.estimates_delta(), delta) {
            (true, Some(delta)) => Self {
                heavy: true,
                w,
                sigma,
                delta,
                s_lo,
                s_hi,
                base: -prefactor - student_t_log_norm(delta),
                d_lognorm: 0.5 * digamma(0.5 * (delta + 1.0))
                    - 0.5 * digamma(0.5 * delta)
                    - 0.5 / delta,
            },
            _ => Self {
                heavy: false,
                w,
                sigma,
                delta: f64::INFINITY,
                s_lo,
                s_hi,
                base: -prefactor + HALF_LN_2PI,
                d_lognorm: 0.0,
            },
        }
    }

    pub(crate) fn from_params(spec: &ModelSpec, params: &ParamVector) -> Self {
        Self::new(
            spec.family,
            params.w(spec.family),
            params.sigma(),
            params.delta(spec.family),
        )
    }

    /// `−log f(θ + r)`.
    #[inline]
    pub(crate) fn nll(&self, r: f64) -> f64 {
        let z = if r < 0.0 {
            r / self.s_lo
        } else {
            r / self.s_hi
        };
        if self.heavy {
            self.base + 0.5 * (self.delta + 1.0) * (z * z / self.delta).ln_1p()
        } else {
            self.base + 0.5 * z * z
        }
    }

    /// Value and derivatives at residual `r = y − θ`.
    #[inline]
    pub(crate) fn grad(&self, r: f64) -> RowGrad {
        let lower = r < 0.0;
        let s = if lower { self.s_lo } else { self.s_hi };
        let z = r / s;
        let (psi, dpsi_dz, d_delta) = if self.heavy {
            let d = self.delta;
            let l1p = (z * z / d).ln_1p();
            let dpsi = (d + 1.0) * z / (d + z * z);
            let dd = -self.d_lognorm + 0.5 * l1p - (d + 1.0) * z * z / (2.0 * d * (d + z * z));
            (0.5 * (d + 1.0) * l1p, dpsi, dd)
        } else {
            (0.5 * z * z, z, 0.0)
        };
        let w = self.w;
        let wq = 2.0 * w * (1.0 - w);
        let dz_dw = if lower { -z / wq } else { z / wq };
        RowGrad {
            nll: self.base + psi,
            d_theta: -dpsi_dz / s,
            d_w: -0.5 / w + 0.5 / (1.0 - w) + dpsi_dz * dz_dw,
            d_sigma: (1.0 - dpsi_dz * z) / self.sigma,
            d_delta,
        }
    }
}

/// Index values `β⊤x_i` for every row of `x`.
pub fn index_values(beta: &[f64], x: ArrayView2<f64>) -> Result<Vec<f64>> {
    if beta.len() != x.ncols() {
        return Err(Error::Shape(format!(
            "β has {} entries, covariates {}",
            beta.len(),
            x.ncols()
        )));
    }
    Ok(x.rows()
        .into_iter()
        .map(|r| r.iter().zip(beta).map(|(a, b)| a * b).sum())
        .collect())
}

fn check_consistent(spec: &ModelSpec, params: &ParamVector, p: usize) -> Result<()> {
    match (spec.link, &params.link) {
        (LinkKind::GxD, LinkParams::Net(n)) if n.input_dim() == 1 => {}
        (LinkKind::Fx, LinkParams::Net(n)) if n.input_dim() == p => {}
        (LinkKind::GxB, LinkParams::Bernstein(_)) => {}
        _ => {
            return Err(Error::Shape(format!(
                "link parameters do not match {} with {p} covariates",
                spec.name()
            )))
        }
    }
    let expected_v = if spec.link.has_index() { p } else { 0 };
    if params.v.len() != expected_v {
        return Err(Error::Shape(format!(
            "direction has {} entries, expected {expected_v}",
            params.v.len()
        )));
    }
    if spec.link.has_index() && params.v_norm() < super::params::MIN_DIRECTION_NORM {
        return Err(Error::Numeric("direction vector collapsed to zero".into()));
    }
    Ok(())
}

/// Predicted modes `θ_i` for each row of `x`.
pub fn predict_modes(
    spec: &ModelSpec,
    params: &ParamVector,
    x: ArrayView2<f64>,
) -> Result<Vec<f64>> {
    check_consistent(spec, params, x.ncols())?;
    if x.nrows() == 0 {
        return Ok(Vec::new());
    }
    match &params.link {
        LinkParams::Net(net) => {
            let weights = net.effective_weights();
            let out = if spec.link == LinkKind::Fx {
                forward_batch_with(net, &weights, x)?.0
            } else {
                let u = index_values(&params.beta().expect("index link"), x)?;
                let input = Array2::from_shape_vec((u.len(), 1), u).expect("column");
                forward_batch_with(net, &weights, input.view())?.0
            };
            Ok(out.to_vec())
        }
        LinkParams::Bernstein(b) => {
            let u = index_values(&params.beta().expect("index link"), x)?;
            Ok(bern_predict_batch(b, &u))
        }
    }
}

/// Per-row negative log-likelihood contributions.
pub fn row_nll(spec: &ModelSpec, params: &ParamVector, data: &Dataset) -> Result<Vec<f64>> {
    let theta = predict_modes(spec, params, data.x.view())?;
    let law = ErrorLaw::from_params(spec, params);
    let mut out = Vec::with_capacity(theta.len());
    for (i, (y, t)) in data.y.iter().zip(&theta).enumerate() {
        let v = law.nll(y - t);
        if !v.is_finite() {
            return Err(Error::NonFiniteRow {
                row: i,
                detail: format!("y = {y}, θ = {t}"),
            });
        }
        out.push(v);
    }
    Ok(out)
}

/// `Σ_i −log f(y_i | w, θ_i, σ, δ)` over the whole dataset.
pub fn negative_log_likelihood(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &Dataset,
) -> Result<f64> {
    Ok(row_nll(spec, params, data)?.iter().sum())
}

/// Summed loss over `rows` and its gradient in the [`ParamVector::to_flat`] layout.
pub fn nll_gradient(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &Dataset,
    rows: &[usize],
) -> Result<(f64, Vec<f64>)> {
    if rows.is_empty() {
        return Err(Error::Input("gradient batch is empty".into()));
    }
    check_consistent(spec, params, data.p())?;
    let xb = data.x.select(Axis(0), rows);
    let law = ErrorLaw::from_params(spec, params);
    let beta = params.beta();
    let u = match &beta {
        Some(b) => index_values(b, xb.view())?,
        None => Vec::new(),
    };

    let mut grad = vec![0.0; params.flat_len()];
    let (theta, link_input_grad): (Vec<f64>, LinkGradFn) = match &params.link {
        LinkParams::Net(net) => {
            let weights = net.effective_weights();
            let input = if spec.link == LinkKind::Fx {
                xb.clone()
            } else {
                Array2::from_shape_vec((u.len(), 1), u.clone()).expect("column")
            };
            let (out, cache) = forward_batch_with(net, &weights, input.view())?;
            (out.to_vec(), LinkGradFn::Net { weights, cache })
        }
        LinkParams::Bernstein(b) => (bern_predict_batch(b, &u), LinkGradFn::Bernstein),
    };

    let mut total = 0.0;
    let mut d_theta = Vec::with_capacity(rows.len());
    let (mut d_w, mut d_sigma, mut d_delta) = (0.0, 0.0, 0.0);
    for (k, &i) in rows.iter().enumerate() {
        let g = law.grad(data.y[i] - theta[k]);
        if !g.nll.is_finite() || !g.d_theta.is_finite() {
            return Err(Error::NonFiniteRow {
                row: i,
                detail: format!("y = {}, θ = {}", data.y[i], theta[k]),
            });
        }
        total += g.nll;
        d_theta.push(g.d_theta);
        d_w += g.d_w;
        d_sigma += g.d_sigma;
        d_delta += g.d_delta;
    }

    let off = params.link_offset();
    let n_link = params.link.len();
    let mut d_u = vec![0.0; u.len()];
    match (link_input_grad, &params.link) {
        (LinkGradFn::Net { weights, cache }, LinkParams::Net(net)) => {
            let g = backward_batch_with(net, &weights, &cache, &d_theta)?;
            let mut k = off;
            for l in &g.layers {
                for v in l.raw.iter().chain(l.bias.iter()) {
                    grad[k] = *v;
                    k += 1;
                }
            }
            if spec.link.has_index() {
                for (du, gi) in d_u.iter_mut().zip(g.input.column(0)) {
                    *du = *gi;
                }
            }
        }
        (LinkGradFn::Bernstein, LinkParams::Bernstein(b)) => {
            for (k, (&uk, &dt)) in u.iter().zip(&d_theta).enumerate() {
                let g = bern_backward(b, uk, dt);
                grad[off] += g.gamma0;
                for (slot, e) in grad[off + 1..off + n_link].iter_mut().zip(&g.eta) {
                    *slot += e;
                }
                d_u[k] = g.u;
            }
        }
        _ => unreachable!("link kinds checked above"),
    }

    if let Some(beta) = &beta {
        // dL/dv = (I − ββ⊤) dL/dβ / ‖v‖
        let p = beta.len();
        let mut d_beta = vec![0.0; p];
        for (row, du) in xb.rows().into_iter().zip(&d_u) {
            for (db, x) in d_beta.iter_mut().zip(row) {
                *db += du * x;
            }
        }
        let radial: f64 = d_beta.iter().zip(beta).map(|(a, b)| a * b).sum();
        let norm = params.v_norm();
        for j in 0..p {
            grad[j] = (d_beta[j] - beta[j] * radial) / norm;
        }
    }

    let tail = off + n_link;
    if spec.family.estimates_weight() {
        let w = params.w(spec.family);
        grad[tail] = d_w * w * (1.0 - w);
    }
    grad[tail + 1] = d_sigma * params.sigma();
    if let Some(delta) = params.delta(spec.family) {
        grad[tail + 2] = d_delta * (delta - 2.0);
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric("gradient is not finite".into()));
    }
    Ok((total, grad))
}

enum LinkGradFn {
    Net {
        weights: Vec<Array2<f64>>,
        cache: crate::monotone_net::ForwardCache,
    },
    Bernstein,
}
