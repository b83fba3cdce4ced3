//! Unconstrained parameterization of a model and its natural-scale estimates.
//!
//! `β = v/‖v‖`, `w = 1/(1+e^{−a})`, `σ = e^b` and `δ = 2 + e^c`.

use super::spec::{ErrorFamily, ModelSpec};
use crate::bernstein::BernsteinParams;
use crate::error::{Error, Result};
use crate::monotone_net::NetParams;
use serde::{Deserialize, Serialize};

/// Smallest admissible `‖v‖`.
pub const MIN_DIRECTION_NORM: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum LinkParams {
    Net(NetParams),
    Bernstein(BernsteinParams),
}

impl LinkParams {
    pub fn len(&self) -> usize {
        match self {
            LinkParams::Net(p) => p.param_count(),
            LinkParams::Bernstein(b) => 1 + b.eta.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        match self {
            LinkParams::Net(p) => {
                for l in &p.layers {
                    out.extend(l.raw.iter());
                    out.extend(l.bias.iter());
                }
            }
            LinkParams::Bernstein(b) => {
                out.push(b.gamma0);
                out.extend(&b.eta);
            }
        }
    }

    fn read_flat(&mut self, src: &[f64]) {
        match self {
            LinkParams::Net(p) => {
                let mut k = 0;
                for l in &mut p.layers {
                    for v in l.raw.iter_mut() {
                        *v = src[k];
                        k += 1;
                    }
                    for v in l.bias.iter_mut() {
                        *v = src[k];
                        k += 1;
                    }
                }
            }
            LinkParams::Bernstein(b) => {
                b.gamma0 = src[0];
                b.eta.copy_from_slice(&src[1..]);
            }
        }
    }
}

/// All optimized quantities in unconstrained form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    /// Direction vector; empty for links without an index.
    pub v: Vec<f64>,
    pub link: LinkParams,
    /// Logit of `w`.
    pub a: f64,
    /// `ln σ`.
    pub b: f64,
    /// `ln(δ − 2)`.
    pub c: f64,
}

impl ParamVector {
    /// Unit-norm index coefficients, or `None` when the link has no index.
    pub fn beta(&self) -> Option<Vec<f64>> {
        if self.v.is_empty() {
            return None;
        }
        let norm = self
            .v
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
            .max(MIN_DIRECTION_NORM);
        Some(self.v.iter().map(|x| x / norm).collect())
    }

    pub fn v_norm(&self) -> f64 {
        self.v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn w(&self, family: ErrorFamily) -> f64 {
        if family.estimates_weight() {
            1.0 / (1.0 + (-self.a).exp())
        } else {
            0.5
        }
    }

    pub fn sigma(&self) -> f64 {
        self.b.exp()
    }

    pub fn delta(&self, family: ErrorFamily) -> Option<f64> {
        family.estimates_delta().then(|| 2.0 + self.c.exp())
    }

    pub fn flat_len(&self) -> usize {
        self.v.len() + self.link.len() + 3
    }

    /// Layout: `v`, link parameters, then `a, b, c`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flat_len());
        out.extend(&self.v);
        self.link.write_flat(&mut out);
        out.extend([self.a, self.b, self.c]);
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.flat_len() {
            return Err(Error::Shape(format!(
                "flat vector has {} entries, expected {}",
                flat.len(),
                self.flat_len()
            )));
        }
        let p = self.v.len();
        let l = self.link.len();
        self.v.copy_from_slice(&flat[..p]);
        self.link.read_flat(&flat[p..p + l]);
        self.a = flat[p + l];
        self.b = flat[p + l + 1];
        self.c = flat[p + l + 2];
        Ok(())
    }

    /// Offset of the link parameters in the flat layout.
    pub fn link_offset(&self) -> usize {
        self.v.len()
    }

    /// Natural-scale estimates under `spec`.
    pub fn estimates(&self, spec: &ModelSpec) -> Estimates {
        Estimates {
            beta: self.beta(),
            w: self.w(spec.family),
            sigma: self.sigma(),
            delta: self.delta(spec.family),
        }
    }
}

/// Natural-scale parameter estimates. `delta` is `None` for normal-tailed families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub beta: Option<Vec<f64>>,
    pub w: f64,
    pub sigma: f64,
    pub delta: Option<f64>,
}
