//! Synthetic data schemes with known truth.

use crate::distributions::{ald_draw, st_draw, two_piece_scales, AldParams};
use crate::error::{Error, Result};
use crate::estimation::{index_values, Dataset, FitResult};
use crate::numerics::{normal_cdf, sample_normal, sample_uniform, RngStream};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Skewed Student-t noise shared by schemes 1, 2 and 4.
pub const ST_NOISE: (f64, f64, f64) = (0.6, 1.5, 6.0);
/// Probability that a scheme-3 row is drawn from the outlier component.
pub const OUTLIER_RATE: f64 = 0.01;
pub const OUTLIER_MEAN: f64 = 7.0;
pub const OUTLIER_SD: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// `g(u) = 10 Φ(2.5u)` with skewed Student-t noise.
    #[serde(rename = "1")]
    Smooth,
    /// `g(u) = ⌊u⌋` with skewed Student-t noise.
    #[serde(rename = "2")]
    Step,
    /// `g(u) = ⌊u⌋` with asymmetric Laplace noise and 1% outliers.
    #[serde(rename = "3")]
    Contaminated,
    /// Additive `f(x) = x1 + x2 + x3` with skewed Student-t noise.
    #[serde(rename = "4")]
    Additive,
}

impl Scheme {
    pub fn from_id(id: u32) -> Result<Self> {
        match id {
            1 => Ok(Scheme::Smooth),
            2 => Ok(Scheme::Step),
            3 => Ok(Scheme::Contaminated),
            4 => Ok(Scheme::Additive),
            _ => Err(Error::Input(format!(
                "scheme must be 1, 2, 3 or 4, got {id}"
            ))),
        }
    }

    pub fn id(self) -> u32 {
        match self {
            Scheme::Smooth => 1,
            Scheme::Step => 2,
            Scheme::Contaminated => 3,
            Scheme::Additive => 4,
        }
    }

    /// Whether the truth is a scalar link of the index.
    pub fn has_link(self) -> bool {
        !matches!(self, Scheme::Additive)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub n: usize,
    pub seed: u64,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n must be at least 1"));
        }
        Ok(Self { scheme, n, seed })
    }

    /// The true index coefficients `(1, 1, 1)/√3`.
    pub fn true_beta() -> [f64; 3] {
        [1.0 / 3f64.sqrt(); 3]
    }
}

/// Covariates: `x1 ~ Bernoulli(0.5)`, `x2 | x1` uniform on `(−3, 0)` or `(0, 3)`, `x3 ~ U(−3.5, 2.5)`.
pub fn gen_covariates(n: usize, rng: &mut RngStream) -> Array2<f64> {
    let mut x = Array2::zeros((n, 3));
    for mut row in x.rows_mut() {
        let x1 = if rng.next_f64() < 0.5 { 1.0 } else { 0.0 };
        let x2 = if x1 == 0.0 {
            sample_uniform(rng, -3.0, 0.0).expect("valid bounds")
        } else {
            sample_uniform(rng, 0.0, 3.0).expect("valid bounds")
        };
        row[0] = x1;
        row[1] = x2;
        row[2] = sample_uniform(rng, -3.5, 2.5).expect("valid bounds");
    }
    x
}

/// The true link of a scheme.
pub fn true_g(scheme: Scheme, u: f64) -> Result<f64> {
    match scheme {
        Scheme::Smooth => Ok(10.0 * normal_cdf(2.5 * u)),
        Scheme::Step | Scheme::Contaminated => Ok(u.floor()),
        Scheme::Additive => Err(Error::Unsupported(
            "scheme 4 has no scalar link; its truth is x1 + x2 + x3".into(),
        )),
    }
}

/// Ground truth behind a simulated dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub scheme: Scheme,
    /// True indexes `β⊤x_i`.
    pub u: Vec<f64>,
    /// Noise-free response: `g(u_i)` or, for scheme 4, `f(x_i)`.
    pub signal: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Simulated {
    pub data: Dataset,
    pub truth: Truth,
}

/// Draws one scheme dataset.
pub fn gen_dataset(cfg: &SchemeConfig, rng: &mut RngStream) -> Result<Simulated> {
    let x = gen_covariates(cfg.n, rng);
    let beta = SchemeConfig::true_beta();
    let u = index_values(&beta, x.view())?;
    let signal: Vec<f64> = match cfg.scheme {
        Scheme::Additive => x.rows().into_iter().map(|r| r.sum()).collect(),
        s => u.iter().map(|&ui| true_g(s, ui)).collect::<Result<_>>()?,
    };
    let (w, sigma, delta) = ST_NOISE;
    let (s_lo, s_hi) = two_piece_scales(w, sigma);
    let ald = AldParams::new(0.0, 0.5, 0.6)?;
    let y = signal
        .iter()
        .map(|&m| match cfg.scheme {
            Scheme::Contaminated => {
                if rng.next_f64() < OUTLIER_RATE {
                    m + OUTLIER_MEAN + OUTLIER_SD * sample_normal(rng)
                } else {
                    m + ald_draw(rng, &ald)
                }
            }
            _ => st_draw(rng, w, m, s_lo, s_hi, delta),
        })
        .collect();
    let data = Dataset::new(y, x, vec!["x1".into(), "x2".into(), "x3".into()])?;
    Ok(Simulated {
        data,
        truth: Truth {
            scheme: cfg.scheme,
            u,
            signal,
        },
    })
}

/// `(1/n) Σ (ĝ(β̂⊤x_i) − g(β⊤x_i))²` over the dataset's rows.
pub fn mse_g(fit: &FitResult, data: &Dataset, truth: &Truth) -> Result<f64> {
    if !fit.spec.link.has_index() {
        return Err(Error::Unsupported(
            "g-MSE needs an index model; this fit has no scalar link".into(),
        ));
    }
    if truth.signal.len() != data.n() {
        return Err(Error::Shape(format!(
            "truth has {} rows, data {}",
            truth.signal.len(),
            data.n()
        )));
    }
    let pred = fit.predict(data.x.view())?;
    Ok(pred
        .iter()
        .zip(&truth.signal)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / data.n() as f64)
}
