//! Error-distribution families: the two-piece scale Student-t (ST), the two-piece scale
//! normal (SN) and the asymmetric Laplace distribution (ALD).
//!
//! Both two-piece families share the mode `θ`. Below the mode the density is a half
//! Student-t (or half normal) with scale `σ√(w/(1−w))` carrying mass `w`; at and above
//! the mode it uses scale `σ√((1−w)/w)` and carries mass `1−w`. Substituting the branch
//! scale shows that both branches reduce to
//!
//! ```text
//! f(x) = 2√(w(1−w))/σ · f₀((x−θ)/s)
//! ```
//!
//! with `f₀` the standard Student-t (or normal) density and `s` the branch scale.

use crate::error::{Error, Result};
use crate::numerics::special::{normal_logpdf, student_t_log_norm};
use crate::numerics::{sample_exp1, sample_normal, sample_student_t, RngStream};
use serde::{Deserialize, Serialize};

fn check_weight(w: f64) -> Result<()> {
    if w > 0.0 && w < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "skewness weight w must lie in (0, 1), got {w}"
        )))
    }
}

fn check_scale(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "scale must be positive and finite, got {sigma}"
        )))
    }
}

fn check_location(theta: f64) -> Result<()> {
    if theta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "location must be finite, got {theta}"
        )))
    }
}

/// Parameters of the two-piece scale Student-t distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StParams {
    pub w: f64,
    pub theta: f64,
    pub sigma: f64,
    pub delta: f64,
}

impl StParams {
    pub fn new(w: f64, theta: f64, sigma: f64, delta: f64) -> Result<Self> {
        let p = Self {
            w,
            theta,
            sigma,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_weight(self.w)?;
        check_location(self.theta)?;
        check_scale(self.sigma)?;
        if !(self.delta > 2.0) || self.delta.is_nan() {
            return Err(Error::domain(format!(
                "degrees of freedom must exceed 2, got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// Scales of the branch below and at-or-above the mode.
    pub fn branch_scales(&self) -> (f64, f64) {
        two_piece_scales(self.w, self.sigma)
    }
}

/// Parameters of the two-piece scale normal distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnParams {
    pub w: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl SnParams {
    pub fn new(w: f64, theta: f64, sigma: f64) -> Result<Self> {
        let p = Self { w, theta, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_weight(self.w)?;
        check_location(self.theta)?;
        check_scale(self.sigma)
    }
}

/// Parameters of the asymmetric Laplace distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AldParams {
    pub mu: f64,
    pub sigma: f64,
    pub p: f64,
}

impl AldParams {
    pub fn new(mu: f64, sigma: f64, p: f64) -> Result<Self> {
        let a = Self { mu, sigma, p };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        check_location(self.mu)?;
        check_scale(self.sigma)?;
        if self.p > 0.0 && self.p < 1.0 {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "ALD skewness p must lie in (0, 1), got {}",
                self.p
            )))
        }
    }
}

#[inline]
pub(crate) fn two_piece_scales(w: f64, sigma: f64) -> (f64, f64) {
    let ratio = (w / (1.0 - w)).sqrt();
    (sigma * ratio, sigma / ratio)
}

/// `ln(2√(w(1−w))/σ)`, the shared log prefactor of both two-piece families.
#[inline]
pub(crate) fn two_piece_log_prefactor(w: f64, sigma: f64) -> f64 {
    std::f64::consts::LN_2 + 0.5 * (w.ln() + (1.0 - w).ln()) - sigma.ln()
}

/// Log-density of `ST(w, θ, σ, δ)` at `x`. The point `x = θ` belongs to the upper branch.
pub fn st_logpdf(x: f64, params: &StParams) -> Result<f64> {
    params.validate()?;
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "density argument must be finite, got {x}"
        )));
    }
    let (s_lo, s_hi) = params.branch_scales();
    let r = x - params.theta;
    let z = if r < 0.0 { r / s_lo } else { r / s_hi };
    let delta = params.delta;
    Ok(
        two_piece_log_prefactor(params.w, params.sigma) + student_t_log_norm(delta)
            - 0.5 * (delta + 1.0) * (z * z / delta).ln_1p(),
    )
}

/// Draws `n` i.i.d. values from `ST(w, θ, σ, δ)` as a mixture of the two half-t branches.
pub fn st_sample(rng: &mut RngStream, params: &StParams, n: usize) -> Result<Vec<f64>> {
    params.validate()?;
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    let (s_lo, s_hi) = params.branch_scales();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(st_draw(
            rng,
            params.w,
            params.theta,
            s_lo,
            s_hi,
            params.delta,
        ));
    }
    Ok(out)
}

#[inline]
pub(crate) fn st_draw(
    rng: &mut RngStream,
    w: f64,
    theta: f64,
    s_lo: f64,
    s_hi: f64,
    delta: f64,
) -> f64 {
    let lower = rng.next_f64() < w;
    let t = sample_student_t(rng, delta)
        .expect("degrees of freedom validated")
        .abs();
    if lower {
        theta - s_lo * t
    } else {
        theta + s_hi * t
    }
}

/// The mode of the ST distribution, which is its location `θ`.
pub fn st_mode(params: &StParams) -> f64 {
    params.theta
}

/// Log-density of `SN(w, θ, σ)` at `x`.
pub fn sn_logpdf(x: f64, params: &SnParams) -> Result<f64> {
    params.validate()?;
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "density argument must be finite, got {x}"
        )));
    }
    let (s_lo, s_hi) = two_piece_scales(params.w, params.sigma);
    let r = x - params.theta;
    let z = if r < 0.0 { r / s_lo } else { r / s_hi };
    Ok(two_piece_log_prefactor(params.w, params.sigma) + normal_logpdf(z))
}

/// Draws `n` i.i.d. values from `SN(w, θ, σ)` using half-normal magnitudes.
pub fn sn_sample(rng: &mut RngStream, params: &SnParams, n: usize) -> Result<Vec<f64>> {
    params.validate()?;
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    let (s_lo, s_hi) = two_piece_scales(params.w, params.sigma);
    Ok((0..n)
        .map(|_| sn_draw(rng, params.w, params.theta, s_lo, s_hi))
        .collect())
}

#[inline]
pub(crate) fn sn_draw(rng: &mut RngStream, w: f64, theta: f64, s_lo: f64, s_hi: f64) -> f64 {
    let lower = rng.next_f64() < w;
    let z = sample_normal(rng).abs();
    if lower {
        theta - s_lo * z
    } else {
        theta + s_hi * z
    }
}

/// Check function `ρ_p(u) = u (p − I(u < 0))`.
#[inline]
pub fn check_function(u: f64, p: f64) -> f64 {
    if u < 0.0 {
        u * (p - 1.0)
    } else {
        u * p
    }
}

/// Log-density of `ALD(μ, σ, p)`: `ln(p(1−p)/σ) − ρ_p((x−μ)/σ)`.
pub fn ald_logpdf(x: f64, params: &AldParams) -> Result<f64> {
    params.validate()?;
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "density argument must be finite, got {x}"
        )));
    }
    let p = params.p;
    Ok((p * (1.0 - p) / params.sigma).ln() - check_function((x - params.mu) / params.sigma, p))
}

/// Draws `n` values from `ALD(μ, σ, p)`: below `μ` with probability `p` at exponential rate
/// `(1−p)/σ`, otherwise above `μ` at rate `p/σ`.
pub fn ald_sample(rng: &mut RngStream, params: &AldParams, n: usize) -> Result<Vec<f64>> {
    params.validate()?;
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    Ok((0..n).map(|_| ald_draw(rng, params)).collect())
}

#[inline]
pub(crate) fn ald_draw(rng: &mut RngStream, params: &AldParams) -> f64 {
    let p = params.p;
    let lower = rng.next_f64() < p;
    let e = sample_exp1(rng);
    if lower {
        params.mu - e * params.sigma / (1.0 - p)
    } else {
        params.mu + e * params.sigma / p
    }
}
