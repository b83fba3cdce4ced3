//! Monotone Bernstein-polynomial link.
//!
//! `g(u) = Σ_j γ_j B_{j,J}(t)` with `t` the index mapped affinely onto `[0, 1]` and clamped.
//! Coefficients are `γ_j = γ_0 + Σ_{l≤j} exp(η_l)`, strictly increasing, which makes `g`
//! nondecreasing in `u`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const BERNSTEIN_SCHEMA: &str = "monosim.bernstein.v1";
pub const DEFAULT_DEGREE: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernsteinParams {
    pub schema: String,
    pub gamma0: f64,
    /// Log increments `η_1..η_J`; the degree is `eta.len()`.
    pub eta: Vec<f64>,
    pub u_lo: f64,
    pub u_hi: f64,
}

/// Gradients of `dl_dg · g(u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BernsteinGradients {
    pub gamma0: f64,
    pub eta: Vec<f64>,
    pub u: f64,
}

impl BernsteinParams {
    pub fn new(gamma0: f64, eta: Vec<f64>, u_lo: f64, u_hi: f64) -> Result<Self> {
        let p = Self {
            schema: BERNSTEIN_SCHEMA.to_string(),
            gamma0,
            eta,
            u_lo,
            u_hi,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != BERNSTEIN_SCHEMA {
            return Err(Error::Input(format!(
                "unsupported Bernstein schema {:?}",
                self.schema
            )));
        }
        if self.eta.is_empty() {
            return Err(Error::domain("Bernstein degree must be at least 1"));
        }
        if !(self.u_lo < self.u_hi) || !self.u_lo.is_finite() || !self.u_hi.is_finite() {
            return Err(Error::domain(format!(
                "index range must satisfy lo < hi, got [{}, {}]",
                self.u_lo, self.u_hi
            )));
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.eta.len()
    }

    /// The increasing coefficient sequence `γ_0..γ_J`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.eta.len() + 1);
        let mut acc = self.gamma0;
        out.push(acc);
        for e in &self.eta {
            acc += e.exp();
            out.push(acc);
        }
        out
    }

    fn to_unit(&self, u: f64) -> (f64, bool) {
        let t = (u - self.u_lo) / (self.u_hi - self.u_lo);
        if t < 0.0 {
            (0.0, true)
        } else if t > 1.0 {
            (1.0, true)
        } else {
            (t, false)
        }
    }
}

fn binomials(degree: usize) -> Vec<f64> {
    let mut c = vec![1.0f64; degree + 1];
    for j in 1..=degree {
        c[j] = c[j - 1] * (degree + 1 - j) as f64 / j as f64;
    }
    c
}

fn basis_unchecked(t: f64, degree: usize, out: &mut Vec<f64>) {
    out.clear();
    let c = binomials(degree);
    let s = 1.0 - t;
    for (j, cj) in c.iter().enumerate() {
        out.push(cj * t.powi(j as i32) * s.powi((degree - j) as i32));
    }
}

/// The `J+1` Bernstein basis polynomials of degree `J` evaluated at `t ∈ [0, 1]`.
pub fn bernstein_basis(t: f64, degree: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!(
            "Bernstein argument must lie in [0, 1], got {t}"
        )));
    }
    let mut out = Vec::with_capacity(degree + 1);
    basis_unchecked(t, degree, &mut out);
    Ok(out)
}

pub fn bern_forward(params: &BernsteinParams, u: f64) -> f64 {
    let (t, _) = params.to_unit(u);
    let mut basis = Vec::new();
    basis_unchecked(t, params.degree(), &mut basis);
    params
        .coefficients()
        .iter()
        .zip(&basis)
        .map(|(g, b)| g * b)
        .sum()
}

pub fn bern_predict_batch(params: &BernsteinParams, us: &[f64]) -> Vec<f64> {
    let coef = params.coefficients();
    let mut basis = Vec::new();
    us.iter()
        .map(|&u| {
            let (t, _) = params.to_unit(u);
            basis_unchecked(t, params.degree(), &mut basis);
            coef.iter().zip(&basis).map(|(g, b)| g * b).sum()
        })
        .collect()
}

/// Value and gradients of `dl_dg · g(u)`. The input gradient vanishes where `u` is clamped.
pub fn bern_backward(params: &BernsteinParams, u: f64, dl_dg: f64) -> BernsteinGradients {
    let degree = params.degree();
    let (t, clamped) = params.to_unit(u);
    let mut basis = Vec::new();
    basis_unchecked(t, degree, &mut basis);

    // ∂g/∂η_l = exp(η_l) Σ_{j≥l} B_j
    let mut eta = vec![0.0; degree];
    let mut tail = 0.0;
    for l in (1..=degree).rev() {
        tail += basis[l];
        eta[l - 1] = dl_dg * params.eta[l - 1].exp() * tail;
    }
    let du = if clamped || dl_dg == 0.0 {
        0.0
    } else {
        // dg/dt = J Σ_{j<J} (γ_{j+1} − γ_j) B_{j,J−1}(t)
        let mut lower = Vec::new();
        basis_unchecked(t, degree - 1, &mut lower);
        let slope: f64 = lower
            .iter()
            .zip(&params.eta)
            .map(|(b, e)| b * e.exp())
            .sum();
        dl_dg * degree as f64 * slope / (params.u_hi - params.u_lo)
    };
    BernsteinGradients {
        gamma0: dl_dg * basis.iter().sum::<f64>(),
        eta,
        u: du,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(degree: usize) -> BernsteinParams {
        let eta = (0..degree)
            .map(|l| -1.0 + 0.3 * ((l * 7) % 5) as f64)
            .collect();
        BernsteinParams::new(-0.4, eta, -2.0, 3.0).unwrap()
    }

    #[test]
    fn endpoints_and_partition_of_unity() {
        assert_eq!(
            bernstein_basis(0.0, 4).unwrap(),
            vec![1.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            bernstein_basis(1.0, 4).unwrap(),
            vec![0.0, 0.0, 0.0, 0.0, 1.0]
        );
        for &j in &[1usize, 10, 50] {
            for i in 0..=100 {
                let s: f64 = bernstein_basis(i as f64 / 100.0, j).unwrap().iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "J={j}");
            }
        }
        assert!(bernstein_basis(1.5, 3).is_err());
        assert!(bernstein_basis(-0.1, 3).is_err());
    }

    #[test]
    fn clamped_ends_return_extreme_coefficients() {
        let p = params(10);
        let c = p.coefficients();
        assert_eq!(bern_forward(&p, -5.0), c[0]);
        assert_eq!(bern_forward(&p, -2.0), c[0]);
        assert_abs_diff_eq!(bern_forward(&p, 3.0), c[10], epsilon = 1e-12);
        assert_abs_diff_eq!(bern_forward(&p, 30.0), c[10], epsilon = 1e-12);
    }

    #[test]
    fn linear_case() {
        let p = BernsteinParams::new(0.0, vec![0.0], 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(bern_forward(&p, 0.5), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = params(10);
        let h = 1e-6;
        for &u in &[-1.7, 0.0, 0.4, 2.9] {
            let g = bern_backward(&p, u, 1.0);
            let mut q = p.clone();
            q.gamma0 += h;
            let up = bern_forward(&q, u);
            q.gamma0 -= 2.0 * h;
            let fd = (up - bern_forward(&q, u)) / (2.0 * h);
            assert!((fd - g.gamma0).abs() <= 1e-6 * fd.abs().max(1.0));
            for l in 0..10 {
                let mut q = p.clone();
                q.eta[l] += h;
                let up = bern_forward(&q, u);
                q.eta[l] -= 2.0 * h;
                let fd = (up - bern_forward(&q, u)) / (2.0 * h);
                assert!(
                    (fd - g.eta[l]).abs() <= 1e-6 * fd.abs().max(1e-3),
                    "l={l} fd={fd} an={}",
                    g.eta[l]
                );
            }
            let fd = (bern_forward(&p, u + h) - bern_forward(&p, u - h)) / (2.0 * h);
            assert!((fd - g.u).abs() <= 1e-6 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn zero_upstream_and_clamped_input() {
        let p = params(5);
        let g = bern_backward(&p, 0.2, 0.0);
        assert_eq!(g.gamma0, 0.0);
        assert!(g.eta.iter().all(|&v| v == 0.0));
        assert_eq!(g.u, 0.0);
        assert_eq!(bern_backward(&p, 10.0, 1.0).u, 0.0);
        assert_eq!(bern_backward(&p, -10.0, 1.0).u, 0.0);
    }

    #[test]
    fn monotone_on_grid() {
        let p = params(50);
        let us: Vec<f64> = (0..=1000).map(|i| -3.0 + 7.0 * i as f64 / 1000.0).collect();
        let g = bern_predict_batch(&p, &us);
        assert!(g.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    }

    #[test]
    fn invalid_range() {
        assert!(BernsteinParams::new(0.0, vec![0.0], 1.0, 1.0).is_err());
        assert!(BernsteinParams::new(0.0, vec![], 0.0, 1.0).is_err());
    }
}
