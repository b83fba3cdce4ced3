//! Residual histogram against the fitted error density.

use crate::error::{Error, Result};
use crate::estimation::loss::ErrorLaw;
use crate::estimation::{residuals, Dataset, FitResult};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Number of points on the theoretical density curve.
pub const CURVE_POINTS: usize = 201;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualDiagnostic {
    /// `bins + 1` equally spaced edges spanning the residual range.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Histogram on the density scale: `count / (n · width)`.
    pub density: Vec<f64>,
    /// Fitted error density (mode 0) at each bin centre.
    pub theoretical: Vec<f64>,
    /// Abscissae of the theoretical curve.
    pub curve_x: Vec<f64>,
    pub curve_density: Vec<f64>,
}

impl ResidualDiagnostic {
    /// Largest absolute gap between the histogram density and the fitted density at bin centres.
    pub fn sup_discrepancy(&self) -> f64 {
        self.density
            .iter()
            .zip(&self.theoretical)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `bin_left, bin_right, density, theoretical`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_left", "bin_right", "density", "theoretical"])?;
        for i in 0..self.counts.len() {
            w.write_record([
                format!("{}", self.edges[i]),
                format!("{}", self.edges[i + 1]),
                format!("{}", self.density[i]),
                format!("{}", self.theoretical[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Histogram of residuals with `bins` equal-width bins over their range (a unit-wide range
/// centred on the value when all residuals coincide), plus the fitted error density.
pub fn residual_diagnostic(
    fit: &FitResult,
    data: &Dataset,
    bins: usize,
) -> Result<ResidualDiagnostic> {
    if bins < 2 {
        return Err(Error::domain("at least 2 bins are required"));
    }
    let res = residuals(fit, data)?;
    histogram_against(&res, bins, fit)
}

fn histogram_against(res: &[f64], bins: usize, fit: &FitResult) -> Result<ResidualDiagnostic> {
    if res.is_empty() {
        return Err(Error::domain("no residuals"));
    }
    let mut lo = res.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = res.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0usize; bins];
    for &r in res {
        let k = (((r - lo) / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    let n = res.len() as f64;
    let density: Vec<f64> = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    let e = &fit.estimates;
    let law = ErrorLaw::new(fit.spec.family, e.w, e.sigma, e.delta);
    let pdf = |x: f64| (-law.nll(x)).exp();
    let theoretical = (0..bins)
        .map(|i| pdf(lo + width * (i as f64 + 0.5)))
        .collect();
    let curve_x: Vec<f64> = super::linspace(lo, hi, CURVE_POINTS);
    let curve_density = curve_x.iter().map(|&x| pdf(x)).collect();
    Ok(ResidualDiagnostic {
        edges,
        counts,
        density,
        theoretical,
        curve_x,
        curve_density,
    })
}
