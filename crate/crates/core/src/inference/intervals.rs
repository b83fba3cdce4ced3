//! Quantile intervals, pointwise link bands and the error-family selection rule.

use super::bootstrap::BootstrapResult;
use crate::error::{Error, Result};
use crate::estimation::{Estimates, LinkParams};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;

/// Sample quantile by linear interpolation between order statistics: position `(n−1)q`.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!(
            "quantile level must lie in [0, 1], got {q}"
        )));
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&s, q))
}

fn quantile_sorted(s: &[f64], q: f64) -> f64 {
    let h = (s.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(s.len() - 1);
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

fn check_level(level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    let tail = (1.0 - level) / 2.0;
    Ok((tail, 1.0 - tail))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CiRecord {
    pub parameter: String,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    /// The point estimate lies outside `[lower, upper]`.
    pub estimate_outside: bool,
}

impl CiRecord {
    pub fn new(
        parameter: impl Into<String>,
        estimate: f64,
        lower: f64,
        upper: f64,
        level: f64,
    ) -> Self {
        Self {
            parameter: parameter.into(),
            estimate,
            lower,
            upper,
            level,
            estimate_outside: estimate < lower || estimate > upper,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Scalar parameters of an estimate in reporting order: `β` components, `w`, `σ`, `δ`.
pub fn named_values(columns: &[String], e: &Estimates) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    if let Some(beta) = &e.beta {
        for (c, b) in columns.iter().zip(beta) {
            out.push((format!("beta[{c}]"), *b));
        }
    }
    out.push(("w".into(), e.w));
    out.push(("sigma".into(), e.sigma));
    if let Some(d) = e.delta {
        out.push(("delta".into(), d));
    }
    out
}

fn replicate_columns(boot: &BootstrapResult) -> Result<Vec<(String, f64, Vec<f64>)>> {
    if boot.replicates.is_empty() {
        return Err(Error::domain("bootstrap has no successful replicates"));
    }
    let point = named_values(&boot.columns, &boot.point);
    let mut cols: Vec<(String, f64, Vec<f64>)> =
        point.into_iter().map(|(n, v)| (n, v, Vec::new())).collect();
    for r in &boot.replicates {
        let vals = named_values(&boot.columns, &r.estimates);
        if vals.len() != cols.len() {
            return Err(Error::Shape(format!(
                "replicate {} reports a different parameter set",
                r.id
            )));
        }
        for (col, (_, v)) in cols.iter_mut().zip(vals) {
            col.2.push(v);
        }
    }
    Ok(cols)
}

/// Equal-tailed percentile intervals for every scalar parameter.
pub fn ci_quantiles(boot: &BootstrapResult, level: f64) -> Result<Vec<CiRecord>> {
    let (lo_q, hi_q) = check_level(level)?;
    replicate_columns(boot)?
        .into_iter()
        .map(|(name, est, vals)| {
            Ok(CiRecord::new(
                name,
                est,
                quantile(&vals, lo_q)?,
                quantile(&vals, hi_q)?,
                level,
            ))
        })
        .collect()
}

/// Bootstrap standard error (sample standard deviation across replicates) per parameter.
/// `None` when fewer than two replicates succeeded.
pub fn bootstrap_se(boot: &BootstrapResult) -> Result<Vec<(String, Option<f64>)>> {
    Ok(replicate_columns(boot)?
        .into_iter()
        .map(|(name, _, vals)| (name, sample_sd(&vals)))
        .collect())
}

/// Sample standard deviation with denominator `n − 1`; `None` below two values.
pub fn sample_sd(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    Some((values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub u: f64,
    pub lower: f64,
    /// The original fit's link value.
    pub point: f64,
    pub upper: f64,
}

fn link_values(link: &LinkParams, grid: &[f64]) -> Result<Vec<f64>> {
    match link {
        LinkParams::Net(net) => crate::monotone_net::predict_batch(net, grid),
        LinkParams::Bernstein(b) => Ok(crate::bernstein::bern_predict_batch(b, grid)),
    }
}

/// Pointwise percentile band of the replicate link curves over `u_grid`.
pub fn pointwise_band_g(
    boot: &BootstrapResult,
    u_grid: &[f64],
    level: f64,
) -> Result<Vec<BandPoint>> {
    if u_grid.is_empty() {
        return Err(Error::domain("band grid is empty"));
    }
    if !boot.spec.link.has_index() {
        return Err(Error::Unsupported(
            "pointwise bands need an index model with a scalar link".into(),
        ));
    }
    if boot.replicates.is_empty() {
        return Err(Error::domain("bootstrap has no successful replicates"));
    }
    let (lo_q, hi_q) = check_level(level)?;
    let point = link_values(&boot.point_params.link, u_grid)?;
    let curves: Vec<Vec<f64>> = boot
        .replicates
        .iter()
        .map(|r| link_values(&r.params.link, u_grid))
        .collect::<Result<_>>()?;
    let mut column = vec![0.0; curves.len()];
    let mut out = Vec::with_capacity(u_grid.len());
    for (j, &u) in u_grid.iter().enumerate() {
        for (c, curve) in column.iter_mut().zip(&curves) {
            *c = curve[j];
        }
        column.sort_by(f64::total_cmp);
        out.push(BandPoint {
            u,
            lower: quantile_sorted(&column, lo_q),
            point: point[j],
            upper: quantile_sorted(&column, hi_q),
        });
    }
    Ok(out)
}

/// Evenly spaced grid of `len` points over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, len: usize) -> Vec<f64> {
    match len {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..len)
            .map(|i| lo + (hi - lo) * i as f64 / (len - 1) as f64)
            .collect(),
    }
}

/// Error family suggested by the bootstrap intervals of `w` and `δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recommendation {
    #[serde(rename = "ST")]
    St,
    #[serde(rename = "Normal")]
    Normal,
    #[serde(rename = "SN")]
    Sn,
    #[serde(rename = "SymmetricT")]
    SymmetricT,
}

impl fmt::Display for Recommendation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Recommendation::St => "ST",
            Recommendation::Normal => "Normal",
            Recommendation::Sn => "SN",
            Recommendation::SymmetricT => "SymmetricT",
        })
    }
}

/// Skewness is indicated when `0.5 ∉ w-CI`; heavy tails when the `δ`-CI lies below 30.
pub fn model_select(w_ci: &CiRecord, delta_ci: &CiRecord) -> Result<Recommendation> {
    for ci in [w_ci, delta_ci] {
        if !(ci.lower <= ci.upper) {
            return Err(Error::Input(format!(
                "malformed interval for {}: lower {} > upper {}",
                ci.parameter, ci.lower, ci.upper
            )));
        }
    }
    let symmetric = w_ci.contains(0.5);
    let heavy = delta_ci.upper < 30.0;
    Ok(match (symmetric, heavy) {
        (false, true) => Recommendation::St,
        (false, false) => Recommendation::Sn,
        (true, true) => Recommendation::SymmetricT,
        (true, false) => Recommendation::Normal,
    })
}

/// CSV with columns `parameter, estimate, lower5, upper95` (named for the 90% default).
pub fn write_ci_csv<W: Write>(records: &[CiRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["parameter", "estimate", "lower5", "upper95"])?;
    for r in records {
        w.write_record([
            r.parameter.clone(),
            fmt_num(r.estimate),
            fmt_num(r.lower),
            fmt_num(r.upper),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// CSV with columns `u, lower, point, upper`.
pub fn write_band_csv<W: Write>(band: &[BandPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u", "lower", "point", "upper"])?;
    for b in band {
        w.write_record([
            fmt_num(b.u),
            fmt_num(b.lower),
            fmt_num(b.point),
            fmt_num(b.upper),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest representation that round-trips.
pub(crate) fn fmt_num(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolated_quantiles() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!((quantile(&v, 0.05).unwrap() - 5.95).abs() < 1e-12);
        assert!((quantile(&v, 0.95).unwrap() - 95.05).abs() < 1e-12);
        assert_eq!(quantile(&[3.0], 0.3).unwrap(), 3.0);
        assert!(quantile(&[], 0.5).is_err());
    }

    #[test]
    fn selection_rules() {
        let ci = |name: &str, lo, hi| CiRecord::new(name, 0.5 * (lo + hi), lo, hi, 0.9);
        let cases = [
            ((0.6353, 0.6495), (4.998, 5.557), Recommendation::St),
            ((0.45, 0.55), (25.0, 40.0), Recommendation::Normal),
            ((0.45, 0.55), (31.0, 40.0), Recommendation::Normal),
            ((0.45, 0.55), (4.0, 8.0), Recommendation::SymmetricT),
            ((0.6, 0.7), (25.0, 40.0), Recommendation::Sn),
            ((0.3, 0.4), (35.0, 50.0), Recommendation::Sn),
        ];
        for ((wl, wh), (dl, dh), want) in cases {
            assert_eq!(
                model_select(&ci("w", wl, wh), &ci("delta", dl, dh)).unwrap(),
                want
            );
        }
        assert!(model_select(&ci("w", 0.7, 0.6), &ci("delta", 4.0, 8.0)).is_err());
    }

    #[test]
    fn sd_needs_two_values() {
        assert_eq!(sample_sd(&[1.0]), None);
        assert!((sample_sd(&[1.0, 3.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }
}
