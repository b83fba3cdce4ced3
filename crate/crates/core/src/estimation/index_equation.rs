//! Index equations with caller-supplied coefficients, evaluated on raw CSV columns.

use super::dataset::CsvTable;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One additive term of an index equation.
///
/// A term with `level` contributes `coefficient · I(column == level)`; otherwise the column is
/// read as a number, centred and scaled when `mean`/`sd` are given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexTerm {
    pub column: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd: Option<f64>,
    pub coefficient: f64,
}

/// `u = Σ_k coefficient_k · value_k(row)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEquation {
    pub terms: Vec<IndexTerm>,
}

impl IndexEquation {
    pub fn from_json(text: &str) -> Result<Self> {
        let eq: IndexEquation = serde_json::from_str(text)?;
        eq.validate()?;
        Ok(eq)
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::Input("index equation has no terms".into()));
        }
        for t in &self.terms {
            if !t.coefficient.is_finite() {
                return Err(Error::Input(format!(
                    "coefficient of {:?} is not finite",
                    t.column
                )));
            }
            if let Some(sd) = t.sd {
                if !(sd > 0.0 && sd.is_finite()) {
                    return Err(Error::Input(format!(
                        "sd of {:?} must be positive",
                        t.column
                    )));
                }
            }
            if t.level.is_some() && (t.mean.is_some() || t.sd.is_some()) {
                return Err(Error::Input(format!(
                    "indicator term {:?} cannot be rescaled",
                    t.column
                )));
            }
        }
        Ok(())
    }

    /// Index value of every row of `table`.
    pub fn evaluate(&self, table: &CsvTable) -> Result<Vec<f64>> {
        self.validate()?;
        let cols: Vec<usize> = self
            .terms
            .iter()
            .map(|t| table.column_index(&t.column))
            .collect::<Result<_>>()?;
        table
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut u = 0.0;
                for (t, &c) in self.terms.iter().zip(&cols) {
                    let cell = &row[c];
                    let value = match &t.level {
                        Some(level) => f64::from(u8::from(cell == level)),
                        None => {
                            let v: f64 = cell
                                .parse()
                                .ok()
                                .filter(|v: &f64| v.is_finite())
                                .ok_or_else(|| {
                                    Error::Input(format!(
                                        "row {}, column {:?}: {cell:?} is not numeric",
                                        i + 1,
                                        t.column
                                    ))
                                })?;
                            (v - t.mean.unwrap_or(0.0)) / t.sd.unwrap_or(1.0)
                        }
                    };
                    u += t.coefficient * value;
                }
                Ok(u)
            })
            .collect()
    }
}
