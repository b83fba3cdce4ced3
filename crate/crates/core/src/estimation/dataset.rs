//! Response/covariate containers and CSV ingestion with deterministic one-hot encoding.

use crate::error::{Error, Result};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;

/// Mean and standard deviation used to standardize a continuous column.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub mean: f64,
    pub sd: f64,
}

/// A response vector with its `n × p` covariate matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub y: Vec<f64>,
    pub x: Array2<f64>,
    pub columns: Vec<String>,
    /// `Some` for columns that were standardized at ingestion.
    pub scaling: Vec<Option<ColumnScaling>>,
}

impl Dataset {
    pub fn new(y: Vec<f64>, x: Array2<f64>, columns: Vec<String>) -> Result<Self> {
        let p = x.ncols();
        let d = Self {
            y,
            x,
            columns,
            scaling: vec![None; p],
        };
        d.validate()?;
        Ok(d)
    }

    /// Builds a dataset with columns named `x1..xp`.
    pub fn from_rows(y: Vec<f64>, x: Array2<f64>) -> Result<Self> {
        let columns = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        Self::new(y, x, columns)
    }

    pub fn validate(&self) -> Result<()> {
        let (n, p) = self.x.dim();
        if n == 0 || p == 0 {
            return Err(Error::Input(
                "dataset needs at least one row and one covariate".into(),
            ));
        }
        if self.y.len() != n {
            return Err(Error::Shape(format!(
                "response has {} rows, covariates {}",
                self.y.len(),
                n
            )));
        }
        if self.columns.len() != p || self.scaling.len() != p {
            return Err(Error::Shape(
                "column metadata does not match covariate count".into(),
            ));
        }
        if let Some(i) = self.y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "response is not finite at row {}",
                i + 1
            )));
        }
        if let Some(((i, j), _)) = self.x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Input(format!(
                "covariate {} is not finite at row {}",
                self.columns[j],
                i + 1
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Standardizes column `j` in place to mean 0 and sample sd 1.
    pub fn standardize_column(&mut self, j: usize) -> Result<ColumnScaling> {
        let col = self.x.column(j);
        let n = col.len() as f64;
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let sd = var.sqrt();
        if !(sd > 0.0) {
            return Err(Error::Input(format!(
                "column {} is constant and cannot be standardized",
                self.columns[j]
            )));
        }
        self.x.column_mut(j).mapv_inplace(|v| (v - mean) / sd);
        let s = ColumnScaling { mean, sd };
        self.scaling[j] = Some(s);
        Ok(s)
    }

    /// The rows in `idx`, in order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let y = idx.iter().map(|&i| self.y[i]).collect();
        let x = self.x.select(ndarray::Axis(0), idx);
        Dataset {
            y,
            x,
            columns: self.columns.clone(),
            scaling: self.scaling.clone(),
        }
    }

    pub fn with_response(&self, y: Vec<f64>) -> Result<Dataset> {
        if y.len() != self.n() {
            return Err(Error::Shape(
                "replacement response has the wrong length".into(),
            ));
        }
        let d = Dataset { y, ..self.clone() };
        d.validate()?;
        Ok(d)
    }
}

/// A CSV file held as strings, header row required.
#[derive(Clone, Debug)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            rows.push(rec.iter().map(|c| c.trim().to_string()).collect());
        }
        Ok(Self { headers, rows })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)
            .map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
        Self::from_reader(std::io::BufReader::new(f))
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Input(format!("missing column {name:?}")))
    }

    fn numeric_cell(&self, row: usize, col: usize) -> Result<f64> {
        let cell = &self.rows[row][col];
        let v: f64 = cell.parse().map_err(|_| {
            Error::Input(format!(
                "row {}, column {:?}: {cell:?} is not numeric",
                row + 1,
                self.headers[col]
            ))
        })?;
        if !v.is_finite() {
            return Err(Error::Input(format!(
                "row {}, column {:?}: value is not finite",
                row + 1,
                self.headers[col]
            )));
        }
        Ok(v)
    }
}

/// How one source column becomes covariate columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CovariateEncoding {
    Numeric {
        name: String,
        scaling: Option<ColumnScaling>,
    },
    /// One indicator per non-reference level; the reference is the first level seen.
    Categorical {
        name: String,
        reference: String,
        levels: Vec<String>,
    },
}

/// Recipe that turns CSV columns into a [`Dataset`], reusable on new files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub response: String,
    pub covariates: Vec<CovariateEncoding>,
}

impl Design {
    /// Infers the encoding from `table`: columns that parse as numbers in every row stay
    /// numeric, anything else is one-hot encoded in first-appearance order. Columns listed
    /// in `standardize` are centered and scaled.
    pub fn infer(
        table: &CsvTable,
        response: &str,
        covariates: &[String],
        standardize: &[String],
    ) -> Result<Self> {
        if table.rows.is_empty() {
            return Err(Error::Input("CSV has no data rows".into()));
        }
        let ry = table.column_index(response)?;
        for i in 0..table.rows.len() {
            table.numeric_cell(i, ry)?;
        }
        for s in standardize {
            if !covariates.contains(s) {
                return Err(Error::Input(format!(
                    "standardized column {s:?} is not a covariate"
                )));
            }
        }
        let mut encs = Vec::with_capacity(covariates.len());
        for name in covariates {
            let c = table.column_index(name)?;
            let numeric = table
                .rows
                .iter()
                .all(|r| r[c].parse::<f64>().map(|v| v.is_finite()).unwrap_or(false));
            if numeric {
                let scaling = if standardize.contains(name) {
                    let vals: Vec<f64> = (0..table.rows.len())
                        .map(|i| table.numeric_cell(i, c))
                        .collect::<Result<_>>()?;
                    let n = vals.len() as f64;
                    let mean = vals.iter().sum::<f64>() / n;
                    let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                        / (n - 1.0).max(1.0))
                    .sqrt();
                    if !(sd > 0.0) {
                        return Err(Error::Input(format!(
                            "column {name:?} is constant and cannot be standardized"
                        )));
                    }
                    Some(ColumnScaling { mean, sd })
                } else {
                    None
                };
                encs.push(CovariateEncoding::Numeric {
                    name: name.clone(),
                    scaling,
                });
            } else {
                if standardize.contains(name) {
                    return Err(Error::Input(format!(
                        "categorical column {name:?} cannot be standardized"
                    )));
                }
                let mut levels: Vec<String> = Vec::new();
                for (i, r) in table.rows.iter().enumerate() {
                    let cell = &r[c];
                    if cell.is_empty()
                        || cell.eq_ignore_ascii_case("nan")
                        || cell.eq_ignore_ascii_case("na")
                    {
                        return Err(Error::Input(format!(
                            "row {}, column {name:?}: missing value",
                            i + 1
                        )));
                    }
                    if !levels.contains(cell) {
                        levels.push(cell.clone());
                    }
                }
                if levels.len() < 2 {
                    return Err(Error::Input(format!(
                        "categorical column {name:?} has a single level"
                    )));
                }
                let reference = levels[0].clone();
                encs.push(CovariateEncoding::Categorical {
                    name: name.clone(),
                    reference,
                    levels,
                });
            }
        }
        if encs.is_empty() {
            return Err(Error::Input("at least one covariate is required".into()));
        }
        Ok(Design {
            response: response.to_string(),
            covariates: encs,
        })
    }

    /// Names of the encoded covariate columns.
    pub fn column_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for e in &self.covariates {
            match e {
                CovariateEncoding::Numeric { name, .. } => out.push(name.clone()),
                CovariateEncoding::Categorical { name, levels, .. } => {
                    out.extend(levels[1..].iter().map(|l| format!("{name}:{l}")))
                }
            }
        }
        out
    }

    /// Encodes the covariates of every row of `table`.
    pub fn encode_covariates(&self, table: &CsvTable) -> Result<Array2<f64>> {
        let names = self.column_names();
        let n = table.rows.len();
        let mut x = Array2::zeros((n, names.len()));
        let mut col = 0;
        for e in &self.covariates {
            match e {
                CovariateEncoding::Numeric { name, scaling } => {
                    let c = table.column_index(name)?;
                    for i in 0..n {
                        let v = table.numeric_cell(i, c)?;
                        x[[i, col]] = match scaling {
                            Some(s) => (v - s.mean) / s.sd,
                            None => v,
                        };
                    }
                    col += 1;
                }
                CovariateEncoding::Categorical { name, levels, .. } => {
                    let c = table.column_index(name)?;
                    for i in 0..n {
                        let cell = &table.rows[i][c];
                        let k = levels.iter().position(|l| l == cell).ok_or_else(|| {
                            Error::Input(format!(
                                "row {}, column {name:?}: unknown level {cell:?}",
                                i + 1
                            ))
                        })?;
                        if k > 0 {
                            x[[i, col + k - 1]] = 1.0;
                        }
                    }
                    col += levels.len() - 1;
                }
            }
        }
        Ok(x)
    }

    pub fn encode(&self, table: &CsvTable) -> Result<Dataset> {
        let x = self.encode_covariates(table)?;
        let ry = table.column_index(&self.response)?;
        let y = (0..table.rows.len())
            .map(|i| table.numeric_cell(i, ry))
            .collect::<Result<Vec<_>>>()?;
        let mut d = Dataset::new(y, x, self.column_names())?;
        let mut j = 0;
        for e in &self.covariates {
            match e {
                CovariateEncoding::Numeric { scaling, .. } => {
                    d.scaling[j] = *scaling;
                    j += 1;
                }
                CovariateEncoding::Categorical { levels, .. } => j += levels.len() - 1,
            }
        }
        Ok(d)
    }

    /// Reference levels of categorical covariates, as `(column, reference)` pairs.
    pub fn references(&self) -> Vec<(String, String)> {
        self.covariates
            .iter()
            .filter_map(|e| match e {
                CovariateEncoding::Categorical {
                    name, reference, ..
                } => Some((name.clone(), reference.clone())),
                _ => None,
            })
            .collect()
    }
}
