//! K-fold cross-validation of the predicted mode.

use crate::error::{Error, Result};
use crate::estimation::{sgd_fit, Dataset, ModelSpec, TrainConfig};
use crate::numerics::{derive_seed, RngStream};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    /// 1-based fold id.
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Mean squared error of the predicted mode on the held-out rows.
    pub mse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub spec: ModelSpec,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
}

impl CvResult {
    pub fn mean_mse(&self) -> f64 {
        self.folds.iter().map(|f| f.mse).sum::<f64>() / self.folds.len() as f64
    }

    pub fn median_mse(&self) -> f64 {
        let v: Vec<f64> = self.folds.iter().map(|f| f.mse).collect();
        super::quantile(&v, 0.5).expect("at least one fold")
    }

    /// CSV with columns `fold, n_train, n_test, mse`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["fold", "n_train", "n_test", "mse"])?;
        for f in &self.folds {
            w.write_record([
                f.fold.to_string(),
                f.n_train.to_string(),
                f.n_test.to_string(),
                format!("{}", f.mse),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Seeded partition of `0..n` into `k` disjoint folds whose sizes differ by at most one.
/// Each fold's row indices are sorted.
pub fn fold_partition(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::domain("cross-validation needs at least 2 folds"));
    }
    if k > n {
        return Err(Error::domain(format!(
            "cannot split {n} rows into {k} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut RngStream::with_stream(seed, 3));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, row) in order.into_iter().enumerate() {
        folds[pos % k].push(row);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Fits on `k − 1` folds and scores the held-out fold, for each fold. Fold `j`'s trainer is
/// seeded with `derive_seed(config.seed, j)`; folds run in parallel and merge by id.
pub fn kfold_cv(
    spec: &ModelSpec,
    data: &Dataset,
    k: usize,
    config: &TrainConfig,
    seed: u64,
) -> Result<CvResult> {
    config.validate()?;
    let folds = fold_partition(data.n(), k, seed)?;
    let results: Vec<Result<FoldResult>> = (0..k)
        .into_par_iter()
        .map(|j| {
            let test = &folds[j];
            let train: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .flat_map(|(_, f)| f.iter().copied())
                .collect();
            let mut train_sorted = train;
            train_sorted.sort_unstable();
            let fit = sgd_fit(
                spec,
                &data.subset(&train_sorted),
                &TrainConfig {
                    seed: derive_seed(config.seed, j as u64 + 1),
                    ..config.clone()
                },
            )?;
            let held = data.subset(test);
            let pred = fit.predict(held.x.view())?;
            let mse = held
                .y
                .iter()
                .zip(&pred)
                .map(|(y, t)| (y - t).powi(2))
                .sum::<f64>()
                / test.len() as f64;
            Ok(FoldResult {
                fold: j + 1,
                n_train: train_sorted.len(),
                n_test: test.len(),
                mse,
            })
        })
        .collect();
    let folds = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(CvResult {
        spec: spec.clone(),
        k,
        seed,
        folds,
    })
}
