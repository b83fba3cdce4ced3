use crate::args::{
    BootstrapArgs, Common, CvArgs, DiagnoseArgs, FitArgs, PredictArgs, SelectArgs, SimulateArgs,
    Training,
};
use crate::error::CliError;
use crate::output::Output;
use crate::settings::{pick, require, FileConfig};
use monosim::estimation::{CovariateEncoding, CsvTable, Design, IndexEquation};
use monosim::inference::{
    ci_quantiles, kfold_cv, linspace, model_select, parametric_bootstrap, pointwise_band_g,
    residual_diagnostic, write_band_csv, write_ci_csv, BootstrapMode, BootstrapResult, CiRecord,
};
use monosim::simulation::{gen_dataset, Scheme, SchemeConfig};
use monosim::{sgd_fit, Dataset, FitResult, ModelSpec, RngStream, TrainConfig};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub const DEFAULT_MODEL: &str = "st-gx-d";
pub const DEFAULT_RESPONSE: &str = "y";
pub const DEFAULT_BOOTSTRAP_B: usize = 300;
pub const DEFAULT_LEVEL: f64 = 0.90;
pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_BINS: usize = 40;
pub const DEFAULT_SIM_N: usize = 1000;
pub const BAND_POINTS: usize = 101;

/// Per-invocation context: resolved config file, output directory and verbosity.
pub struct Ctx {
    pub file: FileConfig,
    pub out: Output,
    pub quiet: bool,
}

impl Ctx {
    pub fn new(common: &Common) -> Result<Self, CliError> {
        let file = FileConfig::load(common.config.as_deref())?;
        let quiet = common.quiet || file.quiet.unwrap_or(false);
        let threads = pick(common.threads, file.threads);
        if let Some(t) = threads {
            if t == 0 {
                return Err(CliError::Usage("--threads must be at least 1".into()));
            }
            // Fails only if a pool already exists, which cannot happen in a fresh process.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global();
        }
        let dir = pick(common.out.clone(), file.out.clone()).unwrap_or_else(|| PathBuf::from("."));
        Ok(Self {
            out: Output::new(dir)?,
            file,
            quiet,
        })
    }

    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn read_table(path: &Path) -> Result<CsvTable, CliError> {
    Ok(CsvTable::from_path(path)?)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid {what} {}: {e}", path.display())))
}

fn load_fit(path: &Path) -> Result<FitResult, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read fit {}: {e}", path.display())))?;
    FitResult::from_json(&text)
        .map_err(|e| CliError::Usage(format!("invalid fit {}: {e}", path.display())))
}

fn resolve_spec(t: &Training, f: &FileConfig) -> Result<ModelSpec, CliError> {
    let tag = pick(t.model.clone(), f.model.clone()).unwrap_or_else(|| DEFAULT_MODEL.to_string());
    let mut spec: ModelSpec = tag.parse()?;
    if let Some(h) = pick(t.hidden.clone(), f.hidden.clone()) {
        spec = spec.with_hidden(h);
    }
    spec.validate()?;
    Ok(spec)
}

fn resolve_train(t: &Training, f: &FileConfig, base: TrainConfig) -> Result<TrainConfig, CliError> {
    let cfg = TrainConfig {
        epochs: pick(t.epochs, f.epochs).unwrap_or(base.epochs),
        batch_size: pick(t.batch, f.batch).unwrap_or(base.batch_size),
        learning_rate: pick(t.lr, f.lr).unwrap_or(base.learning_rate),
        seed: pick(t.seed, f.seed).unwrap_or(base.seed),
        ..base
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Reads the training CSV and infers its design.
fn load_training_data(t: &Training, f: &FileConfig) -> Result<(Design, Dataset), CliError> {
    let path = require(t.data.clone(), f.data.clone(), "data")?;
    let table = read_table(&path)?;
    let response = pick(t.response.clone(), f.response.clone())
        .unwrap_or_else(|| DEFAULT_RESPONSE.to_string());
    let covariates = match pick(t.covariates.clone(), f.covariates.clone()) {
        Some(c) => c,
        None => table
            .headers
            .iter()
            .filter(|h| **h != response)
            .cloned()
            .collect(),
    };
    let standardize = pick(t.standardize.clone(), f.standardize.clone()).unwrap_or_default();
    let design = Design::infer(&table, &response, &covariates, &standardize)?;
    let data = design.encode(&table)?;
    Ok((design, data))
}

/// The encoding a fit was trained with; fits without a recorded design read their
/// covariate columns as plain numbers.
fn design_of(fit: &FitResult) -> Design {
    fit.design.clone().unwrap_or_else(|| Design {
        response: DEFAULT_RESPONSE.to_string(),
        covariates: fit
            .columns
            .iter()
            .map(|c| CovariateEncoding::Numeric {
                name: c.clone(),
                scaling: None,
            })
            .collect(),
    })
}

fn data_for_fit(fit: &FitResult, path: &Path) -> Result<Dataset, CliError> {
    let table = read_table(path)?;
    Ok(design_of(fit).encode(&table)?)
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Core(e.into()))?;
    s.push('\n');
    Ok(s)
}

fn summarize_fit(ctx: &Ctx, fit: &FitResult) {
    let e = &fit.estimates;
    if let Some(beta) = &e.beta {
        for (c, b) in fit.columns.iter().zip(beta) {
            ctx.note(format!("  beta[{c}] = {b:.4}"));
        }
    }
    ctx.note(format!("  w = {:.4}, sigma = {:.4}", e.w, e.sigma));
    if let Some(d) = e.delta {
        ctx.note(format!("  delta = {d:.4}"));
    }
    ctx.note(format!("  final NLL = {:.4}", fit.final_nll));
}

pub fn fit(args: &FitArgs) -> Result<Vec<PathBuf>, CliError> {
    let ctx = Ctx::new(&args.common)?;
    let spec = resolve_spec(&args.train, &ctx.file)?;
    let config = resolve_train(&args.train, &ctx.file, TrainConfig::default())?;
    let (design, data) = load_training_data(&args.train, &ctx.file)?;
    ctx.note(format!(
        "fitting {} on {} rows x {} covariates",
        spec.name(),
        data.n(),
        data.p()
    ));
    let mut fit = sgd_fit(&spec, &data, &config)?;
    fit.design = Some(design);
    summarize_fit(&ctx, &fit);
    let curve = csv_bytes(
        &["epoch", "loss"],
        fit.learning_curve
            .iter()
            .enumerate()
            .map(|(i, l)| vec![(i + 1).to_string(), num(*l)]),
    );
    Ok(vec![
        ctx.out.write("fit.json", &json(&fit)?)?,
        ctx.out.write("curve.csv", &curve)?,
    ])
}

pub fn predict(args: &PredictArgs) -> Result<Vec<PathBuf>, CliError> {
    let ctx = Ctx::new(&args.common)?;
    let data_path = require(args.data.clone(), ctx.file.data.clone(), "data")?;
    let table = read_table(&data_path)?;
    let fit_path = pick(args.fit.clone(), ctx.file.fit.clone());
    let coef_path = pick(args.coefficients.clone(), ctx.file.coefficients.clone());
    let body = match (fit_path, coef_path) {
        (Some(fp), None) => {
            let fit = load_fit(&fp)?;
            let x = design_of(&fit).encode_covariates(&table)?;
            let modes = fit.predict(x.view())?;
            let index: Vec<Option<f64>> = match &fit.estimates.beta {
                Some(b) => monosim::estimation::index_values(b, x.view())?
                    .into_iter()
                    .map(Some)
                    .collect(),
                None => vec![None; modes.len()],
            };
            csv_bytes(
                &["row", "index", "mode"],
                index.iter().zip(&modes).enumerate().map(|(i, (u, m))| {
                    vec![
                        (i + 1).to_string(),
                        u.map_or_else(|| "NA".to_string(), num),
                        num(*m),
                    ]
                }),
            )
        }
        (None, Some(cp)) => {
            let eq: IndexEquation = read_json(&cp, "coefficients")?;
            let u = eq.evaluate(&table)?;
            csv_bytes(
                &["row", "index"],
                u.iter()
                    .enumerate()
                    .map(|(i, v)| vec![(i + 1).to_string(), num(*v)]),
            )
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "give either --fit or --coefficients, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Usage(
                "predict needs --fit or --coefficients".into(),
            ))
        }
    };
    Ok(vec![ctx.out.write("predictions.csv", &body)?])
}

pub fn bootstrap(args: &BootstrapArgs) -> Result<Vec<PathBuf>, CliError> {
    let ctx = Ctx::new(&args.common)?;
    let f = &ctx.file;
    let b = pick(args.bootstrap_b, f.bootstrap_b).unwrap_or(DEFAULT_BOOTSTRAP_B);
    if b < 1 {
        return Err(CliError::Usage("--bootstrap-B must be at least 1".into()));
    }
    let mode: BootstrapMode = match pick(args.bootstrap_mode.clone(), f.bootstrap_mode.clone()) {
        Some(m) => m.parse()?,
        None => BootstrapMode::default(),
    };
    let level = pick(args.level, f.level).unwrap_or(DEFAULT_LEVEL);
    let (fit0, data) = match pick(args.fit.clone(), f.fit.clone()) {
        Some(path) => {
            let fit0 = load_fit(&path)?;
            let data_path = require(args.train.data.clone(), f.data.clone(), "data")?;
            let data = data_for_fit(&fit0, &data_path)?;
            (fit0, data)
        }
        None => {
            let spec = resolve_spec(&args.train, f)?;
            let config = resolve_train(&args.train, f, TrainConfig::default())?;
            let (design, data) = load_training_data(&args.train, f)?;
            ctx.note(format!("fitting {} before the bootstrap", spec.name()));
            let mut fit0 = sgd_fit(&spec, &data, &config)?;
            fit0.design = Some(design);
            (fit0, data)
        }
    };
    let config = resolve_train(&args.train, f, fit0.config.clone())?;
    if b < 20 {
        ctx.note(format!(
            "warning: B = {b} is small; percentile intervals need at least 20 replicates"
        ));
    }
    ctx.note(format!(
        "bootstrap: {b} {mode} replicates of {}",
        fit0.spec.name()
    ));
    let boot = parametric_bootstrap(&fit0, &data, b, &config, config.seed, mode)?;
    if !boot.failures.is_empty() {
        ctx.note(format!(
            "warning: {} of {b} replicates failed and were excluded",
            boot.failures.len()
        ));
    }
    let cis = ci_quantiles(&boot, level)?;
    let mut ci_buf = Vec::new();
    write_ci_csv(&cis, &mut ci_buf)?;
    let mut written = vec![
        ctx.out.write("bootstrap.json", &json(&boot)?)?,
        ctx.out
            .write("ci.csv", &String::from_utf8(ci_buf).expect("csv is utf-8"))?,
    ];
    if let Some(beta) = &fit0.estimates.beta {
        let u = monosim::estimation::index_values(beta, data.x.view())?;
        let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let band = pointwise_band_g(&boot, &linspace(lo, hi, BAND_POINTS), level)?;
        let mut buf = Vec::new();
        write_band_csv(&band, &mut buf)?;
        written.push(
            ctx.out
                .write("band.csv", &String::from_utf8(buf).expect("csv is utf-8"))?,
        );
    }
    for c in &cis {
        ctx.note(format!(
            "  {:<16} {:>10.4}  [{:.4}, {:.4}]",
            c.parameter, c.estimate, c.lower, c.upper
        ));
    }
    Ok(written)
}

pub fn cv(args: &CvArgs) -> Result<Vec<PathBuf>, CliError> {
    let ctx = Ctx::new(&args.common)?;
    let spec = resolve_spec(&args.train, &ctx.file)?;
    let config = resolve_train(&args.train, &ctx.file, TrainConfig::default())?;
    let k = pick(args.folds, ctx.file.folds).unwrap_or(DEFAULT_FOLDS);
    let (_, data) = load_training_data(&args.train, &ctx.file)?;
    ctx.note(format!("{k}-fold cross-validation of {}", spec.name()));
    let res = kfold_cv(&spec, &data, k, &config, config.seed)?;
    ctx.note(format!(
        "  median fold MSE = {:.4}, mean = {:.4}",
        res.median_mse(),
        res.mean_mse()
    ));
    let mut buf = Vec::new();
    res.write_csv(&mut buf)?;
    Ok(vec![ctx.out.write(
        "cv.csv",
        &String::from_utf8(buf).expect("csv is utf-8"),
    )?])
}

pub fn diagnose(args: &DiagnoseArgs) -> Result<Vec<PathBuf>, CliError> {
    let ctx = Ctx::new(&args.common)?;
    let fit = load_fit(&require(args.fit.clone(), ctx.file.fit.clone(), "fit")?)?;
    let data = data_for_fit(
        &fit,
        &require(args.data.clone(), ctx.file.data.clone(), "data")?,
    )?;
    let bins = pick(args.bins, ctx.file.bins).unwrap_or(DEFAULT_BINS);
    let diag = residual_diagnostic(&fit, &data, bins)?;
    ctx.note(format!(
        "  largest histogram/density gap = {:.4}",
        diag.sup_discrepancy()
    ));
    let mut buf = Vec::new();
    diag.write_csv(&mut buf)?;
    Ok(vec![
        ctx.out.write(
            "diagnostic.csv",
            &String::from_utf8(buf).expect("csv is utf-8"),
        )?,
        ctx.out.write("diagnostic.json", &json(&diag)?)?,
    ])
}

fn read_ci_csv(path: &Path) -> Result<Vec<CiRecord>, CliError> {
    let table = read_table(path)?;
    let col = |name: &str| table.column_index(name).map_err(CliError::from);
    let (p, e, l, u) = (
        col("parameter")?,
        col("estimate")?,
        col("lower5")?,
        col("upper95")?,
    );
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let parse = |c: usize| -> Result<f64, CliError> {
                r[c].parse::<f64>().map_err(|_| {
                    CliError::Usage(format!(
                        "row {}, column {:?}: {:?} is not numeric",
                        i + 1,
                        table.headers[c],
                        r[c]
                    ))
                })
            };
            Ok(CiRecord::new(
                r[p].clone(),
                parse(e)?,
                parse(l)?,
                parse(u)?,
                DEFAULT_LEVEL,
            ))
        })
        .collect()
}

#[derive(Serialize)]
struct Selection {
    recommendation: String,
    w: CiRecord,
    delta: CiRecord,
}

pub fn select(args: &SelectArgs) -> Result<Vec<PathBuf>, CliError> {
    let ctx = Ctx::new(&args.common)?;
    let level = pick(args.level, ctx.file.level).unwrap_or(DEFAULT_LEVEL);
    let records = match (
        pick(args.bootstrap.clone(), ctx.file.bootstrap.clone()),
        pick(args.ci.clone(), ctx.file.ci.clone()),
    ) {
        (Some(bp), None) => {
            let text = std::fs::read_to_string(&bp).map_err(|e| {
                CliError::Usage(format!("cannot read bootstrap {}: {e}", bp.display()))
            })?;
            let boot = BootstrapResult::from_json(&text)?;
            ci_quantiles(&boot, level)?
        }
        (None, Some(cp)) => read_ci_csv(&cp)?,
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "give either --bootstrap or --ci, not both".into(),
            ))
        }
        (None, None) => return Err(CliError::Usage("select needs --bootstrap or --ci".into())),
    };
    let find = |name: &str| {
        records
            .iter()
            .find(|r| r.parameter == name)
            .cloned()
            .ok_or_else(|| {
                CliError::Usage(format!("no interval for {name}; selection needs an ST fit"))
            })
    };
    let (w, delta) = (find("w")?, find("delta")?);
    let rec = model_select(&w, &delta)?;
    ctx.note(format!("recommended error family: {rec}"));
    let sel = Selection {
        recommendation: rec.to_string(),
        w,
        delta,
    };
    Ok(vec![ctx.out.write("selection.json", &json(&sel)?)?])
}

pub fn simulate(args: &SimulateArgs) -> Result<Vec<PathBuf>, CliError> {
    let ctx = Ctx::new(&args.common)?;
    let scheme = Scheme::from_id(require(args.scheme, ctx.file.scheme, "scheme")?)?;
    let n = pick(args.n, ctx.file.n).unwrap_or(DEFAULT_SIM_N);
    let seed = pick(args.seed, ctx.file.seed).unwrap_or(0);
    let sim = gen_dataset(
        &SchemeConfig::new(scheme, n, seed)?,
        &mut RngStream::new(seed),
    )?;
    let data = csv_bytes(
        &["y", "x1", "x2", "x3"],
        sim.data.y.iter().zip(sim.data.x.rows()).map(|(y, r)| {
            let mut row = vec![num(*y)];
            row.extend(r.iter().map(|v| num(*v)));
            row
        }),
    );
    let truth_col = if scheme.has_link() {
        "g_true"
    } else {
        "f_true"
    };
    let truth = csv_bytes(
        &["u", truth_col],
        sim.truth
            .u
            .iter()
            .zip(&sim.truth.signal)
            .map(|(u, g)| vec![num(*u), num(*g)]),
    );
    ctx.note(format!("simulated scheme {} with n = {n}", scheme.id()));
    Ok(vec![
        ctx.out.write("data.csv", &data)?,
        ctx.out.write("truth.csv", &truth)?,
    ])
}
