//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! The statistical criteria run full-size Monte Carlo studies (n = 1000, 2×64 networks,
//! 1000 epochs) and take on the order of an hour or two on a single core.

use monosim::distributions::{ald_logpdf, sn_logpdf, st_logpdf, AldParams, SnParams, StParams};
use monosim::estimation::{initialize, CsvTable, IndexEquation};
use monosim::inference::{
    ci_quantiles, kfold_cv, parametric_bootstrap, quantile, sample_sd, BootstrapMode,
};
use monosim::monotone_net::{
    backward_batch, forward_batch, init_params, predict_batch, NetConfig, NetParams,
};
use monosim::numerics::{derive_seed, integrate_real_line};
use monosim::simulation::monte_carlo::{replicate_data_seed, MonteCarloConfig};
use monosim::simulation::{gen_dataset, monte_carlo, Scheme, SchemeConfig, SimReport};
use monosim::{negative_log_likelihood, nll_gradient, sgd_fit, ModelSpec, RngStream, TrainConfig};
use ndarray::Array2;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

const N: usize = 1000;
const WIDTH: usize = 64;

fn spec(tag: &str) -> ModelSpec {
    tag.parse::<ModelSpec>()
        .expect("model tag")
        .with_hidden(vec![WIDTH, WIDTH])
}

fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5).expect("non-empty")
}

/// Outcome of one criterion: pass flag plus a one-line account of the measured values.
struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn within_time(v: Verdict, elapsed: Duration, budget: Duration) -> Verdict {
    if elapsed <= budget {
        v
    } else {
        Verdict::new(
            false,
            format!("{} (took {:.0?}, budget {:.0?})", v.detail, elapsed, budget),
        )
    }
}

// ---------------------------------------------------------------- oracles

fn t_logpdf(z: f64, d: f64) -> f64 {
    libm::lgamma((d + 1.0) / 2.0)
        - libm::lgamma(d / 2.0)
        - 0.5 * (d * PI).ln()
        - (d + 1.0) / 2.0 * (1.0 + z * z / d).ln()
}

fn phi_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

// ---------------------------------------------------------------- 1–5: property suites

fn normalization() -> Verdict {
    let mut worst: f64 = 0.0;
    for &w in &[0.3, 0.5, 0.7] {
        for &sigma in &[0.5, 1.5] {
            for &delta in &[2.5, 6.0, 30.0] {
                let p = StParams::new(w, 0.0, sigma, delta).unwrap();
                let m =
                    integrate_real_line(|x| st_logpdf(x, &p).unwrap().exp(), 0.0, 1e-10).unwrap();
                worst = worst.max((m - 1.0).abs());
            }
            let p = SnParams::new(w, 0.0, sigma).unwrap();
            worst = worst.max(
                (integrate_real_line(|x| sn_logpdf(x, &p).unwrap().exp(), 0.0, 1e-10).unwrap()
                    - 1.0)
                    .abs(),
            );
            let p = AldParams::new(0.0, sigma, w).unwrap();
            worst = worst.max(
                (integrate_real_line(|x| ald_logpdf(x, &p).unwrap().exp(), 0.0, 1e-10).unwrap()
                    - 1.0)
                    .abs(),
            );
        }
    }
    Verdict::new(worst < 1e-6, format!("max |mass − 1| = {worst:.2e}"))
}

fn reductions() -> Verdict {
    let mut t_gap: f64 = 0.0;
    for &delta in &[2.5, 6.0, 30.0] {
        let p = StParams::new(0.5, 0.7, 1.0, delta).unwrap();
        for i in 0..201 {
            let x = 0.7 - 10.0 + 0.1 * i as f64;
            t_gap = t_gap.max((st_logpdf(x, &p).unwrap() - t_logpdf(x - 0.7, delta)).abs());
        }
    }
    let mut sn_gap: f64 = 0.0;
    for &(w, sigma) in &[(0.3, 0.5), (0.5, 1.0), (0.7, 1.5)] {
        let st = StParams::new(w, 0.0, sigma, 1e6).unwrap();
        let sn = SnParams::new(w, 0.0, sigma).unwrap();
        for i in 0..=2000 {
            let x = -10.0 + 0.01 * i as f64;
            sn_gap = sn_gap
                .max((st_logpdf(x, &st).unwrap().exp() - sn_logpdf(x, &sn).unwrap().exp()).abs());
        }
        // the SN law itself: two half-normals with the two-piece scales
        let (lo, hi) = (
            sigma * (w / (1.0 - w)).sqrt(),
            sigma * ((1.0 - w) / w).sqrt(),
        );
        for i in 0..=200 {
            let x = -5.0 + 0.05 * i as f64;
            let s = if x < 0.0 { lo } else { hi };
            let wt = if x < 0.0 { w } else { 1.0 - w };
            let f = 2.0 * wt / s * (-0.5 * (x / s).powi(2)).exp() / (2.0 * PI).sqrt();
            sn_gap = sn_gap.max((sn_logpdf(x, &sn).unwrap().exp() - f).abs());
        }
    }
    Verdict::new(
        t_gap < 1e-12 && sn_gap < 1e-3,
        format!("ST→t gap {t_gap:.1e}, ST(δ=10⁶)→SN sup gap {sn_gap:.1e}"),
    )
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1.0)
}

fn gradients() -> Verdict {
    // full model: ST error law, 2×8 monotone net, 8 rows
    let sim = gen_dataset(
        &SchemeConfig::new(Scheme::Smooth, 8, 31).unwrap(),
        &mut RngStream::new(31),
    )
    .unwrap();
    let s = "st-gx-d"
        .parse::<ModelSpec>()
        .unwrap()
        .with_hidden(vec![8, 8]);
    let mut params = initialize(&s, &sim.data, &mut RngStream::new(32)).unwrap();
    let mut flat = params.to_flat();
    let mut rng = RngStream::new(33);
    flat.iter_mut()
        .for_each(|v| *v += 0.2 * (rng.next_f64() - 0.5));
    params.set_flat(&flat).unwrap();
    let rows: Vec<usize> = (0..8).collect();
    let (_, grad) = nll_gradient(&s, &params, &sim.data, &rows).unwrap();
    let h = 1e-6;
    let mut model_err: f64 = 0.0;
    for k in 0..flat.len() {
        let at = |x: f64| {
            let mut f = flat.clone();
            f[k] = x;
            let mut p = params.clone();
            p.set_flat(&f).unwrap();
            negative_log_likelihood(&s, &p, &sim.data).unwrap()
        };
        model_err = model_err.max(rel_err(
            grad[k],
            (at(flat[k] + h) - at(flat[k] - h)) / (2.0 * h),
        ));
    }

    // network alone: 2×8 positive-weight net on 8 inputs, step 1e-5
    let net = init_params(
        &NetConfig::new(vec![8, 8]).unwrap(),
        &mut RngStream::new(34),
    )
    .unwrap();
    let u = Array2::from_shape_fn((8, 1), |(i, _)| -1.5 + 0.4 * i as f64);
    let weights: Vec<f64> = (0..8).map(|i| 1.0 - 0.1 * i as f64).collect();
    let objective = |p: &NetParams| -> f64 {
        let (g, _) = forward_batch(p, u.view()).unwrap();
        g.iter().zip(&weights).map(|(g, w)| g * w).sum()
    };
    let (_, cache) = forward_batch(&net, u.view()).unwrap();
    let g = backward_batch(&net, &cache, &weights).unwrap();
    let h = 1e-5;
    let mut net_err: f64 = 0.0;
    for (l, layer) in net.layers.iter().enumerate() {
        for (idx, _) in layer.raw.indexed_iter() {
            let mut p = net.clone();
            p.layers[l].raw[idx] += h;
            let up = objective(&p);
            p.layers[l].raw[idx] -= 2.0 * h;
            net_err = net_err.max(rel_err(
                g.layers[l].raw[idx],
                (up - objective(&p)) / (2.0 * h),
            ));
        }
        for j in 0..layer.bias.len() {
            let mut p = net.clone();
            p.layers[l].bias[j] += h;
            let up = objective(&p);
            p.layers[l].bias[j] -= 2.0 * h;
            net_err = net_err.max(rel_err(
                g.layers[l].bias[j],
                (up - objective(&p)) / (2.0 * h),
            ));
        }
    }
    Verdict::new(
        model_err < 1e-4 && net_err < 1e-5,
        format!("model max rel err {model_err:.1e}, net max rel err {net_err:.1e}"),
    )
}

fn monotonicity() -> Verdict {
    let us: Vec<f64> = {
        let mut rng = RngStream::new(40);
        let mut v: Vec<f64> = (0..1000).map(|_| -6.0 + 12.0 * rng.next_f64()).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let mut violations = 0usize;
    for k in 0..1000u64 {
        let mut rng = RngStream::new(derive_seed(41, k));
        let depth = 1 + rng.index(3);
        let widths: Vec<usize> = (0..depth).map(|_| 1 + rng.index(32)).collect();
        let mut net = init_params(&NetConfig::new(widths).unwrap(), &mut rng).unwrap();
        for layer in &mut net.layers {
            layer.raw.mapv_inplace(|w| w + 3.0 * (rng.next_f64() - 0.5));
            layer
                .bias
                .mapv_inplace(|b| b + 4.0 * (rng.next_f64() - 0.5));
        }
        let g = predict_batch(&net, &us).unwrap();
        violations += g.windows(2).filter(|p| p[1] < p[0]).count();
    }
    Verdict::new(
        violations == 0,
        format!("{violations} violations over 10³ nets × 10³ inputs"),
    )
}

/// Full-batch Adam on squared error, written against the public forward/backward passes.
fn approximation() -> Verdict {
    let m = 601;
    let u = Array2::from_shape_fn((m, 1), |(i, _)| -3.0 + 6.0 * i as f64 / (m - 1) as f64);
    let target: Vec<f64> = u.iter().map(|&x| 10.0 * phi_cdf(2.5 * x)).collect();
    let mut net = init_params(
        &NetConfig::new(vec![WIDTH, WIDTH]).unwrap(),
        &mut RngStream::new(50),
    )
    .unwrap();
    let sup = |net: &NetParams| -> f64 {
        let (g, _) = forward_batch(net, u.view()).unwrap();
        g.iter()
            .zip(&target)
            .map(|(g, t)| (g - t).abs())
            .fold(0.0, f64::max)
    };
    let sizes: Vec<(usize, usize)> = net
        .layers
        .iter()
        .map(|l| (l.raw.len(), l.bias.len()))
        .collect();
    let total: usize = sizes.iter().map(|(a, b)| a + b).sum();
    let (mut m1, mut m2) = (vec![0.0; total], vec![0.0; total]);
    let (lr, b1, b2, eps) = (0.01, 0.9, 0.999, 1e-8);
    let started = Instant::now();
    let mut best = sup(&net);
    let mut step = 0;
    while best >= 0.1 && step < 30_000 && started.elapsed() < Duration::from_secs(110) {
        step += 1;
        let (g, cache) = forward_batch(&net, u.view()).unwrap();
        let dl: Vec<f64> = g
            .iter()
            .zip(&target)
            .map(|(g, t)| 2.0 * (g - t) / m as f64)
            .collect();
        let grads = backward_batch(&net, &cache, &dl).unwrap();
        let flat_grad: Vec<f64> = grads
            .layers
            .iter()
            .flat_map(|l| l.raw.iter().chain(l.bias.iter()).copied())
            .collect();
        let (c1, c2) = (1.0 - f64::powi(b1, step), 1.0 - f64::powi(b2, step));
        let mut k = 0;
        for layer in &mut net.layers {
            for p in layer.raw.iter_mut().chain(layer.bias.iter_mut()) {
                m1[k] = b1 * m1[k] + (1.0 - b1) * flat_grad[k];
                m2[k] = b2 * m2[k] + (1.0 - b2) * flat_grad[k] * flat_grad[k];
                *p -= lr * (m1[k] / c1) / ((m2[k] / c2).sqrt() + eps);
                k += 1;
            }
        }
        if step % 50 == 0 {
            best = best.min(sup(&net));
        }
    }
    best = best.min(sup(&net));
    within_time(
        Verdict::new(
            best < 0.1,
            format!("sup error {best:.4} after {step} Adam steps"),
        ),
        started.elapsed(),
        Duration::from_secs(120),
    )
}

// ---------------------------------------------------------------- 6–10: simulation studies

fn mc_config(scheme: Scheme, reps: usize, seed: u64) -> MonteCarloConfig {
    MonteCarloConfig {
        scheme,
        n: N,
        reps,
        seed,
        train: TrainConfig::default(),
        bootstrap: None,
    }
}

const SCHEME1_SEED: u64 = 20_241;

fn scheme1(report: &SimReport) -> Verdict {
    let ape = |name: &str| report.param(name).map(|p| p.ape).unwrap_or(f64::NAN);
    let target = 1.0 / 3f64.sqrt();
    let betas = ["beta[x1]", "beta[x2]", "beta[x3]"].map(ape);
    let (w, sigma, delta) = (ape("w"), ape("sigma"), ape("delta"));
    let med = report.g_mse_median.unwrap_or(f64::NAN);
    let pass = report.succeeded == report.reps
        && betas.iter().all(|b| (b - target).abs() < 0.03)
        && (w - 0.6).abs() < 0.03
        && (sigma - 1.5).abs() < 0.10
        && (delta - 6.0).abs() < 1.2
        && med < 0.1;
    Verdict::new(
        pass,
        format!(
            "{}/{} fits; APE β = ({:.4}, {:.4}, {:.4}), w = {w:.4}, σ = {sigma:.4}, δ = {delta:.3}; median g-MSE {med:.4}",
            report.succeeded, report.reps, betas[0], betas[1], betas[2]
        ),
    )
}

fn bootstrap_calibration(report: &SimReport) -> Verdict {
    let empirical = report
        .param("beta[x1]")
        .and_then(|p| p.empirical_se)
        .unwrap_or(f64::NAN);
    let cfg = mc_config(Scheme::Smooth, 20, SCHEME1_SEED);
    let s = spec("st-gx-d");
    let truth = 1.0 / 3f64.sqrt();
    let mut ses = Vec::new();
    let mut covered = 0;
    for id in 1..=5 {
        let data_seed = replicate_data_seed(&cfg, id);
        let sim = gen_dataset(
            &SchemeConfig::new(Scheme::Smooth, N, data_seed).unwrap(),
            &mut RngStream::new(data_seed),
        )
        .unwrap();
        // same seed as the Monte Carlo replicate, so this is that replicate's fit
        let train = TrainConfig {
            seed: derive_seed(data_seed, 1),
            ..cfg.train.clone()
        };
        let fit0 = sgd_fit(&s, &sim.data, &train).unwrap();
        let boot = parametric_bootstrap(
            &fit0,
            &sim.data,
            100,
            &train,
            derive_seed(train.seed, 7),
            BootstrapMode::Classic,
        )
        .unwrap();
        let b1: Vec<f64> = boot
            .replicates
            .iter()
            .map(|r| r.estimates.beta.as_ref().unwrap()[0])
            .collect();
        ses.push(sample_sd(&b1).unwrap_or(f64::NAN));
        let ci = ci_quantiles(&boot, 0.9)
            .unwrap()
            .into_iter()
            .find(|c| c.parameter == "beta[x1]")
            .unwrap();
        if ci.contains(truth) {
            covered += 1;
        }
    }
    let avg = ses.iter().sum::<f64>() / ses.len() as f64;
    let ratio = avg / empirical;
    let coverage = covered as f64 / 5.0;
    Verdict::new(
        (ratio - 1.0).abs() <= 0.30 && coverage >= 0.8,
        format!("avg bootstrap SE(β1) {avg:.4} vs empirical {empirical:.4} (ratio {ratio:.3}); 90% CI coverage {covered}/5"),
    )
}

fn scheme2() -> Verdict {
    let reports = monte_carlo(
        &mc_config(Scheme::Step, 20, 20_242),
        &[spec("st-gx-d"), spec("st-gx-b")],
    )
    .unwrap();
    let (d, b) = (
        reports[0].g_mse_median.unwrap_or(f64::NAN),
        reports[1].g_mse_median.unwrap_or(f64::NAN),
    );
    let wins = reports[0]
        .g_mse
        .iter()
        .zip(&reports[1].g_mse)
        .filter(|(d, b)| d < b)
        .count();
    Verdict::new(
        d < b,
        format!(
            "median g-MSE ST-GX-D {d:.4} vs ST-GX-B {b:.4}; GX-D lower in {wins}/20 replicates"
        ),
    )
}

fn scheme3() -> Verdict {
    let reports = monte_carlo(
        &mc_config(Scheme::Contaminated, 20, 20_243),
        &[spec("st-gx-d"), spec("sn-gx-d"), spec("n-gx-d")],
    )
    .unwrap();
    let st = &reports[0];
    let target = 1.0 / 3f64.sqrt();
    let medians: Vec<f64> = (0..3)
        .map(|j| {
            let v: Vec<f64> = st
                .replicates
                .iter()
                .filter_map(|r| r.estimates.as_ref())
                .map(|e| e.beta.as_ref().unwrap()[j])
                .collect();
            median(&v)
        })
        .collect();
    let g: Vec<f64> = reports
        .iter()
        .map(|r| r.g_mse_median.unwrap_or(f64::NAN))
        .collect();
    Verdict::new(
        medians.iter().all(|m| (m - target).abs() < 0.05) && g[0] <= g[1] && g[0] <= g[2],
        format!(
            "ST-GX-D median β = ({:.4}, {:.4}, {:.4}); median g-MSE ST {:.4}, SN {:.4}, N {:.4}",
            medians[0], medians[1], medians[2], g[0], g[1], g[2]
        ),
    )
}

fn scheme4() -> Verdict {
    let specs = [spec("st-gx-d"), spec("st-fx")];
    let cfg = mc_config(Scheme::Additive, 20, 20_244);
    let mut fold_mse: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for id in 1..=cfg.reps {
        let data_seed = replicate_data_seed(&cfg, id);
        let sim = gen_dataset(
            &SchemeConfig::new(Scheme::Additive, N, data_seed).unwrap(),
            &mut RngStream::new(data_seed),
        )
        .unwrap();
        for (k, s) in specs.iter().enumerate() {
            let train = TrainConfig {
                seed: derive_seed(data_seed, 1 + k as u64),
                ..cfg.train.clone()
            };
            let cv = kfold_cv(s, &sim.data, 10, &train, data_seed).unwrap();
            fold_mse[k].extend(cv.folds.iter().map(|f| f.mse));
        }
    }
    let (d, f) = (median(&fold_mse[0]), median(&fold_mse[1]));
    Verdict::new(
        d <= f,
        format!("median fold MSE over 20×10 folds: ST-GX-D {d:.4} vs ST-FX {f:.4}"),
    )
}

// ---------------------------------------------------------------- 11–12

fn index_computation() -> Verdict {
    let eq = IndexEquation::from_json(
        r#"{"terms": [
            {"column": "age", "mean": 54.981, "sd": 15.107, "coefficient": 0.0233},
            {"column": "gender", "level": "Male", "coefficient": 0.1794},
            {"column": "race", "level": "Black", "coefficient": 0.9609},
            {"column": "race", "level": "White", "coefficient": -0.1203},
            {"column": "diabetes", "level": "Yes", "coefficient": 0.0545},
            {"column": "tobacco", "level": "Yes", "coefficient": 0.1516},
            {"column": "floss", "level": "Daily", "coefficient": -0.0197},
            {"column": "insured", "level": "Yes", "coefficient": -0.0526}
        ]}"#,
    )
    .unwrap();
    let table = CsvTable::from_reader(
        "age,gender,race,diabetes,tobacco,floss,insured\n60,Male,Black,Yes,Yes,Weekly,No\n"
            .as_bytes(),
    )
    .unwrap();
    let u = eq.evaluate(&table).unwrap()[0];
    Verdict::new((u - 1.354).abs() <= 0.005, format!("û = {u:.4}"))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_monosim"))
        .args(args)
        .arg("--quiet")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn run_all_subcommands(root: &Path) -> Result<(), String> {
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let sim = root.join("simulate");
    run_cli(&[
        "simulate",
        "--scheme",
        "1",
        "--n",
        "300",
        "--seed",
        "7",
        "--out",
        &s(&sim),
    ])?;
    let data = s(&sim.join("data.csv"));
    let train = [
        "--data",
        data.as_str(),
        "--epochs",
        "20",
        "--hidden",
        "8,8",
        "--seed",
        "3",
    ];
    let fit = root.join("fit");
    run_cli(&[&["fit"], &train[..], &["--out", &s(&fit)]].concat())?;
    let fit_json = s(&fit.join("fit.json"));
    run_cli(&[
        "predict",
        "--fit",
        &fit_json,
        "--data",
        &data,
        "--out",
        &s(&root.join("predict")),
    ])?;
    run_cli(&[
        "diagnose",
        "--fit",
        &fit_json,
        "--data",
        &data,
        "--bins",
        "25",
        "--out",
        &s(&root.join("diagnose")),
    ])?;
    let boot = root.join("bootstrap");
    run_cli(
        &[
            &["bootstrap", "--bootstrap-B", "20", "--threads", "2"],
            &train[..],
            &["--out", &s(&boot)],
        ]
        .concat(),
    )?;
    run_cli(&[
        "select",
        "--bootstrap",
        &s(&boot.join("bootstrap.json")),
        "--out",
        &s(&root.join("select")),
    ])?;
    run_cli(
        &[
            &["cv", "--folds", "10", "--threads", "3"],
            &train[..],
            &["--out", &s(&root.join("cv"))],
        ]
        .concat(),
    )?;
    Ok(())
}

fn files_under(root: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(root).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(files_under(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn determinism() -> Verdict {
    let tmp = tempfile::TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        if let Err(e) = run_all_subcommands(dir) {
            return Verdict::new(false, e);
        }
    }
    let (fa, fb) = (files_under(&a), files_under(&b));
    let rel = |root: &Path, v: &[std::path::PathBuf]| -> Vec<std::path::PathBuf> {
        v.iter()
            .map(|p| p.strip_prefix(root).unwrap().to_path_buf())
            .collect()
    };
    if rel(&a, &fa) != rel(&b, &fb) {
        return Verdict::new(false, "runs produced different file sets");
    }
    // files that mention their own location cannot match byte for byte; compare with the
    // run directory normalized away
    let differing: Vec<String> = fa
        .iter()
        .zip(&fb)
        .filter(|(x, y)| {
            let tx = std::fs::read_to_string(x)
                .unwrap()
                .replace(a.to_str().unwrap(), "<run>");
            let ty = std::fs::read_to_string(y)
                .unwrap()
                .replace(b.to_str().unwrap(), "<run>");
            tx != ty
        })
        .map(|(x, _)| x.strip_prefix(&a).unwrap().display().to_string())
        .collect();
    Verdict::new(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} output files identical across reruns", fa.len())
        } else {
            format!("differ: {differing:?}")
        },
    )
}

// ---------------------------------------------------------------- driver

fn guarded(f: impl FnOnce() -> Verdict) -> Verdict {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(v) => v,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Verdict::new(false, format!("panicked: {}", msg.unwrap_or_default()))
        }
    }
}

fn report(id: usize, name: &str, budget_secs: u64, f: impl FnOnce() -> Verdict) -> bool {
    let started = Instant::now();
    let v = guarded(f);
    let v = within_time(v, started.elapsed(), Duration::from_secs(budget_secs));
    println!(
        "[{}] {id:>2}. {name}: {} ({:.1}s)",
        if v.pass { "PASS" } else { "FAIL" },
        v.detail,
        started.elapsed().as_secs_f64()
    );
    v.pass
}

fn main() {
    // `cargo test -- --list` and similar harness probes: nothing to enumerate
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut results = Vec::new();
    results.push(report(1, "density normalization", 10, normalization));
    results.push(report(2, "density reductions", 1, reductions));
    results.push(report(3, "gradients vs finite differences", 10, gradients));
    results.push(report(4, "network monotonicity", 30, monotonicity));
    results.push(report(5, "network approximation", 120, approximation));

    // criteria 6 and 7 share the 20 scheme-1 replicates
    let mut scheme1_report: Option<SimReport> = None;
    results.push(report(6, "scheme 1 estimation", 30 * 60, || {
        let r = monte_carlo(
            &mc_config(Scheme::Smooth, 20, SCHEME1_SEED),
            &[spec("st-gx-d")],
        )
        .unwrap()
        .remove(0);
        let v = scheme1(&r);
        scheme1_report = Some(r);
        v
    }));
    results.push(report(
        7,
        "bootstrap calibration",
        45 * 60,
        || match &scheme1_report {
            Some(r) => bootstrap_calibration(r),
            None => Verdict::new(false, "no scheme-1 replicates to compare against"),
        },
    ));
    results.push(report(
        8,
        "scheme 2: monotone net vs Bernstein",
        30 * 60,
        scheme2,
    ));
    results.push(report(
        9,
        "scheme 3: robustness to contamination",
        40 * 60,
        scheme3,
    ));
    results.push(report(
        10,
        "scheme 4: cross-validated index vs free model",
        40 * 60,
        scheme4,
    ));
    results.push(report(11, "index computation", 1, index_computation));
    results.push(report(12, "CLI determinism", 600, determinism));

    let passed = results.iter().filter(|p| **p).count();
    println!("{passed}/{} acceptance criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
