//! End-to-end behaviour of fitting, resampling and simulation: reproducibility,
//! serialization and error reporting.

use monosim::estimation::{half_sample_mode, CsvTable, IndexEquation};
use monosim::inference::{
    ci_quantiles, kfold_cv, parametric_bootstrap, BootstrapMode, BootstrapResult,
};
use monosim::simulation::monte_carlo::MonteCarloConfig;
use monosim::simulation::{gen_dataset, monte_carlo, Scheme, SchemeConfig};
use monosim::{sgd_fit, Dataset, Error, FitResult, ModelSpec, RngStream, TrainConfig};

fn data(scheme: Scheme, n: usize, seed: u64) -> Dataset {
    gen_dataset(
        &SchemeConfig::new(scheme, n, seed).unwrap(),
        &mut RngStream::new(seed),
    )
    .unwrap()
    .data
}

fn spec(tag: &str, width: usize) -> ModelSpec {
    tag.parse::<ModelSpec>()
        .unwrap()
        .with_hidden(vec![width, width])
}

fn quick(epochs: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs,
        seed,
        ..TrainConfig::default()
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn fits_are_reproducible_and_seed_sensitive() {
    let d = data(Scheme::Smooth, 300, 1);
    let s = spec("st-gx-d", 8);
    let a = sgd_fit(&s, &d, &quick(20, 4)).unwrap();
    let b = sgd_fit(&s, &d, &quick(20, 4)).unwrap();
    let c = sgd_fit(&s, &d, &quick(20, 5)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.params, c.params);
    assert_eq!(a.learning_curve.len(), 20);
}

#[test]
fn short_fit_recovers_the_index_direction() {
    let d = data(Scheme::Smooth, 500, 2);
    let fit = sgd_fit(&spec("st-gx-d", 16), &d, &quick(200, 1)).unwrap();
    let beta = fit.estimates.beta.clone().unwrap();
    let cos: f64 = beta.iter().map(|b| b / 3f64.sqrt()).sum();
    assert!(cos > 0.98, "cosine to the true direction {cos}");
    assert!(fit.learning_curve[0] > *fit.learning_curve.last().unwrap());
}

#[test]
fn fit_json_round_trips() {
    let d = data(Scheme::Step, 150, 3);
    for tag in ["st-gx-d", "sn-gx-b", "n-fx"] {
        let fit = sgd_fit(&spec(tag, 4), &d, &quick(3, 1)).unwrap();
        let back = FitResult::from_json(&fit.to_json().unwrap()).unwrap();
        assert_eq!(back, fit);
        assert_eq!(
            back.predict(d.x.view()).unwrap(),
            fit.predict(d.x.view()).unwrap()
        );
    }
    let fit = sgd_fit(&spec("st-gx-d", 4), &d, &quick(1, 1)).unwrap();
    let tampered = fit.to_json().unwrap().replace("monosim.fit.v1", "other.v9");
    assert!(FitResult::from_json(&tampered).is_err());
}

#[test]
fn divergence_is_reported_as_a_training_error() {
    let d = data(Scheme::Smooth, 100, 4);
    let cfg = TrainConfig {
        learning_rate: 1e12,
        ..quick(5, 1)
    };
    match sgd_fit(&spec("st-gx-d", 4), &d, &cfg) {
        Err(Error::Training {
            epoch,
            last_good_epoch,
        }) => assert!(last_good_epoch < epoch),
        other => panic!("expected a training error, got {other:?}"),
    }
}

#[test]
fn bootstrap_is_reproducible_across_thread_counts() {
    let d = data(Scheme::Smooth, 200, 5);
    let cfg = quick(5, 2);
    let fit0 = sgd_fit(&spec("st-gx-d", 4), &d, &cfg).unwrap();
    for mode in [BootstrapMode::Classic, BootstrapMode::Chained] {
        let one = in_pool(1, || {
            parametric_bootstrap(&fit0, &d, 6, &cfg, 17, mode).unwrap()
        });
        let three = in_pool(3, || {
            parametric_bootstrap(&fit0, &d, 6, &cfg, 17, mode).unwrap()
        });
        assert_eq!(one, three);
        assert_eq!(one.replicates.len() + one.failures.len(), 6);
        let back = BootstrapResult::from_json(&one.to_json().unwrap()).unwrap();
        assert_eq!(back, one);
        let cis = ci_quantiles(&one, 0.9).unwrap();
        assert_eq!(cis.len(), 6);
        assert!(cis.iter().all(|c| c.lower <= c.upper));
    }
}

#[test]
fn cross_validation_is_reproducible_and_covers_every_row() {
    let d = data(Scheme::Additive, 120, 6);
    let cfg = quick(2, 3);
    let s = spec("st-fx", 4);
    let a = in_pool(1, || kfold_cv(&s, &d, 10, &cfg, 8).unwrap());
    let b = in_pool(4, || kfold_cv(&s, &d, 10, &cfg, 8).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.folds.len(), 10);
    assert_eq!(a.folds.iter().map(|f| f.n_test).sum::<usize>(), 120);
    assert!(kfold_cv(&s, &d, 1, &cfg, 8).is_err());
}

#[test]
fn monte_carlo_is_reproducible() {
    let cfg = MonteCarloConfig {
        scheme: Scheme::Smooth,
        n: 150,
        reps: 3,
        seed: 9,
        train: quick(3, 0),
        bootstrap: None,
    };
    let specs = [spec("st-gx-d", 4), spec("st-gx-b", 4)];
    let a = in_pool(1, || monte_carlo(&cfg, &specs).unwrap());
    let b = in_pool(3, || monte_carlo(&cfg, &specs).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.len(), 2);
    assert!(a.iter().all(|r| r.succeeded == 3 && r.g_mse.len() == 3));
}

#[test]
fn half_sample_mode_finds_the_peak() {
    let mut rng = RngStream::new(10);
    let xs: Vec<f64> = (0..20_000)
        .map(|_| 3.0 + monosim::numerics::sample_normal(&mut rng))
        .collect();
    let m = half_sample_mode(&xs).unwrap();
    assert!((m - 3.0).abs() < 0.15, "mode {m}");
    assert_eq!(half_sample_mode(&[]), None);
    assert_eq!(half_sample_mode(&[1.5]), Some(1.5));
}

#[test]
fn fixed_index_equation_on_raw_columns() {
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
    // independent arithmetic of the same equation
    let expected = (60.0 - 54.981) / 15.107 * 0.0233 + 0.1794 + 0.9609 + 0.0545 + 0.1516;
    assert!((u - expected).abs() < 1e-12);
    assert!((u - 1.354).abs() <= 0.005);
}
