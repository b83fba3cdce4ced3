//! Small Monte Carlo study: fits several models to replicate datasets of one scheme and
//! prints parameter summaries and link-recovery MSE.
//!
//! ```sh
//! cargo run --release --example simulation_study -- 1 5 st-gx-d st-gx-b
//! ```

use monosim::simulation::monte_carlo::MonteCarloConfig;
use monosim::simulation::{monte_carlo, Scheme};
use monosim::{ModelSpec, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 3 {
        eprintln!("usage: simulation_study <scheme 1-4> <replicates> <model tag>...");
        std::process::exit(2);
    }
    let scheme = Scheme::from_id(args[0].parse()?)?;
    let reps: usize = args[1].parse()?;
    let specs = args[2..]
        .iter()
        .map(|t| Ok(t.parse::<ModelSpec>()?.with_hidden(vec![64, 64])))
        .collect::<Result<Vec<_>, monosim::Error>>()?;

    let cfg = MonteCarloConfig {
        scheme,
        n: 1000,
        reps,
        seed: 2024,
        train: TrainConfig::default(),
        bootstrap: None,
    };
    for report in monte_carlo(&cfg, &specs)? {
        println!(
            "{}: {}/{} replicates fitted",
            report.spec.name(),
            report.succeeded,
            report.reps
        );
        for p in &report.params {
            let truth = p.truth.map_or("-".to_string(), |t| format!("{t:.4}"));
            let se = p
                .empirical_se
                .map_or("-".to_string(), |s| format!("{s:.4}"));
            println!(
                "  {:<10} truth {truth:>7}  mean {:.4}  sd {se}",
                p.parameter, p.ape
            );
        }
        if let Some(m) = report.g_mse_median {
            println!("  median link MSE {m:.4}");
        }
    }
    Ok(())
}
