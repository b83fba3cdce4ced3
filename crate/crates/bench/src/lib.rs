//! Fixtures shared by the benchmarks.

use monosim::estimation::initialize;
use monosim::simulation::{gen_dataset, Scheme, SchemeConfig};
use monosim::{Dataset, ModelSpec, ParamVector, RngStream};

/// A smooth-link simulated dataset of `n` rows.
pub fn fixture(n: usize, seed: u64) -> Dataset {
    let cfg = SchemeConfig::new(Scheme::Smooth, n, seed).expect("valid scheme config");
    gen_dataset(&cfg, &mut RngStream::new(seed))
        .expect("simulation succeeds")
        .data
}

/// Starting parameters for `spec` on `data`, as the trainer would draw them.
pub fn start(spec: &ModelSpec, data: &Dataset, seed: u64) -> ParamVector {
    initialize(spec, data, &mut RngStream::new(seed)).expect("initialization succeeds")
}

pub fn spec(tag: &str, width: usize) -> ModelSpec {
    tag.parse::<ModelSpec>()
        .expect("known model tag")
        .with_hidden(vec![width, width])
}
