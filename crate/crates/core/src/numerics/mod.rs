//! Numerical substrate: special functions, quadrature and seeded random streams.

pub mod quadrature;
pub mod rng;
pub mod special;

pub use quadrature::{integrate, integrate_real_line};
pub use rng::{
    derive_seed, sample_exp1, sample_gamma, sample_normal, sample_student_t, sample_uniform,
    RngStream,
};
pub use special::{digamma, ln_gamma, normal_cdf, normal_logpdf, student_t_logpdf};
