//! Bessel-process special functions: modified Bessel functions, first-hitting
//! laws, the transition kernel, and exact marginal sampling.

mod bessel;
mod hitting;
mod kernel;
mod sample;

pub use bessel::{bessel_i, bessel_i_scaled, bessel_k, bessel_k_scaled};
pub use hitting::{hit_eventual, hit_laplace};
pub use kernel::transition_density;
pub use sample::sample_bessel;
