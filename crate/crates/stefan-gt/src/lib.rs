//! Simulator for the radially symmetric Stefan problem with surface tension.
//!
//! The solid is a ball of radius Λ_t; its boundary carries the Gibbs–Thomson
//! temperature H(Λ) = γ/Λ and the temperature deficit u(t,·) diffuses as the
//! radial heat equation ∂_t u = ½∂_xx u + (d−1)/(2x) ∂_x u. The crate
//! implements
//!
//! * an implicit Euler scheme that alternates frozen-boundary heat
//!   propagation with an energy-balance selection of the next radius
//!   (all three branches, including complete melting),
//! * a forward weighted-particle representation of the same scheme, used as
//!   an independent cross-validation oracle for the boundary identity,
//! * the physical jump-size conditions and their verification on computed
//!   trajectories, and
//! * the Bessel-process special functions (hitting laws, transition kernel,
//!   exact marginal sampling) everything above is built on.

pub mod boundary;
pub mod config;
pub mod error;
pub mod euler;
pub mod particles;
pub mod physicality;
pub mod heatstep;
pub mod pathsim;
pub mod profile;
pub mod quadrature;
pub mod rng;
pub mod specfun;

pub use boundary::{gibbs_thomson, apriori_radius_bound, BoundaryPath, EnergyAudit, JumpRecord};
pub use config::{Backend, HorizonKind, InitialData, SimConfig};
pub use error::{Result, SimError};
pub use profile::TemperatureProfile;
