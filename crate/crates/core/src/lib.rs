//! Simulator for adaptive phase estimation with two-mode squeezed-vacuum
//! input and parity detection in a Mach-Zehnder interferometer.
//!
//! The numerical core ([`signal`], [`bayes`], [`policy`]) is generic over
//! the floating-point type through [`Scalar`]; the aliases below fix it to
//! `f64`, which is what the Monte Carlo driver uses.

pub mod bayes;
pub mod error;
pub mod fock_oracle;
pub mod legendre;
pub mod montecarlo;
pub mod policy;
pub mod scalar;
pub mod signal;
pub mod verify;

pub use bayes::{static_posterior, wrapped_error, FourierPosterior, Outcome, PosteriorLimits};
pub use error::{Error, Result};
pub use montecarlo::{EnsembleSize, EnsembleStats, PhaseMode, Simulation, TrialConfig, TrialRecord};
pub use policy::{ControlPolicy, PhaseController};
pub use scalar::Scalar;
pub use signal::{LikelihoodTable, PortDistribution, TableParams, TmsvSpec};

pub type Table = signal::LikelihoodTable<f64>;
pub type Table32 = signal::LikelihoodTable<f32>;
pub type Posterior = bayes::FourierPosterior<f64>;
pub type Posterior32 = bayes::FourierPosterior<f32>;
pub type Tmsv = signal::TmsvSpec<f64>;
pub type Controller = policy::PhaseController<f64>;
pub type Limits = signal::ReferenceLimits<f64>;

/// Version string written into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
