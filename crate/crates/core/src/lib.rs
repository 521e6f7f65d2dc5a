//! Beta-Hermite and beta-Laguerre ensembles of types A, B and D, their
//! Cauchy–Bessel (subordinated) counterparts, and the objects that appear
//! when the multiplicities freeze: peak vectors built from orthogonal
//! polynomial zeros, frozen covariances, rescaling maps and half-space
//! limit laws.
//!
//! The crate is organised bottom-up:
//!
//! * [`matkernel`] symmetric eigensolver, Cholesky, `ln Γ`, `erfc`
//! * [`orthopoly`] Hermite/Laguerre evaluation, zeros and zero identities
//! * [`ensembles`] exact log-densities and norming constants
//! * [`freezing`] peak vectors, covariances, rescaling, limit laws
//! * [`sampling`] seeded samplers and sample batches
//! * [`stats`] KS, energy distance, Monte Carlo normalisation
//! * [`verify`] the identity / normalization / CLT suites
//! * [`cli`] the `freezelab` command line

pub mod cli;
pub mod ensembles;
mod error;
pub mod freezing;
pub mod matkernel;
pub mod orthopoly;
pub mod sampling;
pub mod stats;
pub mod verify;

pub use ensembles::{EnsembleLaw, Flavor, MultiplicitySpec, RootSystem};
pub use error::{Error, Result};
pub use freezing::{FrozenCovariance, LimitLaw, LimitSystem, PeakVector};
pub use matkernel::{EigenDecomp, Matrix, SymMatrix};
pub use sampling::{RngStream, SampleBatch};
pub use stats::TestReport;
