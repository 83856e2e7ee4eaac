//! Real-valued root-MUSIC direction-of-arrival estimation with a full
//! first-order error analysis.
//!
//! Working on the real part of the sample covariance halves the
//! arithmetic cost of root-MUSIC but folds every steering vector
//! together with its conjugate, so each source at angle theta acquires
//! a mirror image at -theta. This crate implements the estimator
//! (subspace split at twice the source count, palindromic rooting
//! polynomial, CBF mirror rejection) together with a non-asymptotic
//! prediction of its errors: the deviation of each true root and each
//! mirror root under one concrete noise realization, and the
//! mean-square error of those deviations under the Gaussian noise
//! model. A Monte Carlo harness reproduces the RMSE-versus-SNR and
//! RMSE-versus-snapshot behaviour and compares it against the
//! predictions.
//!
//! Modules:
//! - [`numerics`]: dense EVD/SVD kernels and polynomial rooting.
//! - [`array_model`]: ULA steering vectors, snapshot synthesis, CBF.
//! - [`estimator`]: the real-valued root-MUSIC pipeline.
//! - [`perturbation`]: conjugate-extension subspaces, root deviation
//!   prediction, theoretical MSE, even-array correction.
//! - [`experiments`]: seeded, schedule-invariant Monte Carlo sweeps and
//!   the root-locus export.
//! - [`oracles`]: independent self-verification checks.
//! - [`cli`]: configuration, CSV output and the command implementations
//!   behind the `rv-root-music` binary.
//!
//! The `examples/` directory carries one runnable program per
//! capability; start with `estimate_two_sources`.

pub mod array_model;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod numerics;
pub mod oracles;
pub mod perturbation;
