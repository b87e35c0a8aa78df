//! Covariance-aware channel estimation for massive MIMO receivers with a
//! hybrid analog/digital front end.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: dense Hermitian linear algebra (eigendecomposition,
//!   Hermitian-definite pencils, block generalized Rayleigh quotients,
//!   majorization).
//! * [`channel`]: spatial covariance models and channel sampling.
//! * [`combiner`]: RF combiner design for one or several trainings, plus
//!   phase-only and quantized realizations.
//! * [`estimator`]: observation synthesis, the Wiener filter and closed-form
//!   and Monte Carlo MSE evaluation.
//! * [`covest`]: spatial covariance estimation from hybrid observations.
//! * [`harness`]: configuration, seeded sweeps, the downlink
//!   spectral-efficiency model and CSV output used by the CLI.
//!
//! Monte Carlo trials run on rayon when the `parallel` feature is enabled
//! (the default). Results never depend on the worker count.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod combiner;
pub mod covest;
pub mod error;
pub mod estimator;
pub mod exec;
pub mod harness;
pub mod numerics;
pub mod rng;

pub use error::{Error, Result};
pub use numerics::{CMat, CVec, C64};
